"""Gaussian scale mixtures: samplers, densities, sharp moment/entropy
comparisons, and Monte Carlo verification of the associated geometric
inequalities."""

from .convex_measures import (
    Ball2,
    DiagonalImage,
    ProductMixtureMeasure,
    SlabIntersection,
    SpectralStableVector,
    SymmetricConvexBody,
    certified_subset,
    cube,
    gaussian_measure,
    mixture_measure,
    spectral_stable_sample,
    strip,
)
from .entropy import (
    EntropyEstimate,
    EntropySpec,
    SumDensityPool,
    entropy_schur_report,
    renyi_entropy,
    shannon_entropy,
    sum_density,
    swap_report,
)
from .lpball import (
    HyperplaneSpec,
    ball_volume,
    cube_projection_volume,
    laplace_gaussian_functional,
    mean_width_projection,
    projection_volume,
    section_volume,
)
from .majorization import (
    WeightVector,
    as_weight_vector,
    diagonal_chain,
    majorizes,
    random_majorization_pair,
    robin_hood_transfers,
)
from .mixtures import (
    CMCheck,
    DiscreteScaleMixture,
    ExponentialPower,
    GaussianScale,
    InfiniteMomentError,
    MixtureFamily,
    SymmetricStable,
    WeightedSamples,
    complete_monotonicity_check,
    squared_radial_profile,
    stable_density,
)
from .numerics import Estimate, RandomStream, c_p, gamma_p
from .reporting import VerificationReport
from .verify import (
    b_inequality_report,
    correlation_report,
    schur_compare,
    small_ball_report,
    spherical_correlation_report,
    strip_expansion_report,
)
from .weighted_sums import (
    BallUniformSpec,
    MomentSpec,
    ball_marginal_norm,
    ball_uniform_sample,
    khintchine_constants,
    moment_by_quadrature,
    moment_pair,
    weighted_moment,
)

__all__ = [
    "Ball2",
    "BallUniformSpec",
    "CMCheck",
    "DiagonalImage",
    "DiscreteScaleMixture",
    "Estimate",
    "EntropyEstimate",
    "EntropySpec",
    "ExponentialPower",
    "GaussianScale",
    "HyperplaneSpec",
    "InfiniteMomentError",
    "MixtureFamily",
    "MomentSpec",
    "ProductMixtureMeasure",
    "RandomStream",
    "SlabIntersection",
    "SpectralStableVector",
    "SumDensityPool",
    "SymmetricConvexBody",
    "SymmetricStable",
    "VerificationReport",
    "WeightVector",
    "WeightedSamples",
    "as_weight_vector",
    "b_inequality_report",
    "ball_marginal_norm",
    "ball_uniform_sample",
    "ball_volume",
    "c_p",
    "certified_subset",
    "complete_monotonicity_check",
    "correlation_report",
    "cube",
    "cube_projection_volume",
    "diagonal_chain",
    "entropy_schur_report",
    "gamma_p",
    "gaussian_measure",
    "khintchine_constants",
    "laplace_gaussian_functional",
    "majorizes",
    "mean_width_projection",
    "mixture_measure",
    "moment_by_quadrature",
    "moment_pair",
    "projection_volume",
    "random_majorization_pair",
    "renyi_entropy",
    "robin_hood_transfers",
    "schur_compare",
    "section_volume",
    "shannon_entropy",
    "small_ball_report",
    "spectral_stable_sample",
    "spherical_correlation_report",
    "squared_radial_profile",
    "stable_density",
    "strip",
    "strip_expansion_report",
    "sum_density",
    "swap_report",
    "weighted_moment",
]
__version__ = "0.1.0"
