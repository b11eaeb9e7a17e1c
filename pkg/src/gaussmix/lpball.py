"""Sections, projections, and width functionals of the unit q-ball.

Hyperplane sections of B_q^n for q < 2 are computed through the mixing
representation of the q-exponential density: the section volume is
proportional to the negative-square-root moment E (sum a_j^2 Y_j^2)^(-1/2)
of the mixing factors.  Projections for q > 2 use the one-dimensional
density whose independent products push forward to the projection
functional, sampled through a gamma power.  Both proportionality
constants are pinned at a = e1, where section and projection alike
coincide with B_q^(n-1); estimating the pinned case and the requested
case on shared draws makes the pin exact and tightens every comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import null_space
from scipy.special import gammaln

from .mixtures import ExponentialPower
from .numerics import Estimate, RandomStream

__all__ = [
    "HyperplaneSpec",
    "ball_volume",
    "section_volume",
    "projection_volume",
    "cube_projection_volume",
    "laplace_gaussian_functional",
    "mean_width_projection",
]


@dataclass(frozen=True)
class HyperplaneSpec:
    """Hyperplane through the origin, given by its unit normal."""

    normal: tuple[float, ...]

    def __post_init__(self):
        normal = tuple(float(x) for x in self.normal)
        if len(normal) < 2:
            raise ValueError("need ambient dimension at least 2")
        length = math.sqrt(math.fsum(x * x for x in normal))
        if abs(length - 1.0) > 1e-12:
            raise ValueError("normal must be a unit vector")
        object.__setattr__(self, "normal", normal)

    @property
    def dimension(self) -> int:
        return len(self.normal)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.normal)


def ball_volume(q, n: int) -> float:
    """Volume of the unit ball of the q-norm in n dimensions."""
    if n < 1:
        raise ValueError("dimension must be positive")
    if q == math.inf:
        return 2.0 ** n
    if not (q > 0.0 and math.isfinite(q)):
        raise ValueError("q must be positive or infinity")
    return math.exp(n * (math.log(2.0) + gammaln(1.0 + 1.0 / q))
                    - gammaln(1.0 + n / q))


def _paired_ratio(num: np.ndarray, den: np.ndarray,
                  weights: np.ndarray) -> tuple[float, float]:
    """Weighted mean(num)/mean(den) with a covariance-aware stderr."""
    total = weights.sum()
    mean_n = float(np.dot(weights, num) / total)
    mean_d = float(np.dot(weights, den) / total)
    un = weights * (num - mean_n) / total
    ud = weights * (den - mean_d) / total
    var_n = float(np.dot(un, un))
    var_d = float(np.dot(ud, ud))
    cov = float(np.dot(un, ud))
    ratio = mean_n / mean_d
    rel_var = (var_n / mean_n ** 2 + var_d / mean_d ** 2
               - 2.0 * cov / (mean_n * mean_d))
    return ratio, abs(ratio) * math.sqrt(max(rel_var, 0.0))


def section_volume(q: float, hyperplane: HyperplaneSpec, n_samples: int,
                   stream: RandomStream) -> Estimate:
    """Volume of the hyperplane section of B_q^n, q in (0, 2).

    The estimator is the ratio of E (sum a_j^2 Y_j^2)^(-1/2) to its value
    at e1, on shared mixing draws, scaled by the volume of B_q^(n-1);
    a = e1 is therefore exact.
    """
    if not (0.0 < q < 2.0):
        raise ValueError("sections require q in (0, 2)")
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    family = ExponentialPower(q)
    a = hyperplane.array
    n = hyperplane.dimension
    sq = a ** 2
    acc = np.zeros(n_samples)
    weights = np.ones(n_samples)
    first = None
    for i in range(n):
        ws = family.sample_mixing_factor(n_samples, stream.child(i))
        if i == 0:
            first = ws.values
        if sq[i] != 0.0:
            acc += sq[i] * ws.values ** 2
        if not ws.exact:
            weights *= ws.weights
    ratio, se = _paired_ratio(acc ** -0.5, 1.0 / first, weights)
    scale = ball_volume(q, n - 1)
    return Estimate(scale * ratio, scale * se, n_samples,
                    stream.seed, stream.stream_id)


def _projection_draws(q: float, n_samples: int, n: int,
                      stream: RandomStream) -> np.ndarray:
    """(n_samples, n) draws of the density whose products represent
    projections: |X| = G^((q-1)/q) with G gamma of shape 1/q."""
    power = (q - 1.0) / q
    out = np.empty((n_samples, n))
    for i in range(n):
        g, u = stream.child(i).draw(n_samples, (("gamma", 1.0 / q), "uniform"))
        out[:, i] = np.sign(u - 0.5) * g ** power
    return out


def projection_volume(q: float, hyperplane: HyperplaneSpec, n_samples: int,
                      stream: RandomStream) -> Estimate:
    """Volume of the hyperplane projection of B_q^n, q in (2, inf).

    Proportional to E |sum a_i X_i|; pinned at e1 on shared draws, like
    the section estimator.  Use cube_projection_volume for q = inf.
    """
    if q == math.inf:
        raise ValueError("q = inf has a closed form; "
                         "use cube_projection_volume")
    if not (2.0 < q < math.inf):
        raise ValueError("projections require q in (2, inf)")
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    a = hyperplane.array
    draws = _projection_draws(q, n_samples, hyperplane.dimension, stream)
    num = np.abs(draws @ a)
    den = np.abs(draws[:, 0])
    ratio, se = _paired_ratio(num, den, np.ones(n_samples))
    scale = ball_volume(q, hyperplane.dimension - 1)
    return Estimate(scale * ratio, scale * se, n_samples,
                    stream.seed, stream.stream_id)


def cube_projection_volume(n: int, hyperplane: HyperplaneSpec) -> float:
    """Volume of the hyperplane projection of the cube [-1, 1]^n."""
    if hyperplane.dimension != n:
        raise ValueError("hyperplane dimension mismatch")
    return 2.0 ** (n - 1) * math.fsum(abs(x) for x in hyperplane.normal)


def _orthonormal_frame(hyperplane: HyperplaneSpec) -> np.ndarray:
    """(n, n-1) orthonormal basis of the hyperplane."""
    frame = null_space(hyperplane.array[None, :])
    if frame.shape != (hyperplane.dimension, hyperplane.dimension - 1):
        raise ValueError("degenerate hyperplane")
    return frame


def laplace_gaussian_functional(q: float, lam: float,
                                hyperplane: HyperplaneSpec, n_samples: int,
                                stream: RandomStream) -> Estimate:
    """E exp(-lam |G|_q^q) for G standard Gaussian on the hyperplane.

    Points of the hyperplane see the section of B_q^n through the plain
    q-norm, so the functional needs no section geometry.
    """
    if not (0.0 < q < 2.0):
        raise ValueError("the functional is defined for q in (0, 2)")
    if not (lam > 0.0):
        raise ValueError("lam must be positive")
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    frame = _orthonormal_frame(hyperplane)
    k = hyperplane.dimension - 1
    xi = stream.child(0).normal(n_samples * k).reshape(n_samples, k)
    points = xi @ frame.T
    values = np.exp(-lam * np.sum(np.abs(points) ** q, axis=1))
    mean = float(values.mean())
    se = float(values.std(ddof=1)) / math.sqrt(n_samples)
    return Estimate(mean, se, n_samples, stream.seed, stream.stream_id)


def mean_width_projection(q_star: float, hyperplane: HyperplaneSpec,
                          n_samples: int, stream: RandomStream) -> Estimate:
    """Spherical average of the support function of Proj B_(q*)^n on the
    hyperplane: E |theta|_q over unit theta, with q dual to q_star."""
    if not (q_star >= 2.0):
        raise ValueError("q_star must lie in [2, inf]")
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    q = 1.0 if q_star == math.inf else q_star / (q_star - 1.0)
    frame = _orthonormal_frame(hyperplane)
    k = hyperplane.dimension - 1
    xi = stream.child(0).normal(n_samples * k).reshape(n_samples, k)
    xi /= np.linalg.norm(xi, axis=1, keepdims=True)
    points = xi @ frame.T
    values = np.sum(np.abs(points) ** q, axis=1) ** (1.0 / q)
    mean = float(values.mean())
    se = float(values.std(ddof=1)) / math.sqrt(n_samples)
    return Estimate(mean, se, n_samples, stream.seed, stream.stream_id)
