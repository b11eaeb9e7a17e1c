"""Moments of weighted sums sum_i a_i X_i for i.i.d. mixture coordinates.

The central identity: when X_i = Y_i Z_i with Y_i > 0 independent of
Z_i ~ N(0,1), conditioning on the Y's gives

    E |sum a_i X_i|^p = gamma_p^p * E (sum a_i^2 Y_i^2)^(p/2),

with gamma_p the p-th absolute moment of a standard normal to the 1/p.
The reduced estimator samples only the mixing factors, which removes the
Gaussian noise from the comparison of two weight vectors and keeps the
p -> 0 limit well behaved.  The direct estimator samples the X's themselves
and is used as the independent cross-check.

Also provides the two-sided moment-comparison constants (best possible for
each family, attained at a single coordinate or in the many-coordinate
Gaussian limit) and the uniform distribution on the unit l_q ball together
with its marginal moments, which satisfy the same square-array structure
with the inequalities flipped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import digamma

from .majorization import WeightVector, as_weight_vector
from .mixtures import MixtureFamily, SymmetricStable
from .numerics import (
    Estimate,
    RandomStream,
    gamma_p,
    integrate,
    log_gamma_ratio,
)
from .reporting import PairedComparison

__all__ = [
    "MomentSpec",
    "BallUniformSpec",
    "weighted_moment",
    "moment_pair",
    "moment_by_quadrature",
    "khintchine_constants",
    "ball_uniform_sample",
    "ball_radius_quantile",
    "ball_marginal_norm",
    "ball_khintchine_constants",
]

METHODS = ("reduced_mc", "direct_mc", "quadrature")


@dataclass(frozen=True)
class MomentSpec:
    """What to estimate: || sum_i a_i X_i ||_p for one family."""

    family: MixtureFamily
    weights: WeightVector
    p: float
    method: str = "reduced_mc"

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.p <= -1.0:
            raise ValueError("p must exceed -1")
        if not any(c != 0.0 for c in self.weights.coords):
            raise ValueError("weights must not all be zero")


def _mixing_pool(family: MixtureFamily, n_coords: int, n_samples: int,
                 stream: RandomStream):
    """Matrix of mixing factors (n_samples, n_coords) and joint weights."""
    cols = []
    weights = np.ones(n_samples)
    for i in range(n_coords):
        ws = family.sample_mixing_factor(n_samples, stream.child(i))
        cols.append(ws.values)
        if not ws.exact:
            weights = weights * ws.weights
    return np.column_stack(cols), weights


def _norm_from_power_mean(p: float, mean: float, se: float) -> tuple[float, float]:
    """(E T^(p/2))^(1/p) scaled by gamma_p, with delta-method stderr."""
    g = gamma_p(p)
    norm = g * mean ** (1.0 / p)
    dnorm = g * abs(1.0 / p) * mean ** (1.0 / p - 1.0)
    return norm, dnorm * se


def _weighted_stats(values: np.ndarray, weights: np.ndarray) -> tuple[float, float]:
    total = weights.sum()
    mean = float(np.dot(weights, values) / total)
    resid = values - mean
    var = float(np.dot(weights ** 2, resid ** 2)) / total ** 2
    return mean, math.sqrt(var)


def weighted_moment(spec: MomentSpec, n_samples: int,
                    stream: RandomStream) -> Estimate:
    """p-norm of the weighted sum, by the requested route.

    The same ``stream`` always yields the same estimate; independent
    replicates should use distinct stream ids.
    """
    a = spec.weights.array
    p = spec.p
    family = spec.family
    # surfaces InfiniteMomentError before any sampling
    if p != 0.0:
        family.abs_moment(p)

    if spec.method == "quadrature":
        return moment_by_quadrature(family, spec.weights, p)

    if spec.method == "direct_mc":
        cols = [family.sample_direct(n_samples, stream.child(i))
                for i in range(len(a))]
        s = np.column_stack(cols) @ a
        if p == 0.0:
            mean, se = _weighted_stats(np.log(np.abs(s)), np.ones(n_samples))
            norm = math.exp(mean)
            return Estimate(norm, norm * se, n_samples, stream.seed,
                            stream.stream_id)
        mean, se = _weighted_stats(np.abs(s) ** p, np.ones(n_samples))
        norm = mean ** (1.0 / p)
        se_norm = abs(1.0 / p) * mean ** (1.0 / p - 1.0) * se
        return Estimate(norm, se_norm, n_samples, stream.seed, stream.stream_id)

    factors, weights = _mixing_pool(family, len(a), n_samples, stream)
    t = factors ** 2 @ a ** 2
    if p == 0.0:
        mean, se = _weighted_stats(0.5 * np.log(t), weights)
        norm = gamma_p(0.0) * math.exp(mean)
        return Estimate(norm, norm * se, n_samples, stream.seed,
                        stream.stream_id)
    mean, se = _weighted_stats(t ** (p / 2.0), weights)
    norm, se_norm = _norm_from_power_mean(p, mean, se)
    return Estimate(norm, se_norm, n_samples, stream.seed, stream.stream_id)


def moment_pair(family: MixtureFamily, weights_a, weights_b, p: float,
                n_samples: int, stream: RandomStream) -> PairedComparison:
    """Both p-norms on one shared mixing-factor pool.

    The difference stderr accounts for the covariance induced by the
    coupling, so ordered comparisons resolve at far smaller budgets than
    two independent estimates would allow.
    """
    va = as_weight_vector(weights_a)
    vb = as_weight_vector(weights_b)
    if len(va.coords) != len(vb.coords):
        raise ValueError("weight vectors must have equal length")
    if p <= -1.0:
        raise ValueError("p must exceed -1")
    if p != 0.0:
        family.abs_moment(p)

    factors, w = _mixing_pool(family, len(va.coords), n_samples, stream)
    sq = factors ** 2
    ta = sq @ va.array ** 2
    tb = sq @ vb.array ** 2
    if p == 0.0:
        ga, gb = 0.5 * np.log(ta), 0.5 * np.log(tb)
    else:
        ga, gb = ta ** (p / 2.0), tb ** (p / 2.0)

    total = w.sum()
    ma = float(np.dot(w, ga) / total)
    mb = float(np.dot(w, gb) / total)
    ra, rb = ga - ma, gb - mb
    w2 = w ** 2
    var_a = float(np.dot(w2, ra ** 2)) / total ** 2
    var_b = float(np.dot(w2, rb ** 2)) / total ** 2
    cov = float(np.dot(w2, ra * rb)) / total ** 2

    if p == 0.0:
        na = gamma_p(0.0) * math.exp(ma)
        nb = gamma_p(0.0) * math.exp(mb)
        da, db = na, nb
    else:
        g = gamma_p(p)
        na = g * ma ** (1.0 / p)
        nb = g * mb ** (1.0 / p)
        da = g * abs(1.0 / p) * ma ** (1.0 / p - 1.0)
        db = g * abs(1.0 / p) * mb ** (1.0 / p - 1.0)
    var_diff = da ** 2 * var_a + db ** 2 * var_b - 2.0 * da * db * cov
    est_a = Estimate(na, da * math.sqrt(var_a), n_samples, stream.seed,
                     stream.stream_id)
    est_b = Estimate(nb, db * math.sqrt(var_b), n_samples, stream.seed,
                     stream.stream_id)
    return PairedComparison(est_a, est_b, na - nb,
                            math.sqrt(max(var_diff, 0.0)))


def moment_by_quadrature(family: MixtureFamily, weights, p: float) -> Estimate:
    """Deterministic route, restricted to sums with one nonzero coordinate
    (the weighted-sum density has no closed form beyond that)."""
    v = as_weight_vector(weights)
    nonzero = [abs(c) for c in v.coords if c != 0.0]
    if len(nonzero) != 1:
        raise ValueError("quadrature supports exactly one nonzero weight")
    scale = nonzero[0]
    if isinstance(family, SymmetricStable) and family.p < 2.0:
        raise ValueError(
            "quadrature over a heavy-tailed oscillatory density is not "
            "supported; use abs_moment or a Monte Carlo method")
    if p != 0.0:
        family.abs_moment(p)

    if p == 0.0:
        val = scale * math.exp(family.log_abs_moment())
        return Estimate(val, 0.0, 1, 0, 0)
    dens = family.density
    moment = 2.0 * integrate(lambda x: np.abs(x) ** p * dens(x), 0.0, np.inf,
                             rel_tol=1e-10)
    return Estimate(scale * moment ** (1.0 / p), 0.0, 1, 0, 0)


def khintchine_constants(family: MixtureFamily, p: float) -> tuple[float, float]:
    """Best constants (lower, upper) comparing ||sum a_i X_i||_p with
    ||sum a_i X_i||_2 over all weight vectors.

    For p >= 2 the lower constant is the Gaussian ratio gamma_p (diagonal
    limit) and the upper is attained at a single coordinate; for
    -1 < p < 2 the two extremes trade places.  Requires a finite second
    moment.
    """
    if p <= -1.0:
        raise ValueError("p must exceed -1")
    norm2 = math.sqrt(family.abs_moment(2.0))
    if p == 2.0:
        return 1.0, 1.0
    ratio = family.norm(p) / norm2
    g = gamma_p(p)
    if p > 2.0:
        return g, ratio
    return ratio, g


# -- uniform distribution on the unit l_q ball ------------------------------


def _validate_ball(q: float, n: int):
    if not 0.0 < q <= 2.0:
        raise ValueError("q must lie in (0, 2]")
    if n < 1:
        raise ValueError("dimension must be at least 1")


@dataclass(frozen=True)
class BallUniformSpec:
    """Unit l_q ball in R^n, q in (0, 2] so the coordinate factors are
    Gaussian mixtures."""

    q: float
    n: int

    def __post_init__(self):
        _validate_ball(self.q, self.n)


def ball_uniform_sample(spec: BallUniformSpec, n_samples: int,
                        stream: RandomStream) -> np.ndarray:
    """Exact uniform draws from the unit l_q ball in R^n.

    Uses the normalized-projection construction: independent coordinates
    with density proportional to exp(-|t|^q), plus one extra standard
    exponential in the q-th-power denominator.
    """
    q, n = spec.q, spec.n
    if n_samples < 1:
        raise ValueError("need at least one sample")
    kinds = [("gamma", 1.0 / q), "uniform"] * n + ["exponential"]
    blocks = stream.draw(n_samples, tuple(kinds))
    cols = []
    for i in range(n):
        g, u = blocks[2 * i], blocks[2 * i + 1]
        cols.append(np.sign(u - 0.5) * g ** (1.0 / q))
    y = np.column_stack(cols)
    extra = blocks[-1]
    denom = (np.sum(np.abs(y) ** q, axis=1) + extra) ** (1.0 / q)
    return y / denom[:, None]


def ball_radius_quantile(q: float, n: int, u) -> np.ndarray:
    """Quantile function of the l_q radius of a uniform ball point:
    P(||X||_q <= r) = r^n, so the quantile is u^(1/n)."""
    _validate_ball(q, n)
    return np.asarray(u, dtype=float) ** (1.0 / n)


def ball_marginal_norm(q: float, n: int, r: float) -> float:
    """r-norm of one coordinate of a uniform point in the unit l_q ball.

    The marginal moment is a ratio of beta functions in r/q with second
    parameter (n + q - 1)/q; the r = 0 norm is its limit via digammas.
    """
    _validate_ball(q, n)
    if n < 2:
        raise ValueError("marginals need dimension at least 2")
    if r <= -1.0:
        raise ValueError("r must exceed -1")
    b = (n + q - 1.0) / q
    if r == 0.0:
        return math.exp((digamma(1.0 / q) - digamma(1.0 / q + b)) / q)
    log_moment = (log_gamma_ratio(1.0 / q, r / q)
                  - log_gamma_ratio(1.0 / q + b, r / q))
    return math.exp(log_moment / r)


def ball_khintchine_constants(q: float, n: int, p: float) -> tuple[float, float]:
    """Constants (lower, upper) comparing ||sum a_i X_i||_p with
    ||sum a_i X_i||_2 for X uniform on the l_q ball, same shape as the
    independent case: the marginal ratio on the single-coordinate side
    and gamma_p on the diagonal side.

    The marginal-ratio side is attained at a = e_1 in every dimension.
    The gamma_p side is the dimension-free constant; at small n the true
    diagonal extreme can fall short of it (coordinates of a ball are more
    concentrated than their high-dimensional limit), so treat it as the
    asymptotic constant rather than a per-dimension bound.
    """
    if p <= -1.0:
        raise ValueError("p must exceed -1")
    if p == 2.0:
        _validate_ball(q, n)
        if n < 2:
            raise ValueError("marginals need dimension at least 2")
        return 1.0, 1.0
    ratio = ball_marginal_norm(q, n, p) / ball_marginal_norm(q, n, 2.0)
    g = gamma_p(p)
    if p > 2.0:
        return g, ratio
    return ratio, g
