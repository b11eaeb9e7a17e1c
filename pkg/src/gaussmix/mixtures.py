"""Symmetric Gaussian scale mixtures.

A centered random variable X is a Gaussian mixture when X = Y*Z with Y > 0
independent of Z ~ N(0,1).  For a density f this holds exactly when the
squared-radial profile g(x) = f(sqrt(x)) is completely monotonic, which is
what :func:`complete_monotonicity_check` probes by finite differences.

Built-in families (all symmetric about 0):

* ``GaussianScale(sigma)``       N(0, sigma^2); mixing factor identically sigma.
* ``ExponentialPower(p)``        density c_p exp(-|t|^p), p in (0, 2].  Mixing
  factor Y = (2V)^(-1/2) where V has density proportional to t^(-1/2) g_{p/2}(t)
  against the positive stable density g_{p/2}; expectations against V are
  realized by importance-weighting positive stable draws W with weight W^(-1/2).
* ``SymmetricStable(p)``         characteristic function exp(-|t|^p), p in (0, 2];
  mixing factor Y = (2W)^(1/2) with W positive (p/2)-stable.
* ``DiscreteScaleMixture(sigmas, probs)``  finite mixture of centered Gaussians.

Direct samplers are exact for every family (gamma transform, Chambers-
Mallows-Stuck, inverse CDF), so the weighted mixing-factor route is only
needed where the conditional-Gaussian representation itself is exploited.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import digamma, gammaln

from .numerics import (
    RandomStream,
    c_p,
    gamma_p,
    integrate,
    log_gamma_ratio,
)

__all__ = [
    "MixtureFamily",
    "GaussianScale",
    "ExponentialPower",
    "SymmetricStable",
    "DiscreteScaleMixture",
    "WeightedSamples",
    "InfiniteMomentError",
    "kanter_positive_stable",
    "cms_symmetric_stable",
    "stable_density",
    "stable_tail_mass",
    "complete_monotonicity_check",
    "CMCheck",
    "squared_radial_profile",
    "DEFAULT_CM_GRID",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)
# exp(-t^p) < 1e-16 beyond this point
_LOG_1E16 = 16.0 * math.log(10.0)


class InfiniteMomentError(ValueError):
    """Requested moment does not exist for this family."""


@dataclass(frozen=True)
class WeightedSamples:
    """Batch of draws with importance weights (weight 1 when exact)."""

    values: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        if self.values.shape != self.weights.shape:
            raise ValueError("values and weights must be aligned")

    def __len__(self) -> int:
        return self.values.size

    @property
    def exact(self) -> bool:
        return bool(np.all(self.weights == 1.0))


# ---------------------------------------------------------------------------
# stable samplers

def kanter_positive_stable(alpha: float, n: int, stream: RandomStream) -> np.ndarray:
    """Positive alpha-stable draws with Laplace transform exp(-s^alpha), alpha in (0,1).

    Kanter's representation: W = (A(U)/E)^((1-alpha)/alpha) with U uniform,
    E standard exponential, and
    A(u) = sin(alpha*pi*u)^(alpha/(1-alpha)) * sin((1-alpha)*pi*u)
           / sin(pi*u)^(1/(1-alpha)).
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"kanter sampler requires alpha in (0,1), got {alpha}")
    u, e = stream.draw(n, ("uniform", "exponential"))
    pu = np.pi * u
    r = alpha / (1.0 - alpha)
    log_a = (r * np.log(np.sin(alpha * pu))
             + np.log(np.sin((1.0 - alpha) * pu))
             - (1.0 + r) * np.log(np.sin(pu)))
    with np.errstate(over="ignore"):
        return np.exp((log_a - np.log(e)) / r)


def cms_symmetric_stable(alpha: float, n: int, stream: RandomStream) -> np.ndarray:
    """Symmetric alpha-stable draws with characteristic function exp(-|t|^alpha).

    Chambers-Mallows-Stuck: with V uniform on (-pi/2, pi/2) and E standard
    exponential,
    X = sin(alpha V)/cos(V)^(1/alpha) * (cos((alpha-1) V)/E)^((1-alpha)/alpha).
    At alpha = 1 the second factor is identically 1 and X = tan(V) (Cauchy);
    at alpha = 2 the formula reduces to 2 sin(V) sqrt(E), i.e. N(0, 2).
    """
    if not 0.0 < alpha <= 2.0:
        raise ValueError(f"stable exponent must lie in (0,2], got {alpha}")
    u, e = stream.draw(n, ("uniform", "exponential"))
    v = np.pi * (u - 0.5)
    base = np.sin(alpha * v) / np.cos(v) ** (1.0 / alpha)
    expo = (1.0 - alpha) / alpha
    if expo == 0.0:
        return base
    with np.errstate(over="ignore"):
        return base * (np.cos((alpha - 1.0) * v) / e) ** expo


# ---------------------------------------------------------------------------
# symmetric stable density: oscillatory quadrature plus power series tail

def _stable_series(p: float, x: float) -> tuple[float, float]:
    """Power series (1/pi) sum_k (-1)^(k+1) Gamma(kp+1)/k! sin(k pi p/2) x^(-kp-1).

    Convergent for p < 1; asymptotic for p >= 1 (summed to its smallest term).
    Returns (value, bound on the truncation term) -- caller checks the bound.
    """
    total = 0.0
    last = math.inf
    term_bound = math.inf
    for k in range(1, 200):
        log_mag = gammaln(k * p + 1.0) - gammaln(k + 1.0) - (k * p + 1.0) * math.log(x)
        if log_mag > 700.0:
            break
        mag = math.exp(log_mag)
        if p >= 1.0 and mag > last:
            term_bound = last
            break
        term = mag * math.sin(k * math.pi * p / 2.0) * (1 if k % 2 == 1 else -1)
        total += term
        last = mag
        if mag < 1e-18 * max(abs(total), 1e-300):
            term_bound = mag
            break
    return total / math.pi, term_bound / math.pi


def _stable_density_scalar(p: float, x: float) -> float:
    x = abs(x)
    cutoff = _LOG_1E16 ** (1.0 / p)
    half_periods = x * cutoff / math.pi
    if half_periods <= 40.0:
        val = integrate(lambda t: math.cos(t * x) * math.exp(-t ** p), 0.0, cutoff,
                        rel_tol=1e-11, abs_tol=1e-13)
        return val / math.pi
    # many oscillations: try the series first, fall back to weighted quadrature
    if x >= 8.0:
        val, bound = _stable_series(p, x)
        if bound <= 1e-10 * max(abs(val), 1e-14):
            return val
    from scipy.integrate import quad

    val, err = quad(lambda t: math.exp(-t ** p), 0.0, cutoff,
                    weight="cos", wvar=x, limit=2000, epsabs=1e-13, epsrel=1e-11)
    return val / math.pi


def stable_density(p: float, x) -> np.ndarray | float:
    """Density of the symmetric stable law with characteristic function exp(-|t|^p):
    (1/pi) * integral_0^inf cos(tx) exp(-t^p) dt, truncated where exp(-t^p) < 1e-16.
    """
    if not 0.0 < p <= 2.0:
        raise ValueError(f"stable exponent must lie in (0,2], got {p}")
    if np.ndim(x) == 0:
        return _stable_density_scalar(p, float(x))
    return np.array([_stable_density_scalar(p, float(xi)) for xi in np.ravel(x)]).reshape(np.shape(x))


def stable_tail_mass(p: float, t: float) -> float:
    """P(|X| > t) for the symmetric stable law, by the term-wise integrated series.

    Requires t large enough that the series resolves the tail (t >= 8 or so);
    exact for p < 1 (convergent series), smallest-term truncation otherwise.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    total = 0.0
    last = math.inf
    for k in range(1, 200):
        log_mag = (gammaln(k * p + 1.0) - gammaln(k + 1.0)
                   - math.log(k * p) - k * p * math.log(t))
        mag = math.exp(log_mag)
        if p >= 1.0 and mag > last:
            break
        total += mag * math.sin(k * math.pi * p / 2.0) * (1 if k % 2 == 1 else -1)
        last = mag
        if mag < 1e-18 * max(abs(total), 1e-300):
            break
    return 2.0 * total / math.pi


# ---------------------------------------------------------------------------
# families

class MixtureFamily:
    """Interface shared by the built-in Gaussian mixture families."""

    def sample_direct(self, n: int, stream: RandomStream) -> np.ndarray:
        raise NotImplementedError

    def sample_mixing_factor(self, n: int, stream: RandomStream) -> WeightedSamples:
        raise NotImplementedError

    def density(self, x) -> np.ndarray | float:
        raise NotImplementedError

    def abs_moment(self, r: float) -> float:
        """E|X|^r (raises InfiniteMomentError when divergent)."""
        raise NotImplementedError

    def log_abs_moment(self) -> float:
        """E log|X| (the r -> 0 derivative of the moment curve)."""
        raise NotImplementedError

    def norm(self, r: float) -> float:
        """r-norm (E|X|^r)^(1/r), continued by exp(E log|X|) at r = 0.

        Subclasses override with forms that stay accurate as r -> 0,
        where the generic power loses precision.
        """
        if r == 0.0:
            return math.exp(self.log_abs_moment())
        return self.abs_moment(r) ** (1.0 / r)

    def variance(self) -> float:
        return self.abs_moment(2.0)

    @property
    def exact_mixing(self) -> bool:
        """True when sample_mixing_factor carries unit weights."""
        return True

    @property
    def log_concave_factor(self) -> bool | None:
        """Whether log Y is known to have a log-concave law (None = open)."""
        return None


_NEG_HALF_LOG_2E = -(np.euler_gamma + math.log(2.0)) / 2.0  # E log|Z|


@dataclass(frozen=True)
class GaussianScale(MixtureFamily):
    sigma: float

    def __post_init__(self):
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise ValueError(f"sigma must be positive and finite, got {self.sigma}")

    def sample_direct(self, n, stream):
        return self.sigma * stream.normal(n)

    def sample_mixing_factor(self, n, stream):
        return WeightedSamples(np.full(n, self.sigma), np.ones(n))

    def density(self, x):
        x = np.asarray(x, dtype=float)
        out = np.exp(-x * x / (2.0 * self.sigma ** 2)) / (_SQRT_2PI * self.sigma)
        return float(out) if out.ndim == 0 else out

    def abs_moment(self, r):
        if r <= -1:
            raise InfiniteMomentError(f"E|X|^r diverges for r <= -1 (r={r})")
        return self.sigma ** r * gamma_p(r) ** r if r != 0 else 1.0

    def log_abs_moment(self):
        return math.log(self.sigma) + _NEG_HALF_LOG_2E

    def norm(self, r):
        if r <= -1:
            raise InfiniteMomentError(f"E|X|^r diverges for r <= -1 (r={r})")
        return self.sigma * gamma_p(r)

    @property
    def log_concave_factor(self):
        return True  # degenerate law


@dataclass(frozen=True)
class ExponentialPower(MixtureFamily):
    """Density c_p exp(-|t|^p); a Gaussian mixture exactly for p in (0, 2]."""

    p: float

    def __post_init__(self):
        if not 0.0 < self.p <= 2.0:
            raise ValueError(f"exponential power exponent must lie in (0,2], got {self.p}")

    def sample_direct(self, n, stream):
        # |X| = G^(1/p) with G ~ Gamma(1/p): change of variables gives c_p exp(-|t|^p)
        g, u = stream.draw(n, (("gamma", 1.0 / self.p), "uniform"))
        return np.sign(u - 0.5) * g ** (1.0 / self.p)

    def sample_mixing_factor(self, n, stream):
        if self.p == 2.0:
            return WeightedSamples(np.full(n, 1.0 / math.sqrt(2.0)), np.ones(n))
        w = kanter_positive_stable(self.p / 2.0, n, stream)
        return WeightedSamples((2.0 * w) ** -0.5, w ** -0.5)

    def density(self, x):
        x = np.asarray(x, dtype=float)
        out = c_p(self.p) * np.exp(-np.abs(x) ** self.p)
        return float(out) if out.ndim == 0 else out

    def abs_moment(self, r):
        if r <= -1:
            raise InfiniteMomentError(f"E|X|^r diverges for r <= -1 (r={r})")
        if r == 0:
            return 1.0
        return math.exp(gammaln((r + 1.0) / self.p) - gammaln(1.0 / self.p))

    def log_abs_moment(self):
        return float(digamma(1.0 / self.p)) / self.p

    def norm(self, r):
        if r <= -1:
            raise InfiniteMomentError(f"E|X|^r diverges for r <= -1 (r={r})")
        if r == 0.0:
            return math.exp(self.log_abs_moment())
        return math.exp(log_gamma_ratio(1.0 / self.p, r / self.p) / r)

    @property
    def exact_mixing(self):
        return self.p == 2.0

    @property
    def log_concave_factor(self):
        return True if self.p <= 1.0 or self.p == 2.0 else None


@dataclass(frozen=True)
class SymmetricStable(MixtureFamily):
    """Characteristic function exp(-|t|^p); infinite variance for p < 2."""

    p: float

    def __post_init__(self):
        if not 0.0 < self.p <= 2.0:
            raise ValueError(f"stable exponent must lie in (0,2], got {self.p}")

    def sample_direct(self, n, stream):
        return cms_symmetric_stable(self.p, n, stream)

    def sample_mixing_factor(self, n, stream):
        if self.p == 2.0:
            return WeightedSamples(np.full(n, math.sqrt(2.0)), np.ones(n))
        w = kanter_positive_stable(self.p / 2.0, n, stream)
        return WeightedSamples(np.sqrt(2.0 * w), np.ones(n))

    def density(self, x):
        return stable_density(self.p, x)

    def abs_moment(self, r):
        if r <= -1:
            raise InfiniteMomentError(f"E|X|^r diverges for r <= -1 (r={r})")
        if r == 0:
            return 1.0
        if self.p == 2.0:
            # N(0, 2): the Gamma(1-r/p)/Gamma(1-r/2) factor in the Mellin
            # transform cancels exactly (poles included)
            return math.exp(r * math.log(2.0) + gammaln((1.0 + r) / 2.0)
                            - 0.5 * math.log(math.pi))
        if r >= self.p:
            raise InfiniteMomentError(
                f"E|X|^r infinite for the stable law with exponent {self.p} when r >= {self.p}")
        # Mellin transform: E|X|^r = 2^r Gamma((1+r)/2) Gamma(1-r/p) / (sqrt(pi) Gamma(1-r/2))
        return math.exp(r * math.log(2.0) + gammaln((1.0 + r) / 2.0)
                        + gammaln(1.0 - r / self.p)
                        - 0.5 * math.log(math.pi) - gammaln(1.0 - r / 2.0))

    def log_abs_moment(self):
        return float(np.euler_gamma) * (1.0 / self.p - 1.0)

    def norm(self, r):
        if r <= -1:
            raise InfiniteMomentError(f"E|X|^r diverges for r <= -1 (r={r})")
        if r == 0.0:
            return math.exp(self.log_abs_moment())
        if self.p == 2.0:
            return math.sqrt(2.0) * gamma_p(r)
        if r >= self.p:
            raise InfiniteMomentError(
                f"E|X|^r infinite for the stable law with exponent {self.p} when r >= {self.p}")
        # same Mellin factors as abs_moment, kept as Gamma ratios so the
        # 1/r root survives r -> 0
        log_ratio = (log_gamma_ratio(0.5, r / 2.0)
                     + log_gamma_ratio(1.0, -r / self.p)
                     - log_gamma_ratio(1.0, -r / 2.0))
        return 2.0 * math.exp(log_ratio / r)

    @property
    def log_concave_factor(self):
        return True if self.p <= 1.0 or self.p == 2.0 else None


@dataclass(frozen=True)
class DiscreteScaleMixture(MixtureFamily):
    sigmas: tuple[float, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "sigmas", tuple(float(s) for s in self.sigmas))
        object.__setattr__(self, "probs", tuple(float(q) for q in self.probs))
        if len(self.sigmas) != len(self.probs) or not self.sigmas:
            raise ValueError("sigmas and probs must be non-empty and aligned")
        if any(s <= 0 for s in self.sigmas) or any(q < 0 for q in self.probs):
            raise ValueError("scales must be positive, probabilities nonnegative")
        if abs(math.fsum(self.probs) - 1.0) > 1e-12:
            raise ValueError("probabilities must sum to 1 within 1e-12")

    def _pick_scales(self, n, stream):
        u, z = stream.draw(n, ("uniform", "normal"))
        cum = np.cumsum(self.probs)
        cum[-1] = 1.0
        idx = np.searchsorted(cum, u, side="left")
        return np.asarray(self.sigmas)[idx], z

    def sample_direct(self, n, stream):
        scales, z = self._pick_scales(n, stream)
        return scales * z

    def sample_mixing_factor(self, n, stream):
        scales, _ = self._pick_scales(n, stream)
        return WeightedSamples(scales, np.ones(n))

    def density(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x, dtype=float)
        for s, q in zip(self.sigmas, self.probs):
            out = out + q * np.exp(-x * x / (2.0 * s * s)) / (_SQRT_2PI * s)
        return float(out) if out.ndim == 0 else out

    def abs_moment(self, r):
        if r <= -1:
            raise InfiniteMomentError(f"E|X|^r diverges for r <= -1 (r={r})")
        if r == 0:
            return 1.0
        ey = math.fsum(q * s ** r for s, q in zip(self.sigmas, self.probs))
        return ey * gamma_p(r) ** r

    def log_abs_moment(self):
        return math.fsum(q * math.log(s) for s, q in zip(self.sigmas, self.probs)) + _NEG_HALF_LOG_2E

    def norm(self, r):
        if r <= -1:
            raise InfiniteMomentError(f"E|X|^r diverges for r <= -1 (r={r})")
        if abs(r) < 1e-5:
            # scale factor to second order in r around the geometric mean
            logs = [math.log(s) for s in self.sigmas]
            m1 = math.fsum(q * ls for q, ls in zip(self.probs, logs))
            m2 = math.fsum(q * ls * ls for q, ls in zip(self.probs, logs))
            scale = math.exp(m1 + r * (m2 - m1 * m1) / 2.0)
        else:
            scale = math.fsum(q * s ** r
                              for s, q in zip(self.sigmas, self.probs)) ** (1.0 / r)
        return scale * gamma_p(r)

    @property
    def log_concave_factor(self):
        return True if len(set(self.sigmas)) == 1 else None


# ---------------------------------------------------------------------------
# complete monotonicity probe

@dataclass(frozen=True)
class CMCheck:
    passed: bool
    violation: tuple[int, float] | None  # (difference order, grid point)
    order: int

    def __bool__(self) -> bool:
        return self.passed


def complete_monotonicity_check(g, grid, order: int = 8,
                                rel_allowance: float = 1e-8) -> CMCheck:
    """Finite-difference test that g is completely monotonic on the grid.

    Checks (-1)^k Delta_h^k g(x) >= -eps_k for k = 0..order with step
    h = x/16 and allowance eps_k = rel_allowance * max|g| * 2^k (forward
    differences of a completely monotone function alternate exactly, so only
    rounding noise needs headroom).  This is a necessary condition; passing it
    does not certify the mixture property.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or np.any(grid <= 0):
        raise ValueError("grid must be a non-empty 1-d array of positive points")
    if order < 1:
        raise ValueError("order must be >= 1")
    h = grid / 16.0
    # evals[i, j] = g(x_j + i * h_j)
    evals = np.empty((order + 1, grid.size))
    for i in range(order + 1):
        evals[i] = np.asarray(g(grid + i * h), dtype=float)
    gmax = float(np.max(np.abs(evals)))
    for k in range(order + 1):
        coeffs = np.array([(-1) ** (k - i) * math.comb(k, i) for i in range(k + 1)])
        dk = coeffs @ evals[: k + 1]
        signed = (-1) ** k * dk
        eps = rel_allowance * gmax * (2.0 ** k)
        bad = signed < -eps
        if np.any(bad):
            j = int(np.argmax(bad))
            return CMCheck(False, (k, float(grid[j])), order)
    return CMCheck(True, None, order)


def squared_radial_profile(family: MixtureFamily):
    """g(x) = density(sqrt(x)), the profile whose complete monotonicity
    characterizes the Gaussian mixture property."""
    return lambda x: family.density(np.sqrt(np.asarray(x, dtype=float)))


DEFAULT_CM_GRID = np.geomspace(0.0625, 16.0, 48)
