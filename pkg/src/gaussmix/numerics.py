"""Shared numerical infrastructure: special functions, adaptive quadrature,
counter-based random streams, and the Estimate value type.

Every Monte Carlo quantity in this package is reported as an ``Estimate``
carrying its standard error and seed provenance, so downstream comparisons can
form verdicts in stderr units.  Randomness comes from ``RandomStream``, a thin
counter-based wrapper over Philox: draws are produced in fixed blocks of
2**16, and the output is a pure function of (seed, stream_id, counter), so a
result never depends on how the work was partitioned.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate as _sci_integrate
from scipy.special import digamma, erf, gammaln, polygamma

EULER_GAMMA = float(np.euler_gamma)

# Draws per counter block.  Fixed so that chunked generation is reproducible
# independent of batching.
CHUNK_SIZE = 1 << 16

_M64 = (1 << 64) - 1


def _splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _M64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return z ^ (z >> 31)


@dataclass
class RandomStream:
    """Counter-based splittable random stream.

    A stream is identified by ``(seed, stream_id)``; ``counter`` is the block
    cursor and advances as draws are consumed.  Block ``j`` is generated by a
    fresh Philox keyed on ``(seed, stream_id)`` at counter position ``j``, so
    the sequence of values is a pure function of the three fields.  Instances
    are single-owner: share work across stream ids (via :meth:`child`), not by
    handing one stream to several consumers.
    """

    seed: int
    stream_id: int = 0
    counter: int = 0

    def child(self, k: int) -> "RandomStream":
        """Derived stream, disjoint from this one and from other children."""
        sid = _splitmix64(_splitmix64(self.stream_id & _M64) ^ ((k * 0x9E3779B97F4A7C15) & _M64))
        return RandomStream(self.seed, sid)

    def _block_generator(self) -> np.random.Generator:
        key = np.array([_splitmix64(self.seed & _M64), self.stream_id & _M64], dtype=np.uint64)
        # 2**70 Philox states per block: no overlap however much one block draws.
        bit_gen = np.random.Philox(key=key, counter=(self.counter & _M64) << 70)
        self.counter += 1
        return np.random.Generator(bit_gen)

    def draw(self, n: int, kinds: tuple[str, ...]) -> tuple[np.ndarray, ...]:
        """Draw ``n`` aligned variates of each kind in ``kinds``.

        Kinds: "uniform" (open (0,1)), "normal", "exponential", or
        ("gamma", shape).  Each block always generates the full CHUNK_SIZE per
        kind and slices, so prefixes agree across different budgets.
        """
        n = int(n)
        if n <= 0:
            raise ValueError("n must be positive")
        outs = [np.empty(n) for _ in kinds]
        filled = 0
        while filled < n:
            gen = self._block_generator()
            m = min(CHUNK_SIZE, n - filled)
            for arr, kind in zip(outs, kinds):
                block = self._block(gen, kind)
                arr[filled : filled + m] = block[:m]
            filled += m
        return tuple(outs)

    @staticmethod
    def _block(gen: np.random.Generator, kind) -> np.ndarray:
        if kind == "uniform":
            u = gen.random(CHUNK_SIZE)
            # keep strictly inside (0,1); endpoints break log/tan transforms
            return np.clip(u, 1e-300, 1.0 - 1e-16)
        if kind == "normal":
            return gen.standard_normal(CHUNK_SIZE)
        if kind == "exponential":
            return gen.standard_exponential(CHUNK_SIZE)
        if isinstance(kind, tuple) and kind[0] == "gamma":
            return gen.standard_gamma(kind[1], CHUNK_SIZE)
        raise ValueError(f"unknown draw kind: {kind!r}")

    def uniform(self, n: int) -> np.ndarray:
        return self.draw(n, ("uniform",))[0]

    def normal(self, n: int) -> np.ndarray:
        return self.draw(n, ("normal",))[0]

    def exponential(self, n: int) -> np.ndarray:
        return self.draw(n, ("exponential",))[0]

    def gamma(self, shape: float, n: int) -> np.ndarray:
        return self.draw(n, (("gamma", float(shape)),))[0]

    def normal_matrix(self, rows: int, cols: int) -> np.ndarray:
        return self.normal(rows * cols).reshape(rows, cols)


@dataclass(frozen=True)
class Estimate:
    """A reported number with its uncertainty and provenance.

    ``stderr`` is 0 for exact (closed-form) values.  Re-running the producing
    operation with identical inputs reproduces ``value`` bit-for-bit.
    """

    value: float
    stderr: float
    n_samples: int
    seed: int
    stream_id: int

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError(f"estimate value must be finite, got {self.value}")
        if not (self.stderr >= 0.0):
            raise ValueError(f"stderr must be >= 0, got {self.stderr}")
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")

    def scaled(self, factor: float) -> "Estimate":
        return Estimate(self.value * factor, self.stderr * abs(factor),
                        self.n_samples, self.seed, self.stream_id)


def mean_estimate(values: np.ndarray, stream: RandomStream) -> Estimate:
    values = np.asarray(values, dtype=float)
    n = values.size
    se = float(values.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return Estimate(float(values.mean()), se, n, stream.seed, stream.stream_id)


def weighted_mean_estimate(values: np.ndarray, weights: np.ndarray,
                           stream: RandomStream) -> Estimate:
    """Self-normalized weighted mean with ratio-estimator stderr."""
    values = np.asarray(values, dtype=float)
    weights = np.asarray(weights, dtype=float)
    wsum = weights.sum()
    m = float(np.dot(weights, values) / wsum)
    resid = values - m
    var = float(np.dot(weights * weights, resid * resid) / (wsum * wsum))
    return Estimate(m, math.sqrt(max(var, 0.0)), values.size, stream.seed, stream.stream_id)


def exact_estimate(value: float, stream: RandomStream, n_samples: int = 1) -> Estimate:
    return Estimate(float(value), 0.0, n_samples, stream.seed, stream.stream_id)


def effective_sample_size(weights: np.ndarray) -> float:
    weights = np.asarray(weights, dtype=float)
    s = weights.sum()
    return float(s * s / np.dot(weights, weights))


# ---------------------------------------------------------------------------
# special functions

def log_gamma(x: float) -> float:
    if x <= 0:
        raise ValueError(f"log_gamma requires x > 0, got {x}")
    return float(gammaln(x))


def beta_fn(a: float, b: float) -> float:
    """Euler beta via log-gamma; a, b > 0."""
    return math.exp(log_gamma(a) + log_gamma(b) - log_gamma(a + b))


def log_gamma_ratio(x: float, h: float) -> float:
    """log(Gamma(x+h) / Gamma(x)), accurate also when |h| is tiny.

    The direct difference of log-gammas loses all precision once |h|
    drops below the rounding error of the individual terms; a short
    polygamma series takes over there.
    """
    if x <= 0.0 or x + h <= 0.0:
        raise ValueError("arguments must stay positive")
    if abs(h) >= 3e-4:
        return float(gammaln(x + h) - gammaln(x))
    return h * float(digamma(x)
                     + h * (polygamma(1, x) / 2.0
                            + h * (polygamma(2, x) / 6.0
                                   + h * polygamma(3, x) / 24.0)))


def gamma_p(p: float) -> float:
    """p-th absolute moment of a standard Gaussian, to the power 1/p.

    gamma_p = sqrt(2) * (Gamma((p+1)/2) / sqrt(pi))**(1/p) for p in (-1, 0) or
    p > 0; at p = 0 the limit exp(E log|Z|) = exp(-(euler_gamma + log 2)/2).
    """
    if p <= -1:
        raise ValueError(f"gamma_p requires p > -1, got {p}")
    if p == 0:
        return math.exp(-(EULER_GAMMA + math.log(2.0)) / 2.0)
    if p == 2.0:
        return 1.0
    # sqrt(pi) = Gamma(1/2), so the ratio form stays stable for tiny p
    return math.sqrt(2.0) * math.exp(log_gamma_ratio(0.5, p / 2.0) / p)


def c_p(p: float) -> float:
    """Normalizing constant of the density c_p * exp(-|t|**p): 1/(2 Gamma(1+1/p))."""
    if p <= 0:
        raise ValueError(f"c_p requires p > 0, got {p}")
    return 0.5 * math.exp(-log_gamma(1.0 + 1.0 / p))


def psi_halfgaussian(s: float) -> float:
    """Integral of the standard normal density from 0 to s (odd in s; 1/2 at +inf)."""
    if math.isinf(s):
        return math.copysign(0.5, s)
    return 0.5 * float(erf(s / math.sqrt(2.0)))


# ---------------------------------------------------------------------------
# quadrature

class IntegrationError(RuntimeError):
    """Adaptive quadrature failed to meet the requested tolerance."""


def integrate(f, lo: float, hi: float, *, rel_tol: float = 1e-10,
              abs_tol: float = 1e-12, points=None) -> float:
    """Adaptive quadrature of ``f`` on [lo, hi] (endpoints may be infinite).

    Meets ``max(abs_tol, rel_tol * |integral|)`` or raises IntegrationError
    after the refinement budget is exhausted.  ``points`` lists interior
    breakpoints (kinks); the interval is split there.
    """
    if points:
        pts = sorted(p for p in points if lo < p < hi)
        edges = [lo, *pts, hi]
        total = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            total += integrate(f, a, b, rel_tol=rel_tol, abs_tol=abs_tol)
        return total

    last_err = None
    for limit in (200, 2000):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", _sci_integrate.IntegrationWarning)
            value, err = _sci_integrate.quad(f, lo, hi, epsabs=abs_tol,
                                             epsrel=rel_tol, limit=limit)
        if err <= max(abs_tol, rel_tol * abs(value)):
            return float(value)
        last_err = err
    raise IntegrationError(
        f"quadrature on [{lo}, {hi}] stalled at error {last_err:.3e} "
        f"(abs_tol={abs_tol:.1e}, rel_tol={rel_tol:.1e})")
