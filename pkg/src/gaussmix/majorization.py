"""Majorization order on weight vectors.

A vector a is majorized by b (written a <= b here) when, after sorting both in
nonincreasing order, every prefix sum of a is at most the corresponding prefix
sum of b, with equal totals.  The comparison theorems in this package are all
monotone along this order (in one direction or the other), so the test drivers
need a reliable way to decide it and to generate ordered pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import RandomStream

#: prefix-sum slack treated as equality
DEFAULT_TOL = 1e-12


@dataclass(frozen=True)
class WeightVector:
    """Immutable coefficient vector with compensated aggregates."""

    coords: tuple[float, ...]

    def __post_init__(self):
        if len(self.coords) == 0:
            raise ValueError("empty weight vector")
        if not all(math.isfinite(c) for c in self.coords):
            raise ValueError("weight entries must be finite")
        object.__setattr__(self, "coords", tuple(float(c) for c in self.coords))

    def __len__(self) -> int:
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.coords, dtype=float)

    def total(self) -> float:
        return math.fsum(self.coords)

    def total_squares(self) -> float:
        return math.fsum(c * c for c in self.coords)

    def squared(self) -> "WeightVector":
        return WeightVector(tuple(c * c for c in self.coords))

    def sqrt(self) -> "WeightVector":
        if any(c < 0 for c in self.coords):
            raise ValueError("sqrt of a vector with negative entries")
        return WeightVector(tuple(math.sqrt(c) for c in self.coords))

    def normalized(self) -> "WeightVector":
        t = self.total()
        if t <= 0:
            raise ValueError("cannot normalize a vector with nonpositive total")
        return WeightVector(tuple(c / t for c in self.coords))

    def unit(self) -> "WeightVector":
        t = math.sqrt(self.total_squares())
        if t <= 0:
            raise ValueError("cannot normalize the zero vector")
        return WeightVector(tuple(c / t for c in self.coords))


def as_weight_vector(v) -> WeightVector:
    if isinstance(v, WeightVector):
        return v
    return WeightVector(tuple(float(c) for c in np.asarray(v, dtype=float).ravel()))


def _prefix_sums_desc(v: WeightVector) -> list[float]:
    ordered = sorted(v.coords, reverse=True)
    # fsum per prefix: O(n^2) but exact; n is small in every use here
    return [math.fsum(ordered[: k + 1]) for k in range(len(ordered))]


def majorizes(b, a, tol: float = DEFAULT_TOL) -> bool:
    """True iff ``a`` is majorized by ``b`` (a <= b), within ``tol``.

    Both vectors must be nonnegative with equal length; totals must agree
    within ``tol``.
    """
    a = as_weight_vector(a)
    b = as_weight_vector(b)
    if len(a) != len(b):
        raise ValueError("majorization requires equal lengths")
    if any(c < 0 for c in a.coords) or any(c < 0 for c in b.coords):
        raise ValueError("majorization is defined here for nonnegative vectors")
    pa = _prefix_sums_desc(a)
    pb = _prefix_sums_desc(b)
    if abs(pa[-1] - pb[-1]) > tol:
        return False
    return all(x <= y + tol for x, y in zip(pa, pb))


def diagonal_chain(n: int) -> list[WeightVector]:
    """The decreasing chain (1,0,...,0) >= (1/2,1/2,0,...) >= ... >= (1/n,...,1/n)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    chain = []
    for k in range(1, n + 1):
        chain.append(WeightVector(tuple([1.0 / k] * k + [0.0] * (n - k))))
    return chain


def robin_hood_transfers(v, count: int, stream: RandomStream) -> WeightVector:
    """Apply ``count`` random mass transfers from richer to poorer entries.

    Each transfer moves at most half the gap, so the result is majorized by
    the input and the total is preserved.
    """
    v = as_weight_vector(v)
    a = v.array.copy()
    n = a.size
    if count == 0:
        return WeightVector(tuple(a))
    picks = stream.uniform(3 * count).reshape(count, 3)
    for p0, p1, p2 in picks:
        i = min(int(p0 * n), n - 1)
        j = min(int(p1 * (n - 1)), n - 2)
        if j >= i:
            j += 1
        hi, lo = (i, j) if a[i] >= a[j] else (j, i)
        delta = p2 * (a[hi] - a[lo]) / 2.0
        a[hi] -= delta
        a[lo] += delta
    return WeightVector(tuple(a))


def random_majorization_pair(n: int, stream: RandomStream) -> tuple[WeightVector, WeightVector]:
    """Random nonnegative pair (a, b) with a <= b and equal totals."""
    if n < 2:
        raise ValueError("need n >= 2 for a nontrivial pair")
    b = WeightVector(tuple(stream.uniform(n)))
    count = 1 + min(int(stream.uniform(1)[0] * 3 * n), 3 * n - 1)
    a = robin_hood_transfers(b, count, stream)
    return a, b
