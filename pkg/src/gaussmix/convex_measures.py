"""Symmetric convex bodies and their mass under Gaussian-mixture laws.

Bodies are intersections of symmetric slabs |<x, v>| <= c, Euclidean
balls, and diagonal linear images of either.  Membership is exact
arithmetic on the defining inequalities, which keeps every Monte Carlo
fraction unbiased.  Measures of a body under a product of mixture
factors average Gaussian measures of the rescaled body over the mixing
factors, so comparative estimates reuse one set of draws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf, gammainc

from .mixtures import MixtureFamily
from .numerics import Estimate, RandomStream, exact_estimate, weighted_mean_estimate

__all__ = [
    "SymmetricConvexBody",
    "SlabIntersection",
    "Ball2",
    "DiagonalImage",
    "cube",
    "strip",
    "certified_subset",
    "ProductMixtureMeasure",
    "SpectralStableVector",
    "gaussian_measure",
    "mixture_measure",
    "spectral_stable_sample",
]

# draws processed per block so the (block, dim) matrices stay small
_BLOCK = 1 << 17


class SymmetricConvexBody:
    """Origin-symmetric convex body with exact membership tests."""

    @property
    def dimension(self) -> int:
        raise NotImplementedError

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Boolean mask for an (m, dimension) array of points."""
        raise NotImplementedError

    def membership(self, x) -> bool:
        point = np.asarray(x, dtype=float).reshape(1, -1)
        if point.shape[1] != self.dimension:
            raise ValueError("point dimension mismatch")
        return bool(self.contains(point)[0])

    def inradius(self) -> float:
        """Certified radius of a centered ball inside the body."""
        raise NotImplementedError


class SlabIntersection(SymmetricConvexBody):
    """Intersection of symmetric slabs |<x, v_i>| <= c_i."""

    def __init__(self, slabs, dim: int | None = None):
        slabs = [(np.asarray(v, dtype=float), float(c)) for v, c in slabs]
        if not slabs and dim is None:
            raise ValueError("dimension required when there are no slabs")
        for v, c in slabs:
            if v.ndim != 1 or v.size == 0 or not np.all(np.isfinite(v)):
                raise ValueError("slab normals must be finite vectors")
            if not np.any(v != 0.0):
                raise ValueError("slab normal must be nonzero")
            if not (math.isfinite(c) and c > 0.0):
                raise ValueError("slab bound must be positive")
        dims = {v.size for v, _ in slabs}
        if len(dims) > 1:
            raise ValueError("slab normals must share one dimension")
        if dims:
            if dim is not None and dim != dims.pop():
                raise ValueError("dim disagrees with slab normals")
        self._dim = int(dim if dim is not None else slabs[0][0].size)
        self.slabs = slabs

    @property
    def dimension(self) -> int:
        return self._dim

    def contains(self, points: np.ndarray) -> np.ndarray:
        mask = np.ones(points.shape[0], dtype=bool)
        for v, c in self.slabs:
            mask &= np.abs(points @ v) <= c
        return mask

    def inradius(self) -> float:
        if not self.slabs:
            return math.inf
        return min(c / float(np.linalg.norm(v)) for v, c in self.slabs)


def cube(n: int, half_side: float) -> SlabIntersection:
    """[-half_side, half_side]^n as axis-aligned slabs."""
    if n < 1:
        raise ValueError("dimension must be positive")
    eye = np.eye(n)
    return SlabIntersection([(eye[i], half_side) for i in range(n)])


def strip(v, c: float) -> SlabIntersection:
    """The single slab |<x, v>| <= c."""
    return SlabIntersection([(np.asarray(v, dtype=float), c)])


@dataclass(frozen=True)
class Ball2(SymmetricConvexBody):
    """Centered Euclidean ball of the given radius."""

    radius: float
    dim: int

    def __post_init__(self):
        if not (math.isfinite(self.radius) and self.radius > 0.0):
            raise ValueError("radius must be positive")
        if self.dim < 1:
            raise ValueError("dimension must be positive")

    @property
    def dimension(self) -> int:
        return self.dim

    def contains(self, points: np.ndarray) -> np.ndarray:
        return np.einsum("ij,ij->i", points, points) <= self.radius ** 2

    def inradius(self) -> float:
        return self.radius


class DiagonalImage(SymmetricConvexBody):
    """The body diag(d) K, i.e. x in the image iff x / d lies in K."""

    def __init__(self, base: SymmetricConvexBody, d):
        d = np.asarray(d, dtype=float)
        if d.shape != (base.dimension,):
            raise ValueError("scaling vector must match the base dimension")
        if not np.all(np.isfinite(d)) or np.any(d <= 0.0):
            raise ValueError("scalings must be positive")
        self.base = base
        self.d = d

    @property
    def dimension(self) -> int:
        return self.base.dimension

    def contains(self, points: np.ndarray) -> np.ndarray:
        return self.base.contains(points / self.d)

    def inradius(self) -> float:
        # diag(d) maps the inscribed ball onto an ellipsoid whose shortest
        # semi-axis is min(d) times the base inradius
        return float(self.d.min()) * self.base.inradius()


def _as_slabs(body: SymmetricConvexBody) -> SlabIntersection | None:
    """Normal form: push diagonal images into slab constraints."""
    if isinstance(body, SlabIntersection):
        return body
    if isinstance(body, DiagonalImage):
        inner = _as_slabs(body.base)
        if inner is None:
            return None
        return SlabIntersection([(v / body.d, c) for v, c in inner.slabs],
                                dim=inner.dimension)
    return None


def certified_subset(inner: SymmetricConvexBody,
                     outer: SymmetricConvexBody) -> bool:
    """True when slab dominance proves inner is contained in outer.

    Every slab of the outer body must be implied by a parallel slab of
    the inner body with a tighter (scaled) bound.  False means "not
    certified", not "not contained".
    """
    a = _as_slabs(inner)
    b = _as_slabs(outer)
    if a is None or b is None or a.dimension != b.dimension:
        return False
    for v_out, c_out in b.slabs:
        norm_out = float(np.linalg.norm(v_out))
        implied = False
        for v_in, c_in in a.slabs:
            norm_in = float(np.linalg.norm(v_in))
            cross = np.outer(v_in, v_out) - np.outer(v_out, v_in)
            if (np.max(np.abs(cross)) <= 1e-12 * norm_in * norm_out
                    and c_in / norm_in <= c_out / norm_out * (1 + 1e-12)):
                implied = True
                break
        if not implied:
            return False
    return True


@dataclass(frozen=True)
class ProductMixtureMeasure:
    """Product law with one mixture factor per coordinate."""

    factors: tuple[MixtureFamily, ...]

    def __post_init__(self):
        factors = tuple(self.factors)
        if not factors:
            raise ValueError("need at least one factor")
        for f in factors:
            if not isinstance(f, MixtureFamily):
                raise TypeError("factors must be mixture families")
        object.__setattr__(self, "factors", factors)

    @property
    def dimension(self) -> int:
        return len(self.factors)


def gaussian_measure(body: SymmetricConvexBody, n_samples: int,
                     stream: RandomStream) -> Estimate:
    """Standard Gaussian mass of the body.

    Single slabs and Euclidean balls have closed forms (stderr 0); other
    bodies fall back to the Monte Carlo fraction of draws inside.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    slabs = _as_slabs(body)
    if slabs is not None and len(slabs.slabs) == 0:
        return exact_estimate(1.0, stream, n_samples)
    if slabs is not None and len(slabs.slabs) == 1:
        v, c = slabs.slabs[0]
        # <Z, v> is N(0, |v|^2), so the slab mass is erf(c / (|v| sqrt 2))
        width = c / (float(np.linalg.norm(v)) * math.sqrt(2.0))
        return exact_estimate(float(erf(width)), stream, n_samples)
    if isinstance(body, Ball2):
        # |Z|^2 is chi-square with dim degrees of freedom
        mass = float(gammainc(body.dim / 2.0, body.radius ** 2 / 2.0))
        return exact_estimate(mass, stream, n_samples)
    n = body.dimension
    child = stream.child(0)
    hits = 0
    done = 0
    while done < n_samples:
        block = min(_BLOCK, n_samples - done)
        points = child.normal(block * n).reshape(block, n)
        hits += int(body.contains(points).sum())
        done += block
    p = hits / n_samples
    se = math.sqrt(p * (1.0 - p) / n_samples)
    return Estimate(p, se, n_samples, stream.seed, stream.stream_id)


def mixture_measure(measure: ProductMixtureMeasure, body: SymmetricConvexBody,
                    n_samples: int, stream: RandomStream,
                    method: str = "mixing") -> Estimate:
    """Mass of the body under the product of mixture factors.

    The default route draws mixing factors Y_i and standard normals Z_i
    and scores diag(Y) Z, weighting by the factor sampler weights; the
    "direct" route samples each coordinate from its family outright.
    Both are unbiased for the same mass.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    if method not in ("mixing", "direct"):
        raise ValueError(f"unknown method: {method!r}")
    n = measure.dimension
    if body.dimension != n:
        raise ValueError("body and measure dimensions differ")
    inside = np.empty(n_samples)
    weights = np.ones(n_samples)
    # factor i draws from child(i); normals from child(n): equal budgets on
    # the same stream see identical draws, so comparisons pair across bodies
    children = [stream.child(i) for i in range(n)]
    z_child = stream.child(n)
    done = 0
    while done < n_samples:
        block = min(_BLOCK, n_samples - done)
        points = np.empty((block, n))
        if method == "direct":
            for i, family in enumerate(measure.factors):
                points[:, i] = family.sample_direct(block, children[i])
        else:
            z = z_child.normal(block * n).reshape(block, n)
            for i, family in enumerate(measure.factors):
                ws = family.sample_mixing_factor(block, children[i])
                points[:, i] = ws.values * z[:, i]
                if not ws.exact:
                    weights[done:done + block] *= ws.weights
        inside[done:done + block] = body.contains(points)
        done += block
    return weighted_mean_estimate(inside, weights, stream)


@dataclass(frozen=True)
class SpectralStableVector:
    """Symmetric p-stable vector given by finitely many spectral atoms.

    Each atom is a (unit direction, positive mass) pair; the vector is
    the linear image sum_k m_k^(1/p) Y_k u_k of independent standard
    symmetric p-stable scalars Y_k.
    """

    p: float
    atoms: tuple[tuple[tuple[float, ...], float], ...]

    def __post_init__(self):
        if not (0.0 < self.p <= 2.0):
            raise ValueError("stability index must lie in (0, 2]")
        atoms = []
        dim = None
        for direction, mass in self.atoms:
            u = np.asarray(direction, dtype=float)
            if dim is None:
                dim = u.size
            if u.shape != (dim,):
                raise ValueError("atom directions must share one dimension")
            if abs(float(np.linalg.norm(u)) - 1.0) > 1e-9:
                raise ValueError("atom directions must be unit vectors")
            if not (math.isfinite(mass) and mass > 0.0):
                raise ValueError("atom masses must be positive")
            atoms.append((tuple(float(x) for x in u), float(mass)))
        if not atoms:
            raise ValueError("need at least one atom")
        object.__setattr__(self, "atoms", tuple(atoms))

    @property
    def dimension(self) -> int:
        return len(self.atoms[0][0])


def spectral_stable_sample(vector: SpectralStableVector, n_samples: int,
                           stream: RandomStream) -> np.ndarray:
    """(n_samples, dimension) array of draws of the stable vector."""
    from .mixtures import SymmetricStable

    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    scalar = SymmetricStable(vector.p)
    rows = np.array([u for u, _ in vector.atoms])
    scales = np.array([m ** (1.0 / vector.p) for _, m in vector.atoms])
    out = np.zeros((n_samples, vector.dimension))
    for k in range(len(vector.atoms)):
        draws = scalar.sample_direct(n_samples, stream.child(k))
        out += np.outer(scales[k] * draws, rows[k])
    return out
