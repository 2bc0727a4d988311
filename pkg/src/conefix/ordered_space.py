"""Finite-dimensional ordered vector spaces with the coordinatewise orthant cone.

Vectors are plain 1-d float arrays.  The cone is the nonnegative orthant; it
induces the partial order x <= y iff y - x lies in the cone.  Both supported
norms (sup and one-sum) are monotone on the cone, so the normal constant of
the order is exactly 1; ``normal_constant`` estimates it empirically as a
cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConstraintError, DimensionMismatch

# For a monotone norm, 0 <= x <= y implies norm(x) <= norm(y).
ORTHANT_NORMAL_CONSTANT = 1.0

NORM_KINDS = ("sup", "one-sum")


def as_vector(v, dimension: int | None = None) -> np.ndarray:
    """Coerce to a finite 1-d float vector, optionally of a fixed dimension."""
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1:
        raise DimensionMismatch(f"expected a 1-d vector, got shape {arr.shape}")
    if dimension is not None and arr.shape[0] != dimension:
        raise DimensionMismatch(
            f"expected dimension {dimension}, got {arr.shape[0]}"
        )
    if not np.all(np.isfinite(arr)):
        raise ConstraintError("vector coordinates must be finite")
    return arr


@dataclass(frozen=True)
class AmbientSpace:
    """Coordinate space of a fixed dimension, ordered by the nonnegative orthant.

    ``order_tolerance`` is the per-coordinate slack used by cone membership
    tests; iteration leaves rounding residue, so exact tests (tolerance 0)
    are reserved for algebraic-law checks.
    """

    dimension: int
    norm_kind: str = "sup"
    order_tolerance: float = 1e-12

    def __post_init__(self):
        if self.dimension < 1:
            raise ConstraintError("dimension must be >= 1")
        if self.norm_kind not in NORM_KINDS:
            raise ConstraintError(f"norm_kind must be one of {NORM_KINDS}")
        if not 0.0 <= self.order_tolerance <= 1e-6:
            raise ConstraintError("order_tolerance must lie in [0, 1e-6]")

    def contains(self, v) -> bool:
        """Cone membership: every coordinate >= -order_tolerance."""
        v = as_vector(v, self.dimension)
        return bool(np.all(v >= -self.order_tolerance))

    def leq(self, x, y) -> bool:
        """Order test x <= y, i.e. y - x lies in the cone."""
        x = as_vector(x, self.dimension)
        y = as_vector(y, self.dimension)
        return self.contains(y - x)

    def join(self, vectors) -> np.ndarray:
        """Coordinatewise maximum: the least upper bound for the orthant order."""
        if len(vectors) == 0:
            raise ConstraintError("join of an empty collection")
        vs = [as_vector(v, self.dimension) for v in vectors]
        return np.maximum.reduce(vs)

    def norm(self, v) -> float:
        v = as_vector(v, self.dimension)
        if self.norm_kind == "sup":
            return float(np.max(np.abs(v)))
        return float(np.sum(np.abs(v)))


def norm_rows(space: AmbientSpace, rows: np.ndarray) -> np.ndarray:
    """Ambient norm applied along the last axis of a batch of vectors."""
    if space.norm_kind == "sup":
        return np.max(np.abs(rows), axis=-1)
    return np.sum(np.abs(rows), axis=-1)


def normal_constant(space: AmbientSpace, samples: int = 10_000, seed: int = 0) -> float:
    """Empirical lower bound on the normal constant of the orthant cone.

    Maximizes norm(x)/norm(y) over sampled ordered pairs 0 <= x <= y with
    y != 0.  The diagonal pair (y, y) is included for every draw, so for the
    monotone norms supported here the returned bound is exactly 1.
    """
    if samples < 1:
        raise ConstraintError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    y = rng.uniform(0.0, 1.0, size=(samples, space.dimension))
    x = rng.random(size=(samples, space.dimension)) * y
    ny = norm_rows(space, y)
    ok = ny > 0.0
    if not np.any(ok):
        return 0.0
    ratios = norm_rows(space, x)[ok] / ny[ok]
    # diagonal pairs (y, y) realize the ratio 1 exactly
    return float(max(np.max(ratios), 1.0))
