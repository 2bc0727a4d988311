"""Partial cone metric spaces: evaluation, sampling, axiom checks, convergence tests.

A space bundles an ambient ordered vector space, a point domain given as a
closed coordinate box, and a metric function mapping point pairs to ambient
vectors.  Metric functions must be deterministic, side-effect free, and
accept batched inputs of shape (..., point_dimension).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ConstraintError, DimensionMismatch, DomainError
from .ordered_space import AmbientSpace, as_vector

MetricFn = Callable[[np.ndarray, np.ndarray], np.ndarray]

# Probability, per coordinate and per side, that a sampled coordinate snaps
# to its box endpoint.  Contraction slack and axiom margins degenerate at the
# extremes, which plain uniform sampling systematically misses.
EDGE_SNAP = 0.125

AXIOM_TAGS = ("PCM1", "PCM2", "PCM3", "PCM4")


@dataclass(frozen=True)
class PartialConeMetricSpace:
    ambient: AmbientSpace
    point_dimension: int
    metric: MetricFn
    domain_box: np.ndarray  # shape (point_dimension, 2), rows are [lower, upper]
    name: str = ""

    def __post_init__(self):
        box = np.asarray(self.domain_box, dtype=float)
        if box.shape != (self.point_dimension, 2):
            raise ConstraintError(
                f"domain_box must have shape ({self.point_dimension}, 2)"
            )
        if np.any(box[:, 0] > box[:, 1]):
            raise ConstraintError("domain_box lower bounds must not exceed uppers")
        object.__setattr__(self, "domain_box", box)

    @property
    def lower(self) -> np.ndarray:
        return self.domain_box[:, 0]

    @property
    def upper(self) -> np.ndarray:
        return self.domain_box[:, 1]


def in_domain(space: PartialConeMetricSpace, pts: np.ndarray) -> bool:
    """True when every point lies in the domain box (up to order tolerance)."""
    slack = space.ambient.order_tolerance
    return bool(
        np.all(pts >= space.lower - slack) and np.all(pts <= space.upper + slack)
    )


def require_point(space: PartialConeMetricSpace, x, label: str = "point") -> np.ndarray:
    """Validate a single point against the space's domain."""
    arr = as_vector(x, space.point_dimension)
    if not in_domain(space, arr):
        raise DomainError(f"{label} {arr.tolist()} is outside the domain box")
    return arr


def metric_rows(space: PartialConeMetricSpace, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Evaluate the metric on batches of points; validates the output shape."""
    out = np.asarray(space.metric(X, Y), dtype=float)
    expected = X.shape[:-1] + (space.ambient.dimension,)
    if out.shape != expected:
        raise DimensionMismatch(
            f"metric returned shape {out.shape}, expected {expected}"
        )
    return out


def pcm_eval(space: PartialConeMetricSpace, x, y) -> np.ndarray:
    """The metric value p(x, y) as an ambient vector."""
    x = require_point(space, x, "x")
    y = require_point(space, y, "y")
    out = metric_rows(space, x[None, :], y[None, :])[0]
    if not np.all(np.isfinite(out)):
        raise ConstraintError("metric produced a non-finite value")
    return out


def induced_metric(space: PartialConeMetricSpace, x, y) -> np.ndarray:
    """The induced cone metric 2*p(x,y) - p(x,x) - p(y,y).

    Vanishes exactly on the diagonal and symmetrizes any self-distance away,
    which is what certifies genuine fixed points.
    """
    x = require_point(space, x, "x")
    y = require_point(space, y, "y")
    pxy = pcm_eval(space, x, y)
    pxx = pcm_eval(space, x, x)
    pyy = pcm_eval(space, y, y)
    # the self-distances are summed first so the result is exactly symmetric
    # and exactly zero on the diagonal
    return 2.0 * pxy - (pxx + pyy)


def sample_points(
    space: PartialConeMetricSpace,
    rng: np.random.Generator,
    n: int,
    edge_snap: float = EDGE_SNAP,
) -> np.ndarray:
    """Draw n domain points: uniform in the box, with endpoint snapping.

    Each coordinate independently snaps to its lower bound with probability
    ``edge_snap`` and to its upper bound with the same probability.
    """
    if n < 1:
        raise ConstraintError("sample count must be >= 1")
    pts = rng.uniform(space.lower, space.upper, size=(n, space.point_dimension))
    mode = rng.random(size=(n, space.point_dimension))
    pts = np.where(mode < edge_snap, space.lower, pts)
    pts = np.where(mode > 1.0 - edge_snap, space.upper, pts)
    return pts


@dataclass(frozen=True)
class AxiomViolation:
    axiom: str
    witness: tuple
    slack: np.ndarray


@dataclass(frozen=True)
class AxiomReport:
    samples_checked: int
    violations: tuple

    @property
    def ok(self) -> bool:
        return not self.violations

    def tags(self) -> set:
        return {v.axiom for v in self.violations}


def axiom_violations(space, X, Y, Z) -> list:
    """Check the four partial-cone-metric axioms on explicit point triples.

    PCM2 is checked only in the direction falsifiable by sampling: distinct
    points must not share all three metric values coordinatewise within the
    order tolerance.  Triples with X == Y are skipped for that check.
    """
    tol = space.ambient.order_tolerance
    pxx = metric_rows(space, X, X)
    pyy = metric_rows(space, Y, Y)
    pxy = metric_rows(space, X, Y)
    pyx = metric_rows(space, Y, X)
    pxz = metric_rows(space, X, Z)
    pzy = metric_rows(space, Z, Y)
    pzz = metric_rows(space, Z, Z)

    found = []

    def record(mask, axiom, slack_rows, with_z=False):
        for i in np.flatnonzero(mask):
            witness = (X[i].copy(), Y[i].copy())
            if with_z:
                witness = witness + (Z[i].copy(),)
            found.append(AxiomViolation(axiom, witness, slack_rows[i].copy()))

    # PCM1: 0 <= p(x,x) <= p(x,y), plus the symmetric role for y
    slack1 = np.minimum(np.minimum(pxx, pxy - pxx), pxy - pyy)
    record(np.any(slack1 < -tol, axis=1), "PCM1", slack1)

    # PCM2 (contrapositive-safe direction): distinct points must differ
    # somewhere in (p(x,x), p(x,y), p(y,y))
    distinct = np.max(np.abs(X - Y), axis=1) > max(10.0 * tol, 0.0)
    dev = np.maximum(np.abs(pxy - pxx), np.abs(pxy - pyy))
    all_equal = np.all(dev <= tol, axis=1)
    record(distinct & all_equal, "PCM2", dev)

    # PCM3: symmetry, exact
    asym = pxy - pyx
    record(np.any(asym != 0.0, axis=1), "PCM3", asym)

    # PCM4: p(x,y) <= p(x,z) + p(z,y) - p(z,z) in cone order
    slack4 = (pxz + pzy - pzz) - pxy
    record(np.any(slack4 < -tol, axis=1), "PCM4", slack4, with_z=True)

    return found


def check_axioms(space: PartialConeMetricSpace, sampler_seed: int = 0, n: int = 10_000) -> AxiomReport:
    """Sample n point triples and report every axiom violation found."""
    if n < 1:
        raise ConstraintError("n must be >= 1")
    rng = np.random.default_rng(sampler_seed)
    X = sample_points(space, rng, n)
    Y = sample_points(space, rng, n)
    Z = sample_points(space, rng, n)
    return AxiomReport(n, tuple(axiom_violations(space, X, Y, Z)))


def is_converged(space: PartialConeMetricSpace, trace_tail: Sequence, candidate, tol: float) -> bool:
    """Limit test against a candidate: both defining metric limits within tol.

    Uses the last point of ``trace_tail``: p(x_n, c) and p(x_n, x_n) must each
    be within tol of p(c, c) in the ambient norm.
    """
    if len(trace_tail) == 0:
        raise ConstraintError("trace_tail must be nonempty")
    if tol <= 0:
        raise ConstraintError("tol must be > 0")
    xn = require_point(space, trace_tail[-1], "trace point")
    c = require_point(space, candidate, "candidate")
    pcc = pcm_eval(space, c, c)
    near = space.ambient.norm(pcm_eval(space, xn, c) - pcc) <= tol
    self_near = space.ambient.norm(pcm_eval(space, xn, xn) - pcc) <= tol
    return bool(near and self_near)


def cauchy_residual(space: PartialConeMetricSpace, x_m, x_n) -> float:
    """Norm of p(x_m, x_n); the Cauchy anchor is fixed at 0."""
    return space.ambient.norm(pcm_eval(space, x_m, x_n))
