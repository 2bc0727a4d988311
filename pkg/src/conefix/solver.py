"""Alternating two-map iteration with geometric tail bounds and certification.

The iterate sequence applies T on even steps and S on odd steps, starting
with T.  Every map application is recorded as one trace step, so the trace
length audits the exact number of map evaluations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .contractions import ContractionSpec, Family, MappingPair, contraction_rate, validate_params
from .errors import ConstraintError, DomainError
from .ordered_space import ORTHANT_NORMAL_CONSTANT
from .pcm_core import (
    PartialConeMetricSpace,
    in_domain,
    induced_metric,
    metric_rows,
    require_point,
)

# Full iterate coordinates are traced up to this point dimension; beyond it
# only the point norm is kept per step.
TRACE_POINT_DIM_LIMIT = 8


@dataclass(frozen=True)
class StopConfig:
    tol: float = 1e-10
    max_iters: int = 100_000
    use_apriori: bool = False

    def __post_init__(self):
        if not self.tol > 0.0:
            raise ConstraintError("tol must be > 0")
        if self.max_iters < 1:
            raise ConstraintError("max_iters must be >= 1")


@dataclass(frozen=True)
class TraceStep:
    n: int
    point: Optional[np.ndarray]  # iterate x_n, kept when dimension allows
    point_norm: float            # max absolute coordinate of x_n
    step_norm: float             # norm of p(x_{n+1}, x_n)
    self_norm: float             # norm of p(x_n, x_n)


@dataclass(frozen=True)
class IterationTrace:
    steps: tuple
    point_dimension: int

    def __len__(self):
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    def step_norms(self) -> np.ndarray:
        return np.array([s.step_norm for s in self.steps])


@dataclass(frozen=True)
class SolveResult:
    """Outcome of one alternating iteration run.

    ``residual_T`` and ``residual_S`` are the step norms of the final T and S
    applications in the trace.  The alternation never applies both maps at
    the same iterate, so these are the residuals at the last point each map
    visited rather than at ``x_star`` itself; at convergence they bound the
    true residuals up to the stopping tolerance.

    ``iterations`` is 1 plus the index of the last step whose norm exceeded
    the tolerance (0 when the starting point was already certified fixed).
    """

    status: str  # "converged" | "max_iters_exceeded"
    x_star: np.ndarray
    iterations: int
    residual_T: float
    residual_S: float
    self_distance: float
    trace: IterationTrace

    @property
    def converged(self) -> bool:
        return self.status == "converged"


def apriori_bound(rate: float, normal_const: float, first_step_norm: float, n: int) -> float:
    """Closed-form tail bound: normal_const * rate**n * first_step_norm / (1 - rate)."""
    if not 0.0 <= rate < 1.0:
        raise ConstraintError("rate must lie in [0, 1)")
    if normal_const < 1.0:
        raise ConstraintError("normal constant must be >= 1")
    if first_step_norm < 0.0:
        raise ConstraintError("first_step_norm must be >= 0")
    if n < 0:
        raise ConstraintError("n must be >= 0")
    return normal_const * rate**n * first_step_norm / (1.0 - rate)


def _metric_at(space, x, y) -> np.ndarray:
    return metric_rows(space, x[None, :], y[None, :])[0]


def solve(
    space: PartialConeMetricSpace,
    maps: MappingPair,
    x0,
    stop: Optional[StopConfig] = None,
    spec: Optional[ContractionSpec] = None,
) -> SolveResult:
    """Run the alternating iteration from x0 until both residuals settle.

    Stops when the latest T step and the latest S step both have norm at most
    ``stop.tol``; with ``use_apriori`` and a validated spec, also stops once
    the geometric tail bound guarantees step norms below the tolerance.
    Non-convergence is reported as ``max_iters_exceeded`` with the full
    trace, never as an exception.
    """
    stop = StopConfig() if stop is None else stop
    x = require_point(space, x0, "x0")
    rate = None
    if spec is not None:
        validate_params(spec)
        rate = contraction_rate(spec)
    keep_points = space.point_dimension <= TRACE_POINT_DIM_LIMIT

    steps = []
    r_T = math.inf
    r_S = math.inf
    first_norm = 0.0
    status = "max_iters_exceeded"
    for n in range(stop.max_iters):
        fn, label = (maps.T, "T") if n % 2 == 0 else (maps.S, "S")
        x_next = np.asarray(fn(x), dtype=float)
        if x_next.shape != x.shape:
            raise DomainError(f"{label} changed the point shape at step {n}")
        if not in_domain(space, x_next):
            raise DomainError(f"{label} output left the domain box at step {n}")
        step_norm = space.ambient.norm(_metric_at(space, x_next, x))
        self_norm = space.ambient.norm(_metric_at(space, x, x))
        steps.append(
            TraceStep(
                n=n,
                point=x.copy() if keep_points else None,
                point_norm=float(np.max(np.abs(x))),
                step_norm=step_norm,
                self_norm=self_norm,
            )
        )
        if n == 0:
            first_norm = step_norm
        if n % 2 == 0:
            r_T = step_norm
        else:
            r_S = step_norm
        x = x_next
        if r_T <= stop.tol and r_S <= stop.tol:
            status = "converged"
            break
        if (
            stop.use_apriori
            and rate is not None
            and apriori_bound(rate, ORTHANT_NORMAL_CONSTANT, first_norm, n + 1) <= stop.tol
        ):
            status = "converged"
            break

    last_loud = -1
    for st in steps:
        if st.step_norm > stop.tol:
            last_loud = st.n
    return SolveResult(
        status=status,
        x_star=x,
        iterations=last_loud + 1,
        residual_T=r_T,
        residual_S=r_S,
        self_distance=space.ambient.norm(_metric_at(space, x, x)),
        trace=IterationTrace(tuple(steps), space.point_dimension),
    )


@dataclass(frozen=True)
class FixedPointReport:
    ok: bool
    residual_T: float
    residual_S: float
    self_distance: float
    induced_T: float
    induced_S: float
    tol: float


def certify_fixed_point(space, maps: MappingPair, x, tol: float = 1e-10) -> FixedPointReport:
    """Certify a common fixed point through both the metric and the induced metric.

    Requires p(x,Tx), p(x,Sx) and the self-distance p(x,x) within tol, and the
    induced-metric distances to Tx and Sx within 4*tol.  A point with large
    self-distance fails even when T and S fix it exactly.
    """
    if tol <= 0.0:
        raise ConstraintError("tol must be > 0")
    x = require_point(space, x, "x")
    tx = np.asarray(maps.T(x), dtype=float)
    sx = np.asarray(maps.S(x), dtype=float)
    for label, pt in (("T", tx), ("S", sx)):
        if pt.shape != x.shape or not in_domain(space, pt):
            raise DomainError(f"{label} output left the domain box")
    norm = space.ambient.norm
    res_t = norm(_metric_at(space, x, tx))
    res_s = norm(_metric_at(space, x, sx))
    self_d = norm(_metric_at(space, x, x))
    ind_t = norm(induced_metric(space, x, tx))
    ind_s = norm(induced_metric(space, x, sx))
    ok = (
        res_t <= tol
        and res_s <= tol
        and self_d <= tol
        and ind_t <= 4.0 * tol
        and ind_s <= 4.0 * tol
    )
    return FixedPointReport(ok, res_t, res_s, self_d, ind_t, ind_s, tol)


@dataclass(frozen=True)
class UniquenessReport:
    results: tuple
    skipped: tuple       # indices of runs that did not converge
    max_gap: float       # largest pairwise coordinate gap among converged results
    asserted: bool
    agree: Optional[bool]  # None when uniqueness is not asserted for the family
    note: str

    @property
    def ok(self) -> bool:
        return self.agree is not False


def check_uniqueness(
    space: PartialConeMetricSpace,
    maps: MappingPair,
    seeds: Sequence,
    stop: Optional[StopConfig] = None,
    spec: Optional[ContractionSpec] = None,
) -> UniquenessReport:
    """Solve from several starting points and compare the limits pairwise.

    Converged results must agree within 10*tol in point coordinates.  Runs
    that do not converge are reported and skipped.  For the implicit-linear
    family no uniqueness claim is made, so agreement is reported as data
    only (``agree`` is None).
    """
    if len(seeds) < 2:
        raise ConstraintError("at least 2 starting points are required")
    stop = StopConfig() if stop is None else stop
    results = tuple(solve(space, maps, seed, stop, spec) for seed in seeds)
    skipped = tuple(i for i, res in enumerate(results) if not res.converged)
    limits = [res.x_star for res in results if res.converged]
    max_gap = 0.0
    for i in range(len(limits)):
        for j in range(i + 1, len(limits)):
            max_gap = max(max_gap, float(np.max(np.abs(limits[i] - limits[j]))))
    asserted = not (spec is not None and spec.family is Family.IMPLICIT_LINEAR)
    if not asserted:
        agree = None
        note = "uniqueness not asserted for the implicit-linear family"
    else:
        agree = max_gap <= 10.0 * stop.tol
        note = ""
    return UniquenessReport(results, skipped, max_gap, asserted, agree, note)


def trace_records(result: SolveResult) -> list:
    """Trace as JSON-ready records, one per step.

    Keys: n, step_norm, self_norm, and either point (coordinates, when the
    point dimension is at most 8) or point_norm.
    """
    records = []
    for st in result.trace.steps:
        rec = {"n": st.n, "step_norm": st.step_norm, "self_norm": st.self_norm}
        if st.point is not None:
            rec["point"] = [float(c) for c in st.point]
        else:
            rec["point_norm"] = st.point_norm
        records.append(rec)
    return records
