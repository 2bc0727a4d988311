"""Two-mapping contraction families: validation, rates, pointwise checks, fitting.

Five families are supported.  Each is an inequality between p(Tx, Sy) and a
combination of the metric values at (x, y); the slack (right side minus left
side) must lie in the ambient cone for the condition to hold at a pair.

For a fixed sample set every family's right side is linear in its parameters,
so sampled feasibility reduces to linear constraints over flattened
(sample, coordinate) pairs.  ``fit_constants`` exploits this to search the
parameter grid for the smallest contraction rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .errors import ConstraintError, DomainError
from .pcm_core import (
    PartialConeMetricSpace,
    in_domain,
    metric_rows,
    require_point,
    sample_points,
)

# Default resolution of the constant-fitting grid; one midpoint (bisection)
# refinement is applied on top, giving an effective resolution of 1/512.
GRID_STEP = 1.0 / 256.0


class Family(str, Enum):
    KANNAN = "kannan"
    REICH = "reich"
    RATIONAL = "rational"
    IMPLICIT_LINEAR = "implicit-linear"
    MAX_TYPE = "max"


@dataclass(frozen=True)
class ContractionSpec:
    """A contraction family plus its parameter tuple; unused slots stay zero."""

    family: Family
    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0
    s: float = 0.0
    r: float = 0.0


@dataclass(frozen=True)
class MappingPair:
    T: Callable
    S: Callable


_UNUSED_SLOTS = {
    Family.KANNAN: ("gamma", "s", "r"),
    Family.REICH: ("s", "r"),
    Family.RATIONAL: ("gamma", "s", "r"),
    Family.IMPLICIT_LINEAR: (),
    Family.MAX_TYPE: ("beta", "gamma", "s", "r"),
}


def param_violations(spec: ContractionSpec) -> list:
    """All violated parameter constraints for the spec's family, as messages.

    Strict inequalities are checked strictly, with no tolerance.
    """
    v = []
    params = (spec.alpha, spec.beta, spec.gamma, spec.s, spec.r)
    if not all(math.isfinite(p) for p in params):
        return ["parameters must be finite"]

    def unit(name, value):
        if not 0.0 <= value < 1.0:
            v.append(f"{name} in [0,1) violated")

    f = spec.family
    if f in (Family.KANNAN, Family.RATIONAL):
        unit("alpha", spec.alpha)
        unit("beta", spec.beta)
        if not spec.alpha + spec.beta < 1.0:
            v.append("alpha+beta < 1 violated")
    elif f is Family.REICH:
        unit("alpha", spec.alpha)
        unit("beta", spec.beta)
        unit("gamma", spec.gamma)
        if not spec.alpha + spec.beta + spec.gamma < 1.0:
            v.append("alpha+beta+gamma < 1 violated")
    elif f is Family.MAX_TYPE:
        unit("alpha", spec.alpha)
    elif f is Family.IMPLICIT_LINEAR:
        ab = spec.alpha + spec.beta
        if ab == 0.0:
            v.append("alpha+beta != 0 violated")
        else:
            ratio = (spec.s - spec.beta) / ab
            if not ratio >= 0.0:
                v.append("(s-beta)/(alpha+beta) >= 0 violated")
            if not ratio < 1.0:
                v.append("(s-beta)/(alpha+beta) < 1 violated")
        if not spec.alpha + spec.beta + spec.gamma > 0.0:
            v.append("alpha+beta+gamma > 0 violated")
        if not spec.gamma > 0.0:
            v.append("gamma > 0 violated")
        if not spec.gamma - spec.r >= 0.0:
            v.append("gamma - r >= 0 violated")
    for name in _UNUSED_SLOTS[f]:
        if getattr(spec, name) != 0.0:
            v.append(f"{name} is unused by {f.value} and must be 0")
    return v


def validate_params(spec: ContractionSpec) -> None:
    violations = param_violations(spec)
    if violations:
        raise ConstraintError(violations)


def contraction_rate(spec: ContractionSpec) -> float:
    """The geometric step factor K derived from the family's parameters."""
    validate_params(spec)
    f = spec.family
    if f is Family.KANNAN:
        return spec.alpha / (1.0 - spec.beta)
    if f is Family.REICH:
        return (spec.alpha + spec.beta) / (1.0 - spec.gamma)
    if f is Family.RATIONAL:
        return spec.beta / (1.0 - spec.alpha)
    if f is Family.IMPLICIT_LINEAR:
        return (spec.s - spec.beta) / (spec.alpha + spec.beta)
    return spec.alpha


def _apply_map(space, fn, pts: np.ndarray, label: str) -> np.ndarray:
    out = np.asarray(fn(pts), dtype=float)
    if out.shape != pts.shape:
        raise DomainError(f"{label} changed the point shape {pts.shape} -> {out.shape}")
    if not in_domain(space, out):
        raise DomainError(f"{label} output left the domain box")
    return out


def slack_rows(
    spec: ContractionSpec,
    space: PartialConeMetricSpace,
    maps: MappingPair,
    X: np.ndarray,
    Y: np.ndarray,
) -> np.ndarray:
    """Right side minus left side of the family inequality, per sample row."""
    m = lambda a, b: metric_rows(space, a, b)
    TX = _apply_map(space, maps.T, X, "T")
    SY = _apply_map(space, maps.S, Y, "S")
    f = spec.family
    if f is Family.KANNAN:
        rhs = spec.alpha * m(X, TX) + spec.beta * m(Y, SY)
        lhs = m(TX, SY)
    elif f is Family.REICH:
        rhs = spec.alpha * m(X, Y) + spec.beta * m(X, TX) + spec.gamma * m(Y, SY)
        lhs = m(TX, SY)
    elif f is Family.RATIONAL:
        # coordinatewise product and division; the denominator 1 + p(x,y)
        # is at least 1 in every coordinate, so no zero-division path exists
        pxy = m(X, Y)
        rhs = spec.alpha * (m(X, TX) * m(Y, SY)) / (1.0 + pxy) + spec.beta * pxy
        lhs = m(TX, SY)
    elif f is Family.MAX_TYPE:
        rhs = spec.alpha * np.maximum(np.maximum(m(X, Y), m(X, TX)), m(Y, SY))
        lhs = m(TX, SY)
    else:  # IMPLICIT_LINEAR: parameters weight both sides
        STX = _apply_map(space, maps.S, TX, "S after T")
        lhs = (
            spec.alpha * m(TX, SY)
            + spec.beta * (m(X, TX) + m(Y, SY))
            + spec.gamma * (m(TX, Y) + m(X, SY))
        )
        rhs = spec.s * m(X, Y) + spec.r * m(X, STX)
    return rhs - lhs


def holds_at(spec, space, maps, x, y):
    """Evaluate the family inequality at one pair: (holds, slack vector)."""
    validate_params(spec)
    x = require_point(space, x, "x")
    y = require_point(space, y, "y")
    slack = slack_rows(spec, space, maps, x[None, :], y[None, :])[0]
    return space.ambient.contains(slack), slack


@dataclass(frozen=True)
class PairViolation:
    x: np.ndarray
    y: np.ndarray
    slack: np.ndarray


@dataclass(frozen=True)
class Certificate:
    spec: ContractionSpec
    samples_checked: int
    violations: tuple
    worst_slack: float
    worst_witness: tuple

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_sampled(
    spec: ContractionSpec,
    space: PartialConeMetricSpace,
    maps: MappingPair,
    sampler_seed: int = 0,
    n: int = 10_000,
) -> Certificate:
    """Check the family inequality on n sampled pairs; violations are data.

    ``worst_slack`` is the minimum over all samples of the slack's most
    negative coordinate, whether or not the certificate passes.
    """
    validate_params(spec)
    if n < 1:
        raise ConstraintError("n must be >= 1")
    rng = np.random.default_rng(sampler_seed)
    X = sample_points(space, rng, n)
    Y = sample_points(space, rng, n)
    slack = slack_rows(spec, space, maps, X, Y)
    mins = np.min(slack, axis=1)
    tol = space.ambient.order_tolerance
    bad = np.flatnonzero(mins < -tol)
    violations = tuple(
        PairViolation(X[i].copy(), Y[i].copy(), slack[i].copy()) for i in bad
    )
    worst = int(np.argmin(mins))
    return Certificate(
        spec=spec,
        samples_checked=n,
        violations=violations,
        worst_slack=float(mins[worst]),
        worst_witness=(X[worst].copy(), Y[worst].copy()),
    )


def _grid_ceil(values, step):
    """Smallest grid multiples >= values (elementwise, grid = multiples of step)."""
    v = np.asarray(values, dtype=float)
    k = np.ceil(v / step - 1e-9)
    return np.maximum(k, 0.0) * step


def _min_weight(target: np.ndarray, coef: np.ndarray) -> Optional[float]:
    """Smallest t >= 0 with t*coef >= target for every constraint row.

    Returns None when some row has a nonpositive coefficient but a positive
    target, which no t can satisfy.
    """
    pos = coef > 0.0
    if np.any(~pos & (target > 0.0)):
        return None
    if not np.any(pos):
        return 0.0
    ratios = target[pos] / coef[pos]
    return max(float(np.max(ratios)), 0.0)


def _refine(value: float, need: float, step: float) -> float:
    """One bisection refinement: accept the midpoint below when still feasible."""
    mid = value - step / 2.0
    if mid >= need and mid >= 0.0:
        return mid
    return value


def fit_constants(
    family: Family,
    space: PartialConeMetricSpace,
    maps: MappingPair,
    sampler_seed: int = 0,
    n: int = 1024,
    grid_step: float = GRID_STEP,
    symmetric: bool = False,
) -> Optional[ContractionSpec]:
    """Search for the parameters of minimal rate passing on sampled pairs.

    Grid search at ``grid_step`` with one bisection refinement on the
    minimized parameter; remaining parameters are scanned on the coarse grid.
    Returns None when no valid parameters satisfy the sampled constraints.
    The implicit-linear family couples five parameters and is not fitted.
    """
    if family not in (Family.KANNAN, Family.REICH, Family.RATIONAL, Family.MAX_TYPE):
        raise ConstraintError("unsupported family for fitting")
    if n < 1:
        raise ConstraintError("n must be >= 1")
    rng = np.random.default_rng(sampler_seed)
    X = sample_points(space, rng, n)
    Y = sample_points(space, rng, n)

    m = lambda a, b: metric_rows(space, a, b).ravel()
    TX = _apply_map(space, maps.T, X, "T")
    SY = _apply_map(space, maps.S, Y, "S")
    pxy = m(X, Y)
    pxTx = m(X, TX)
    pySy = m(Y, SY)
    lhs = m(TX, SY)
    target = lhs - space.ambient.order_tolerance

    spec = None
    if family is Family.MAX_TYPE:
        joined = np.maximum(np.maximum(pxy, pxTx), pySy)
        need = _min_weight(target, joined)
        if need is not None:
            a = _refine(float(_grid_ceil(need, grid_step)), need, grid_step)
            if a < 1.0:
                spec = ContractionSpec(Family.MAX_TYPE, alpha=a)
    elif family is Family.KANNAN and symmetric:
        need = _min_weight(target, pxTx + pySy)
        if need is not None:
            t = _refine(float(_grid_ceil(need, grid_step)), need, grid_step)
            if 2.0 * t < 1.0:
                spec = ContractionSpec(Family.KANNAN, alpha=t, beta=t)
    elif family is Family.KANNAN:
        spec = _fit_scan_pair(
            pxTx, pySy, target, grid_step,
            lambda a, b: ContractionSpec(Family.KANNAN, alpha=a, beta=b),
        )
    elif family is Family.RATIONAL:
        quotient = (pxTx * pySy) / (1.0 + pxy)
        spec = _fit_scan_pair(
            pxy, quotient, target, grid_step,
            lambda b, a: ContractionSpec(Family.RATIONAL, alpha=a, beta=b),
        )
    else:  # REICH
        spec = _fit_reich(pxy, pxTx, pySy, target, grid_step)

    if spec is None or param_violations(spec):
        return None
    # safety net: the chosen parameters must actually pass on these samples
    slack = slack_rows(spec, space, maps, X, Y)
    if np.min(slack) < -space.ambient.order_tolerance:
        return None
    return spec


def _fit_scan_pair(col_main, col_scan, target, step, build):
    """Two-parameter fit: scan the secondary weight, minimize the main one.

    ``build(main, scan)`` constructs the candidate spec; the rate is taken
    from the resulting spec so each family keeps its own formula.
    """
    best = None
    nsteps = int(round(1.0 / step))
    for k in range(nsteps):
        b = k * step
        need = _min_weight(target - b * col_scan, col_main)
        if need is None:
            continue
        a = _refine(float(_grid_ceil(need, step)), need, step)
        cand = build(a, b)
        if param_violations(cand):
            continue
        rate = contraction_rate(cand)
        if best is None or rate < best[0] - 1e-15:
            best = (rate, cand)
    return None if best is None else best[1]


def _fit_reich(pxy, pxTx, pySy, target, step):
    """Three-parameter fit: scan (beta, gamma) coarse, minimize alpha."""
    nsteps = int(round(1.0 / step))
    gammas = np.arange(nsteps) * step
    pos = pxy > 0.0
    best = None
    for k in range(nsteps):
        b = k * step
        resid = target - b * pxTx  # (m,)
        grid_resid = resid[None, :] - gammas[:, None] * pySy[None, :]  # (G, m)
        if np.any(pos):
            needs = np.max(
                np.where(pos[None, :], grid_resid / np.where(pos, pxy, 1.0)[None, :], -np.inf),
                axis=1,
            )
        else:
            needs = np.zeros(nsteps)
        needs = np.maximum(needs, 0.0)
        # rows with p(x,y) == 0 admit no alpha contribution at all
        if np.any(~pos):
            infeasible = np.any(grid_resid[:, ~pos] > 0.0, axis=1)
        else:
            infeasible = np.zeros(nsteps, dtype=bool)
        alphas = _grid_ceil(needs, step)
        for g_idx in np.flatnonzero(~infeasible & (alphas < 1.0)):
            g = gammas[g_idx]
            a = _refine(float(alphas[g_idx]), float(needs[g_idx]), step)
            cand = ContractionSpec(Family.REICH, alpha=a, beta=b, gamma=g)
            if param_violations(cand):
                continue
            rate = contraction_rate(cand)
            if best is None or rate < best[0] - 1e-15:
                best = (rate, cand)
    return None if best is None else best[1]
