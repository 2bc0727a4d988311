"""Built-in spaces, mappings, and ready-made verification bundles."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .contractions import ContractionSpec, Family, MappingPair
from .errors import ConstraintError
from .ordered_space import AmbientSpace
from .pcm_core import PartialConeMetricSpace

QUARTER_PI = math.pi / 4.0


def scale_map(c: float):
    """Coordinatewise scaling x -> c*x."""

    def apply(x):
        return c * x

    return apply


def tan_third(x):
    """Coordinatewise x -> x*tan(x)/3; maps [0, pi/4] into itself."""
    return x * np.tan(x) / 3.0


def sin_third(x):
    """Coordinatewise x -> x*sin(x)/3."""
    return x * np.sin(x) / 3.0


def cos_deficit_third(x):
    """Coordinatewise x -> x*(1 - cos(x))/3."""
    return x * (1.0 - np.cos(x)) / 3.0


identity = scale_map(1.0)


def make_r2_max_space(k: float, box_upper: float = QUARTER_PI) -> PartialConeMetricSpace:
    """Scalar domain [0, box_upper] with metric (max{x,y}, k*max{x,y}) in R^2."""
    if k < 0.0:
        raise ConstraintError("k must be >= 0")

    def metric(x, y):
        m = np.maximum(x[..., 0], y[..., 0])
        return np.stack([m, k * m], axis=-1)

    return PartialConeMetricSpace(
        ambient=AmbientSpace(2, "sup"),
        point_dimension=1,
        metric=metric,
        domain_box=np.array([[0.0, box_upper]]),
        name=f"r2max(k={k:g})",
    )


def make_l1_max_space(dim: int, box_upper: float = QUARTER_PI) -> PartialConeMetricSpace:
    """Truncated summable-sequence domain [0, box_upper]^dim with the join metric.

    The metric is the coordinatewise maximum and the ambient norm is the
    one-sum norm, so the truncation is exact per coordinate.
    """
    if dim < 1:
        raise ConstraintError("dim must be >= 1")

    def metric(x, y):
        return np.maximum(x, y)

    return PartialConeMetricSpace(
        ambient=AmbientSpace(dim, "one-sum"),
        point_dimension=dim,
        metric=metric,
        domain_box=np.tile([0.0, box_upper], (dim, 1)),
        name=f"l1max(dim={dim})",
    )


def make_r2_min_space(k: float = 1.0, box_upper: float = QUARTER_PI) -> PartialConeMetricSpace:
    """Deliberately broken variant using min instead of max.

    The self-distance exceeds the pair distance whenever x > y, so the
    self-distance axiom (PCM1) fails; used as the counterexample space in
    axiom verification.
    """
    if k < 0.0:
        raise ConstraintError("k must be >= 0")

    def metric(x, y):
        m = np.minimum(x[..., 0], y[..., 0])
        return np.stack([m, k * m], axis=-1)

    return PartialConeMetricSpace(
        ambient=AmbientSpace(2, "sup"),
        point_dimension=1,
        metric=metric,
        domain_box=np.array([[0.0, box_upper]]),
        name=f"r2min(k={k:g})",
    )


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    space: PartialConeMetricSpace
    maps: MappingPair
    spec: ContractionSpec
    expected_fixed_point: np.ndarray
    note: str


def catalog(l1_dim: int = 8) -> list:
    """The built-in (space, maps, spec) bundles.

    Every entry passes sampled verification of its contraction condition and
    iterates to its expected fixed point.  The rational entry's constants are
    frozen to the result of the built-in fit (seed 0): beta = 1/2 is forced
    exactly by pairs with one mapped point at the origin, and alpha = 0
    minimizes the rate.
    """
    entries = [
        CatalogEntry(
            id="l1-tan-quarter",
            space=make_l1_max_space(l1_dim),
            maps=MappingPair(T=tan_third, S=scale_map(0.25)),
            spec=ContractionSpec(Family.KANNAN, alpha=1.0 / 3.0, beta=1.0 / 3.0),
            expected_fixed_point=np.zeros(l1_dim),
            note="tangent-growth and quarter-scaling pair on the truncated "
            "summable-sequence space; symmetric two-sided condition with "
            "weight 1/3",
        ),
        CatalogEntry(
            id="interval-half-sin",
            space=make_r2_max_space(1.0),
            maps=MappingPair(T=scale_map(0.5), S=sin_third),
            spec=ContractionSpec(Family.RATIONAL, alpha=0.0, beta=0.5),
            expected_fixed_point=np.zeros(1),
            note="halving and sine-damped pair on the scalar interval; "
            "rational-type condition with fitted constants",
        ),
        CatalogEntry(
            id="interval-cos-half",
            space=make_r2_max_space(1.0),
            maps=MappingPair(T=cos_deficit_third, S=scale_map(0.5)),
            spec=ContractionSpec(Family.MAX_TYPE, alpha=2.0 / 3.0),
            expected_fixed_point=np.zeros(1),
            note="cosine-deficit and halving pair on the scalar interval; "
            "max-type condition with weight 2/3",
        ),
    ]
    return entries


def get_entry(entry_id: str, l1_dim: int = 8) -> CatalogEntry:
    for entry in catalog(l1_dim):
        if entry.id == entry_id:
            return entry
    known = ", ".join(e.id for e in catalog(l1_dim))
    raise ConstraintError(f"unknown catalog entry '{entry_id}' (known: {known})")
