"""Fixed points of mapping pairs on partial cone metric spaces.

Partial cone metrics take values in an ordered vector space and allow
nonzero self-distance.  The package provides the ordered ambient space, the
metric-space layer with sampled axiom checks, five verified contraction
families with derived rates, an alternating two-map iteration with geometric
tail bounds, a catalog of ready-made instances, and a CLI.
"""

from .contractions import (
    Certificate,
    ContractionSpec,
    Family,
    MappingPair,
    contraction_rate,
    fit_constants,
    holds_at,
    param_violations,
    validate_params,
    verify_sampled,
)
from .errors import ConefixError, ConstraintError, DimensionMismatch, DomainError
from .ordered_space import AmbientSpace, ORTHANT_NORMAL_CONSTANT, normal_constant
from .pcm_core import (
    AxiomReport,
    PartialConeMetricSpace,
    cauchy_residual,
    check_axioms,
    induced_metric,
    is_converged,
    pcm_eval,
    sample_points,
)
from .solver import (
    FixedPointReport,
    IterationTrace,
    SolveResult,
    StopConfig,
    UniquenessReport,
    apriori_bound,
    certify_fixed_point,
    check_uniqueness,
    solve,
    trace_records,
)
from .spaces_catalog import (
    CatalogEntry,
    catalog,
    get_entry,
    make_l1_max_space,
    make_r2_max_space,
    make_r2_min_space,
)

__version__ = "0.1.0"

__all__ = [
    "AmbientSpace",
    "AxiomReport",
    "CatalogEntry",
    "Certificate",
    "ConefixError",
    "ConstraintError",
    "ContractionSpec",
    "DimensionMismatch",
    "DomainError",
    "Family",
    "FixedPointReport",
    "IterationTrace",
    "MappingPair",
    "ORTHANT_NORMAL_CONSTANT",
    "PartialConeMetricSpace",
    "SolveResult",
    "StopConfig",
    "UniquenessReport",
    "apriori_bound",
    "catalog",
    "cauchy_residual",
    "certify_fixed_point",
    "check_axioms",
    "check_uniqueness",
    "contraction_rate",
    "fit_constants",
    "get_entry",
    "holds_at",
    "induced_metric",
    "is_converged",
    "make_l1_max_space",
    "make_r2_max_space",
    "make_r2_min_space",
    "normal_constant",
    "param_violations",
    "pcm_eval",
    "sample_points",
    "solve",
    "trace_records",
    "validate_params",
    "verify_sampled",
]
