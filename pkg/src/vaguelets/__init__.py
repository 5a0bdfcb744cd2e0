"""Hölder-modulus calculus and numerical Bessel bounds for vaguelet families."""

from .errors import CatalogLookupError, ConvergenceError, DomainError, PreconditionError
from .holder_calculus import (
    ConditionProfile,
    DecayProfile,
    HolderDecayProfile,
    HolderGrowthProfile,
    certify_holder_decay,
    condition_from_profiles,
    condition_I_to_III,
    gradient_to_holder,
    lemma1_rescale,
    normalize_to_unit,
    theorem2_constants,
    weaken_condition,
)
from .function_catalog import TestFunction, catalog_get, mean_integral, parse_function_spec
from .modulus_verifier import (
    PairSamplingPlan,
    ViolationReport,
    check_condition,
    check_decay,
    check_holder_decay,
    check_holder_growth,
    empirical_constant,
)
from .vaguelet_engine import (
    DyadicCube,
    QuadratureSpec,
    Vaguelet,
    cube_range,
    cubes_in_box,
    default_quadrature,
    inner_product,
    vaguelet_eval,
    verify_mean_zero,
)
from .bessel_estimator import (
    GramMatrix,
    assemble_gram,
    bessel_constant,
    family_growth_study,
    growth_schedule,
    stress_test_bessel,
)

__version__ = "0.1.0"
