"""Quantal measure theory on finite history spaces.

Compute quantal measures, precluded events and primitive multiplicative
coevents; check classical-logic rules, coarse-grained classicality and
preclusive separability; replay rule-cited deductions.
"""

from .classicality import (
    Bipartition,
    check_theorem1_condition,
    check_theorem2_condition,
    restrict_and_check,
    verify_separability,
)
from .coevents import (
    Coevent,
    PrimitiveSet,
    affirmed_filter,
    brute_force_primitives,
    check_rules,
    enumerate_primitives,
    evaluate,
    is_homomorphic,
    is_maximal_preclusive_filter,
    is_preclusive,
    is_primitive,
)
from .deduction import CLASSICAL, MULTIPLICATIVE, check_proof, check_step, load_proof, semantic_crosscheck
from .errors import QuantalError
from .events import (
    Event,
    HistorySpace,
    Partition,
    Subalgebra,
    complement,
    implies_event,
    intersect,
    is_subset,
    make_space,
    subalgebra_events,
    symmetric_difference,
    union,
)
from .measure import (
    Epsilon,
    Exact,
    MeasureSpec,
    NullStructure,
    enumerate_precluded,
    interference2,
    interference3,
    is_precluded,
    mu,
    validate,
)
from .scenarios import load_scenario, run_scenario

__version__ = "0.1.0"
