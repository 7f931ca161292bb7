"""Error-probability analysis of balanced binary relay trees.

A balanced binary tree of relay nodes aggregates the one-bit decisions of
``N = 2**h`` identical independent sensors into a single decision at the
root.  This package evolves the Type I / Type II error pair of that system
exactly in the log domain, classifies its trajectory through the governing
region geometry, computes the closed-form bounds on the root error, and
cross-validates everything against a literal Monte Carlo simulation of the
message-passing tree.
"""

from .logdomain import LOG2_ZERO, ExtendedProb, log2_add, log2_one_minus_pow2
from .dynamics import (
    COMPARISON_TOL,
    DomainError,
    ErrorPair,
    IndexOverflowError,
    NoEntryError,
    NotInTriangleError,
    RegionTag,
    RegionTarget,
    Side,
    Trajectory,
    TrajectoryState,
    b_index,
    classify,
    entry_level,
    evolve,
    fuse,
    fuse_oracle,
    invert_or_step,
    total_error_log2,
)
from .bounds import (
    BoundResult,
    CrummyRow,
    CrummyScanResult,
    CrummySchedule,
    DegenerateInputError,
    GrowthRow,
    NoConvergenceError,
    SandwichResult,
    TheoremId,
    VisitParity,
    asymptotic_ratio,
    bound_corollary1,
    bound_corollary2_alpha,
    bound_corollary2_beta,
    bound_theorem1,
    bound_theorem2,
    bound_theorem3,
    bound_theorem4,
    crummy_scan,
    detect_b2ru_visit,
    min_sensors_exact,
    min_sensors_growth,
    sandwich_check,
    select_bounds,
)
from .mcsim import (
    Gate,
    Hypothesis,
    McConfig,
    McEstimate,
    agreement_z,
    gate_schedule,
    simulate,
    simulate_lrt_equivalence,
)

__version__ = "0.1.0"

__all__ = [
    "LOG2_ZERO",
    "ExtendedProb",
    "log2_add",
    "log2_one_minus_pow2",
    "COMPARISON_TOL",
    "DomainError",
    "ErrorPair",
    "IndexOverflowError",
    "NoEntryError",
    "NotInTriangleError",
    "RegionTag",
    "RegionTarget",
    "Side",
    "Trajectory",
    "TrajectoryState",
    "b_index",
    "classify",
    "entry_level",
    "evolve",
    "fuse",
    "fuse_oracle",
    "invert_or_step",
    "total_error_log2",
    "BoundResult",
    "CrummyRow",
    "CrummyScanResult",
    "CrummySchedule",
    "DegenerateInputError",
    "GrowthRow",
    "NoConvergenceError",
    "SandwichResult",
    "TheoremId",
    "VisitParity",
    "asymptotic_ratio",
    "bound_corollary1",
    "bound_corollary2_alpha",
    "bound_corollary2_beta",
    "bound_theorem1",
    "bound_theorem2",
    "bound_theorem3",
    "bound_theorem4",
    "crummy_scan",
    "detect_b2ru_visit",
    "min_sensors_exact",
    "min_sensors_growth",
    "sandwich_check",
    "select_bounds",
    "Gate",
    "Hypothesis",
    "McConfig",
    "McEstimate",
    "agreement_z",
    "gate_schedule",
    "simulate",
    "simulate_lrt_equivalence",
    "__version__",
]
