"""Feasibility certification and fixed-point power allocation for
interference-coupled wireless QoS targets.

The admission test is a single comparison per terminal: evaluate the
terminal's adjustment rule at the all-ones vector and require the result
to be below 1. When every rule from the norm-like family passes, the
synchronous power-adjustment map is a sup-norm contraction, so the unique
power allocation exists and successive approximation finds it from any
starting point.
"""

from .core import (
    AdjustmentRule,
    EvaluationError,
    FeasibilityReport,
    GainMatrix,
    InfeasibleSystemError,
    InvalidFunctionError,
    InvalidInputError,
    IterationTrace,
    NoiseVector,
    NonConvergenceError,
    PowerVector,
    QosVector,
    insert_component,
    remove_component,
    sup_norm,
)
from .rules import DominationBound, HolderNorm, NormOfNorms, WeightedAbsSum, dominate
from .axioms import (
    AxiomReport,
    CheckVerdict,
    Counterexample,
    check_all,
    check_extended_subhom,
    check_max_monotone,
    check_nonneg,
    check_reverse_triangle,
    check_subadd,
    check_subhom_at_one,
)
from .engine import (
    SolveConfig,
    System,
    affine_parts,
    contraction_modulus,
    lift_rule,
    linear_oracle,
    rate_check,
    solve,
    write_trace_csv,
)
from .scenarios import (
    FixedAssignment,
    MacroDiversity,
    MinSelectionRule,
    MultiConnection,
    SingleCell,
    build_fixed_assignment,
    build_macro_diversity,
    build_macro_diversity_transformed,
    build_multi_connection,
    build_single_cell_received,
    build_single_cell_transformed,
    feasibility_formula,
    hanly,
    kth_largest,
    kth_smallest,
    macro_diversity_exact_update,
    mc_exact_rules_in_bounded_coords,
)
from .capacity import (
    RegionCloud,
    RegionComparison,
    RegionSpec,
    compare_regions,
    evaluate_predicate,
    export_cloud,
    export_inequalities,
    region_inequalities,
    sample_region,
)

__version__ = "0.1.0"
