"""talab: a workbench for minimally generated algebras of subsets of omega.

Exact cylinder-set arithmetic, lazy sets with step budgets, coherent
sequences over countable ordinals with machine-checkable witnesses,
scattered ordinal topologies, twinned-tree algebras, and generic
permutation experiments that extend a sequence while killing the
convergence of chosen ultrafilters.
"""

from .omega_sets import (
    BudgetExceeded,
    CylinderSet,
    DEFAULT_BUDGET,
    DEFAULT_HORIZON,
    DigitSet,
    Gas,
    LazySet,
    Verdict,
    almost_subset,
    complement,
    difference,
    enumerate_node,
    intersection,
    node_index,
    parse_set_literal,
    splits,
    union,
)
from .ordinals import Ordinal, canonical_enumeration, parse_ordinal
from .coherent import (
    BranchBaseSequence,
    CoherenceWitness,
    CoherentSequence,
    HatSet,
    ListSequence,
    PeriodicBits,
    check_coherent,
    check_proper,
    coherence_report,
    find_witness,
    hat,
    is_cover,
    proper_certificate,
    verify_inclusion,
)
from .stone_topology import (
    AffinePoints,
    ConstantPoints,
    CoverElement,
    CyclicPoints,
    OrdinalSpace,
    SubbasicCover,
    Subcover,
    cantor_bendixson,
    converges,
    finite_subcover,
    hausdorff_check,
    neighborhood_base,
    space_dot,
)
from .talgebra import (
    IN,
    OUT,
    UNKNOWN,
    BlockTable,
    Branch,
    BranchSequence,
    Decision,
    Node,
    StageRecord,
    TTree,
    ValidationReport,
    branch_from_oracle,
    divergence,
    hats_disjoint,
    phi,
    tree_dot,
    ultrafilter_decide,
    validate,
)
from .construct import (
    ConstructionBlocked,
    ConstructionRefuted,
    SplitReport,
    SplitterContext,
    base_algebra,
    blocks,
    extend,
    splitting_extend,
    staged_pipeline,
)
from .generic_perm import (
    DenseRequirement,
    GenericPermutation,
    KillRequirements,
    PermCondition,
    hitting_requirements,
    kill_requirements,
    point_requirement,
    schedule_requirements,
)

__version__ = "0.1.0"

__all__ = [
    "AffinePoints",
    "BlockTable",
    "Branch",
    "BranchBaseSequence",
    "BranchSequence",
    "BudgetExceeded",
    "CoherenceWitness",
    "CoherentSequence",
    "ConstantPoints",
    "ConstructionBlocked",
    "ConstructionRefuted",
    "CoverElement",
    "CyclicPoints",
    "CylinderSet",
    "DEFAULT_BUDGET",
    "DEFAULT_HORIZON",
    "Decision",
    "DenseRequirement",
    "DigitSet",
    "Gas",
    "GenericPermutation",
    "HatSet",
    "IN",
    "KillRequirements",
    "LazySet",
    "ListSequence",
    "Node",
    "OUT",
    "Ordinal",
    "OrdinalSpace",
    "PeriodicBits",
    "PermCondition",
    "SplitReport",
    "SplitterContext",
    "StageRecord",
    "SubbasicCover",
    "Subcover",
    "TTree",
    "UNKNOWN",
    "ValidationReport",
    "Verdict",
    "almost_subset",
    "base_algebra",
    "blocks",
    "branch_from_oracle",
    "canonical_enumeration",
    "cantor_bendixson",
    "check_coherent",
    "check_proper",
    "coherence_report",
    "complement",
    "converges",
    "difference",
    "divergence",
    "enumerate_node",
    "extend",
    "find_witness",
    "finite_subcover",
    "hat",
    "hats_disjoint",
    "hausdorff_check",
    "hitting_requirements",
    "intersection",
    "is_cover",
    "kill_requirements",
    "neighborhood_base",
    "node_index",
    "parse_set_literal",
    "phi",
    "point_requirement",
    "proper_certificate",
    "schedule_requirements",
    "space_dot",
    "splits",
    "splitting_extend",
    "staged_pipeline",
    "tree_dot",
    "ultrafilter_decide",
    "union",
    "validate",
    "verify_inclusion",
    "__version__",
]
