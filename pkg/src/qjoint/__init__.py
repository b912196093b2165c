"""Joint outcome distributions for sequences of quantum measurements.

Tools to decide, on a designated set of states, whether a family of
measurements admits a classical joint outcome distribution: sequenced POVM
probabilities, the four defining distribution properties, on-state
permutability checks, two-projector block decomposition with a commuting
repair, and a verified instance showing that pairwise order-independence
does not extend to longer sequences.
"""

from .counterexample import (
    CounterexampleInstance,
    SearchConfig,
    SearchResult,
    block_swap_defect,
    complemented_instance,
    induced_family,
    induced_state_family,
    load_appendix_instance,
    parametrize_projector,
    search,
    verify_instance,
)
from .distribution import (
    JointDistributionTable,
    OrbitSpec,
    PropertyReport,
    StateFamily,
    build_joint_distribution,
    check_disjointness,
    check_functional_axioms,
    check_marginals,
    check_on_state_projector,
    check_reducibility,
    check_sequential_independence,
    conditional_w,
    orbit_states,
    run_property_checks,
    theorem1_check,
    theorem2_verdict,
    w_functional,
)
from .errors import (
    CombinatorialLimitExceeded,
    ConvergenceFailure,
    DegeneratePairingFailure,
    DimensionMismatch,
    NoFeasiblePointFound,
    NotHermitian,
    NotProjective,
    NotProjector,
    NotPsd,
    ParseError,
    PrerequisiteFailed,
    QjointError,
    UnknownOutcome,
    ZeroProbabilityBranch,
)
from .jordan import (
    JordanDecomposition,
    OneDimBlock,
    RepairResult,
    TwoDimBlock,
    jordan_decompose,
    repair_projector,
)
from .measurement import (
    MeasurementFamily,
    Povm,
    binary_projector_povm,
    outcome_probability,
    post_measurement_state,
    sequence_povm_element,
    sequence_root,
)
from .permutation import (
    PermutatorReport,
    complemented_t_permutable,
    is_fully_permutable,
    is_t_permutable,
    pairwise_commutation_defects,
    permutator_trace,
    vector_permutation_defect,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # measurement
    "Povm",
    "MeasurementFamily",
    "binary_projector_povm",
    "outcome_probability",
    "post_measurement_state",
    "sequence_root",
    "sequence_povm_element",
    # distribution
    "StateFamily",
    "OrbitSpec",
    "PropertyReport",
    "JointDistributionTable",
    "w_functional",
    "conditional_w",
    "orbit_states",
    "build_joint_distribution",
    "check_functional_axioms",
    "check_marginals",
    "check_disjointness",
    "check_reducibility",
    "check_on_state_projector",
    "check_sequential_independence",
    "run_property_checks",
    "theorem1_check",
    "theorem2_verdict",
    # permutation
    "PermutatorReport",
    "permutator_trace",
    "vector_permutation_defect",
    "pairwise_commutation_defects",
    "is_fully_permutable",
    "is_t_permutable",
    "complemented_t_permutable",
    # jordan
    "OneDimBlock",
    "TwoDimBlock",
    "JordanDecomposition",
    "RepairResult",
    "jordan_decompose",
    "repair_projector",
    # counterexample
    "CounterexampleInstance",
    "SearchConfig",
    "SearchResult",
    "load_appendix_instance",
    "complemented_instance",
    "induced_family",
    "induced_state_family",
    "block_swap_defect",
    "verify_instance",
    "parametrize_projector",
    "search",
    # errors
    "QjointError",
    "DimensionMismatch",
    "NotHermitian",
    "NotPsd",
    "NotProjector",
    "NotProjective",
    "ConvergenceFailure",
    "ZeroProbabilityBranch",
    "UnknownOutcome",
    "CombinatorialLimitExceeded",
    "PrerequisiteFailed",
    "DegeneratePairingFailure",
    "NoFeasiblePointFound",
    "ParseError",
]
