"""Reduced error pruning for binary decision trees, with oracles, bounds and simulations."""

from replab.errors import (
    ContractError,
    DomainError,
    InvalidSelectionError,
    OracleCapExceeded,
    ReplabError,
    SchemaError,
    TreeParseError,
)
from replab.generators import NoiseModel, gen_figure1_instance, gen_noise_pruning_set, gen_random_tree, make_rng
from replab.oracle import OracleResult, count_prunings, enumerate_prunings, error_of, optimal_pruning
from replab.pruning import (
    PruneResult,
    TraceRecord,
    iterative_prune,
    rep_prune,
    rep_prune_train_labeled,
    trace_assert_theorem2,
)
from replab.structure import (
    SafeNodeReport,
    corollary3_holds,
    depth_to_first_leaf,
    fringe,
    safe_nodes,
    theorem4_predicate,
)
from replab.tree import (
    Dataset,
    DecisionTree,
    Example,
    Node,
    apply_pruning,
    classify_pass,
    deserialize,
    leaf_error,
    route,
    serialize,
    subtree_error,
)

__version__ = "0.1.0"
