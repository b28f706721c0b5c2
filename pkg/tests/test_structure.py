import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import data, leaf, split
from replab.errors import ContractError
from replab.experiments import random_instance
from replab.generators import gen_noise_pruning_set, gen_safe_node_tree, make_rng, NoiseModel
from replab.pruning import rep_prune
from replab.structure import (
    Reason,
    SafeNode,
    SafeNodeReport,
    corollary3_holds,
    depth_to_first_leaf,
    descendants_at,
    fringe,
    safe_nodes,
    surviving_internal,
    theorem4_predicate,
)
from replab.tree import DecisionTree, classify_pass


def lopsided():
    # root -> (internal A -> (internal B -> leaves, leaf), internal C -> leaves)
    b = split(0.1, leaf(0), leaf(1))
    a = split(0.2, b, leaf(0))
    c = split(0.8, leaf(1), leaf(0))
    return DecisionTree(split(0.5, a, c))


def test_fringe_and_safe():
    t = lopsided()
    # preorder: 0 root, 1 A, 2 B, 3,4 leaves, 5 leaf, 6 C, 7,8 leaves
    assert fringe(t) == {1, 2, 6}
    assert [s.node for s in safe_nodes(t).safe] == [1, 6]


def test_single_leaf_has_no_safe_nodes():
    assert safe_nodes(DecisionTree(leaf(0))).k == 0


def test_stump_root_is_safe(stump):
    assert [s.node for s in safe_nodes(stump).safe] == [0]


def test_depth_to_first_leaf(depth2):
    t = lopsided()
    assert depth_to_first_leaf(t, 0) == 1
    assert depth_to_first_leaf(t, 1) == 0
    assert depth_to_first_leaf(depth2, 0) == 1
    assert descendants_at(t, 0, 1) == [1, 6]
    with pytest.raises(ContractError):
        depth_to_first_leaf(t, 3)


def test_surviving_rejects_foreign_tree(stump, depth2):
    with pytest.raises(ContractError):
        surviving_internal(DecisionTree(leaf(0)), stump)


@pytest.mark.parametrize("pairs,collapses,reason", [
    # both safe nodes lean positive and are pruned
    ([(0.1, 1), (0.6, 1), (0.9, 1)], True, Reason.COLLAPSES),
    # opposite majorities: each side pruned but the root survives
    ([(0.1, 0), (0.2, 0), (0.6, 1), (0.9, 1)], False, Reason.MIXED_MAJORITY),
    # a perfectly separated safe node is kept
    ([(0.1, 0), (0.3, 1), (0.3, 1), (0.1, 0)], False, Reason.SAFE_RETAINED),
])
def test_predicate_examples(depth2, pairs, collapses, reason):
    t = classify_pass(depth2, data(*pairs))
    pruned = rep_prune(t).tree
    pred = theorem4_predicate(t, pruned, safe_nodes(t))
    assert (pred.collapses, pred.reason) == (collapses, reason)
    assert pred.collapses == pruned.root.is_leaf


def test_predicate_rejects_stale_report(depth2):
    t = classify_pass(depth2, data((0.1, 1)))
    stale = SafeNodeReport((SafeNode(1, 5, 5), SafeNode(4, 0, 0)))
    with pytest.raises(ContractError):
        theorem4_predicate(t, rep_prune(t).tree, stale)


def test_predicate_rejects_incomplete_report(depth2):
    t = classify_pass(depth2, data((0.1, 1)))
    partial = SafeNodeReport(safe_nodes(t).safe[:1])
    with pytest.raises(ContractError):
        theorem4_predicate(t, rep_prune(t).tree, partial)


seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_safe_nodes_cut_every_path(seed):
    tree, _ = random_instance(make_rng(seed), max_leaves=16, max_examples=0)
    safe = {s.node for s in safe_nodes(tree).safe}
    par = tree.parents()
    for lid in tree.leaf_ids():
        path, p = [], par[lid]
        while p is not None:
            path.append(p)
            p = par[p]
        assert len(safe.intersection(path)) == (1 if path else 0)


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_corollary3_on_random_instances(seed):
    tree, ds = random_instance(make_rng(seed), max_leaves=16, max_examples=50)
    t = classify_pass(tree, ds)
    assert corollary3_holds(t, rep_prune(t).tree)


@settings(max_examples=200, deadline=None)
@given(seeds, st.integers(1, 6), st.sampled_from([0.55, 0.75, 0.9]))
def test_predicate_exact_on_noise_data(seed, k, p):
    rng = make_rng(seed)
    tree = gen_safe_node_tree(k, int(rng.integers(0, 3)), seed=rng)
    ds = gen_noise_pruning_set(tree, NoiseModel(p), int(rng.integers(1, 6 * k + 1)), seed=rng)
    t = classify_pass(tree, ds)
    pruned = rep_prune(t).tree
    assert theorem4_predicate(t, pruned, safe_nodes(t)).collapses == pruned.root.is_leaf
