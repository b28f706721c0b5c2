import pytest

from conftest import data, leaf, split
from replab.errors import OracleCapExceeded
from replab.experiments import random_instance
from replab.generators import gen_random_tree, make_rng
from replab.oracle import count_prunings, enumerate_prunings, error_of, optimal_pruning
from replab.tree import DecisionTree, classify_pass, is_antichain


def test_counts_of_small_shapes(stump, depth2):
    assert count_prunings(DecisionTree(leaf(0))) == 1
    assert count_prunings(stump) == 2
    assert count_prunings(depth2) == 5
    assert count_prunings(DecisionTree(split(0.5, split(0.25, leaf(0), leaf(1)), leaf(0)))) == 3


@pytest.mark.parametrize("seed", range(20))
def test_enumeration_is_complete_and_distinct(seed):
    t = gen_random_tree(int(make_rng(seed).integers(0, 9)), seed=seed)
    sels = list(enumerate_prunings(t))
    assert len(sels) == len(set(sels)) == count_prunings(t)
    assert all(is_antichain(t, s) for s in sels)


def test_cap_refused_with_counts():
    t = gen_random_tree(12, seed=1)
    with pytest.raises(OracleCapExceeded) as exc:
        optimal_pruning(t)
    assert exc.value.leaves == 13 and exc.value.cap == 12
    assert exc.value.pruning_count == count_prunings(t)
    assert optimal_pruning(t, cap=13).pruning_count == count_prunings(t)


def test_error_of_hand_cases(depth2):
    t = classify_pass(depth2, data((0.1, 0), (0.3, 1), (0.6, 1), (0.9, 1)))
    assert error_of(set(), t) == 1  # leaf 0.6 -> label 0
    assert error_of({0}, t) == 1
    assert error_of({4}, t) == 0
    assert error_of({1}, t) == 2


def test_best_prefers_smaller_tree():
    t = classify_pass(DecisionTree(split(0.5, leaf(0), leaf(1))), data())
    res = optimal_pruning(t)
    assert res.best == frozenset({0}) and res.best_error == 0 and res.best_size == 1


@pytest.mark.parametrize("seed", range(30))
def test_best_error_is_minimum(seed):
    tree, ds = random_instance(make_rng(seed), max_leaves=8, max_examples=30)
    t = classify_pass(tree, ds)
    res = optimal_pruning(t)
    assert res.best_error == min(error_of(s, t) for s in enumerate_prunings(t))
