"""Exhaustive search over all prunings of a small tree.

Used as ground truth for ``rep_prune``.  Every pruning is built and scored on
its own; nothing is shared between evaluations, so a bug in the bottom-up
recursion of the pruner cannot leak into the reference answer.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

from replab.errors import OracleCapExceeded
from replab.tree import PRUNING_MAJORITY, DecisionTree, Node, apply_pruning, subtree_error

DEFAULT_LEAF_CAP = 12


@dataclass(frozen=True)
class OracleResult:
    best: frozenset[int]
    best_error: int
    best_size: int
    pruning_count: int


def count_prunings(node: Node | DecisionTree) -> int:
    if isinstance(node, DecisionTree):
        node = node.root
    if node.is_leaf:
        return 1
    return 1 + count_prunings(node.left) * count_prunings(node.right)


def _check_cap(tree: DecisionTree, cap: int) -> None:
    leaves = tree.leaf_count
    if leaves > cap:
        raise OracleCapExceeded(leaves, cap, count_prunings(tree))


def enumerate_prunings(tree: DecisionTree, cap: int = DEFAULT_LEAF_CAP) -> Iterator[frozenset[int]]:
    """Yield every pruning of ``tree`` once, as the set of collapsed node ids."""
    _check_cap(tree, cap)
    ids = tree.ids()

    def walk(node: Node) -> Iterator[frozenset[int]]:
        if node.is_leaf:
            yield frozenset()
            return
        yield frozenset([ids[id(node)]])
        rights = list(walk(node.right))
        for left in walk(node.left):
            for right in rights:
                yield left | right

    yield from walk(tree.root)


def error_of(selection, tree: DecisionTree, labeling: str = PRUNING_MAJORITY) -> int:
    return subtree_error(apply_pruning(tree, selection, labeling).root)


def optimal_pruning(tree: DecisionTree, labeling: str = PRUNING_MAJORITY,
                    cap: int = DEFAULT_LEAF_CAP) -> OracleResult:
    """Smallest among the most accurate prunings of ``tree``.

    Several prunings can share the optimal (error, size); the representative
    is the one whose sorted collapsed ids come first lexicographically.
    """
    best = None
    count = 0
    for sel in enumerate_prunings(tree, cap):
        count += 1
        pruned = apply_pruning(tree, sel, labeling)
        key = (subtree_error(pruned.root), pruned.size, sorted(sel))
        if best is None or key < best[0]:
            best = (key, sel)
    (err, size, _), sel = best
    return OracleResult(sel, err, size, count)
