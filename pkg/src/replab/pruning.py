"""Reduced error pruning: the single bottom-up sweep and two rival variants.

``rep_prune`` is the analyzed algorithm: after the pruning examples have been
counted into the tree, internal nodes are visited in postorder and a node is
replaced by a leaf whenever the leaf would make no more errors than the
(already pruned) subtree below it.  Replacement leaves take the majority
class of the pruning examples, with ties going to class 0.

``rep_prune_train_labeled`` runs the same sweep but labels replacement
leaves with the node's training-majority class.  ``iterative_prune`` is the
greedy "collapse the best node, repeat" reading of the method.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from replab.errors import ContractError
from replab.tree import (
    PRUNING_MAJORITY,
    TRAINING_MAJORITY,
    DecisionTree,
    Node,
    apply_pruning,
    labeled_leaf_error,
    majority_label,
)

KEEP = "keep"
PRUNE = "prune"


@dataclass(frozen=True)
class TraceRecord:
    node: int
    r_T: int
    r_L: int
    action: str
    visit_order: int


@dataclass
class PruneResult:
    tree: DecisionTree
    trace: list[TraceRecord]
    error: int
    # maximal collapsed nodes, as ids of the input tree
    collapsed: frozenset[int] = field(default_factory=frozenset)

    def __iter__(self):
        # allows ``pruned, trace, error = rep_prune(t)``
        return iter((self.tree, self.trace, self.error))


@dataclass(frozen=True)
class IterativeStep:
    node: int
    delta: int
    error_after: int


def check_counters(tree: DecisionTree) -> None:
    for i, n in enumerate(tree.nodes):
        if not 0 <= n.pos <= n.total:
            raise ContractError(f"node {i}: counters (total={n.total}, pos={n.pos}) are inconsistent")
        if not n.is_leaf and (
            n.total != n.left.total + n.right.total or n.pos != n.left.pos + n.right.pos
        ):
            raise ContractError(f"node {i}: counters are not the sum of its children's; run classify_pass first")


def _maximal(tree: DecisionTree, pruned: set[int]) -> frozenset[int]:
    par = tree.parents()
    out = set()
    for s in pruned:
        p = par[s]
        while p is not None and p not in pruned:
            p = par[p]
        if p is None:
            out.add(s)
    return frozenset(out)


def _sweep(tree: DecisionTree, leaf_label: Callable[[int, Node], int], labeling: str) -> PruneResult:
    check_counters(tree)
    ids = tree.ids()
    trace: list[TraceRecord] = []
    pruned: set[int] = set()

    def prune(node: Node) -> int:
        if node.is_leaf:
            return labeled_leaf_error(node, node.label)
        r_T = prune(node.left) + prune(node.right)
        nid = ids[id(node)]
        r_L = labeled_leaf_error(node, leaf_label(nid, node))
        if r_T < r_L:
            trace.append(TraceRecord(nid, r_T, r_L, KEEP, len(trace)))
            return r_T
        pruned.add(nid)
        trace.append(TraceRecord(nid, r_T, r_L, PRUNE, len(trace)))
        return r_L

    error = prune(tree.root)
    collapsed = _maximal(tree, pruned)
    return PruneResult(apply_pruning(tree, collapsed, labeling), trace, error, collapsed)


def rep_prune(tree: DecisionTree) -> PruneResult:
    """Prune a counter-filled tree bottom-up, labeling new leaves by pruning majority."""
    return _sweep(tree, lambda nid, n: majority_label(n.pos, n.total), PRUNING_MAJORITY)


def rep_prune_train_labeled(tree: DecisionTree) -> PruneResult:
    """Same sweep, but a replacement leaf predicts the node's training majority."""
    for i in tree.internal_ids():
        if tree.node(i).train_label is None:
            raise ContractError(f"internal node {i} has no train_label")
    return _sweep(tree, lambda nid, n: n.train_label, TRAINING_MAJORITY)


def iterative_prune(tree: DecisionTree) -> tuple[DecisionTree, list[IterativeStep], int]:
    """Greedy variant: collapse the node that lowers error most, until every collapse hurts.

    Candidates are all internal nodes of the current tree.  Ties in the error
    change go to the smallest node id.  A collapse that leaves the error
    unchanged still counts as not harmful.
    """
    check_counters(tree)
    nodes = tree.nodes
    collapsed: set[int] = set()
    ids = tree.ids()
    steps: list[IterativeStep] = []

    def current_error(node: Node) -> int:
        if ids[id(node)] in collapsed:
            return min(node.pos, node.total - node.pos)
        if node.is_leaf:
            return labeled_leaf_error(node, node.label)
        return current_error(node.left) + current_error(node.right)

    def candidates(node: Node, out: list[int]):
        if node.is_leaf or ids[id(node)] in collapsed:
            return
        out.append(ids[id(node)])
        candidates(node.left, out)
        candidates(node.right, out)

    error = current_error(tree.root)
    while True:
        cand: list[int] = []
        candidates(tree.root, cand)
        best = None
        for nid in cand:
            n = nodes[nid]
            delta = min(n.pos, n.total - n.pos) - current_error(n)
            if best is None or delta < best[0] or (delta == best[0] and nid < best[1]):
                best = (delta, nid)
        if best is None or best[0] > 0:
            break
        delta, nid = best
        sub = set(tree.subtree_ids(nid))
        collapsed -= sub
        collapsed.add(nid)
        error += delta
        steps.append(IterativeStep(nid, delta, error))
    return apply_pruning(tree, collapsed, PRUNING_MAJORITY), steps, error


def trace_assert_theorem2(trace: list[TraceRecord], tree: DecisionTree) -> bool:
    """Check that no node without original leaf children was pruned while non-trivial.

    A node whose two original children are both internal must be kept if, when
    the sweep reaches it, at least one child is still an internal node.
    """
    nodes = tree.nodes
    internal = tree.internal_ids()
    by_node = {r.node: r for r in trace}
    if len(by_node) != len(trace) or set(by_node) != set(internal):
        raise ContractError("trace does not cover exactly the internal nodes of the tree")
    order = [r.node for r in sorted(trace, key=lambda r: r.visit_order)]
    if order != tree.postorder():
        raise ContractError("trace visit order is not the postorder of the tree")

    ids = tree.ids()
    for nid in internal:
        n = nodes[nid]
        if n.left.is_leaf or n.right.is_leaf:
            continue
        kids = (ids[id(n.left)], ids[id(n.right)])
        non_trivial = any(by_node[c].action == KEEP for c in kids)
        if non_trivial and by_node[nid].action == PRUNE:
            return False
    return True
