"""Fringe and safe nodes, and the structural predicates about when REP collapses a tree."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from replab.errors import ContractError
from replab.tree import DecisionTree, Node


@dataclass(frozen=True)
class SafeNode:
    node: int
    n_i: int
    pos_i: int

    @property
    def neg_i(self) -> int:
        return self.n_i - self.pos_i


@dataclass(frozen=True)
class SafeNodeReport:
    safe: tuple[SafeNode, ...]

    @property
    def k(self) -> int:
        return len(self.safe)

    @property
    def n(self) -> int:
        return sum(s.n_i for s in self.safe)

    def to_dict(self) -> dict:
        return {"k": self.k, "safe": [{"node": s.node, "n_i": s.n_i, "pos_i": s.pos_i} for s in self.safe]}


class Reason(str, Enum):
    COLLAPSES = "all-safe-collapsed-same-majority"
    SAFE_RETAINED = "safe-subtree-retained"
    MIXED_MAJORITY = "mixed-safe-majorities"


@dataclass(frozen=True)
class CollapsePrediction:
    collapses: bool
    reason: Reason


def fringe(tree: DecisionTree) -> set[int]:
    """Internal nodes having at least one leaf child in the unpruned tree."""
    return {
        i for i, n in enumerate(tree.nodes)
        if not n.is_leaf and (n.left.is_leaf or n.right.is_leaf)
    }


def safe_nodes(tree: DecisionTree) -> SafeNodeReport:
    """Fringe nodes with no fringe proper ancestor, in preorder.

    Nodes above the safe set have only internal children, so the safe set
    cuts every root-to-leaf path exactly once.
    """
    ids = tree.ids()
    out: list[SafeNode] = []

    def walk(node: Node):
        if node.is_leaf:
            return
        if node.left.is_leaf or node.right.is_leaf:
            out.append(SafeNode(ids[id(node)], node.total, node.pos))
            return
        walk(node.left)
        walk(node.right)

    walk(tree.root)
    return SafeNodeReport(tuple(out))


def depth_to_first_leaf(tree: DecisionTree, node_id: int) -> int:
    """Relative depth of the level just above the shallowest leaf under ``node_id``."""
    node = tree.node(node_id)
    if node.is_leaf:
        raise ContractError(f"node {node_id} is a leaf")
    level, frontier = 0, [node]
    while True:
        nxt = []
        for n in frontier:
            if n.left.is_leaf or n.right.is_leaf:
                return level
            nxt += [n.left, n.right]
        frontier = nxt
        level += 1


def descendants_at(tree: DecisionTree, node_id: int, depth: int) -> list[int]:
    ids = tree.ids()
    frontier = [tree.node(node_id)]
    for _ in range(depth):
        frontier = [c for n in frontier if not n.is_leaf for c in (n.left, n.right)]
    return [ids[id(n)] for n in frontier]


def surviving_internal(original: DecisionTree, pruned: DecisionTree) -> set[int]:
    """Ids (in ``original``) of internal nodes that are still internal in ``pruned``."""
    ids = original.ids()
    out: set[int] = set()

    def walk(a: Node, b: Node):
        if a.is_leaf or b.is_leaf:
            if a.is_leaf and not b.is_leaf:
                raise ContractError("pruned tree is not a pruning of the original")
            return
        if (a.attr, a.thr) != (b.attr, b.thr):
            raise ContractError("pruned tree is not a pruning of the original")
        out.add(ids[id(a)])
        walk(a.left, b.left)
        walk(a.right, b.right)

    walk(original.root, pruned.root)
    return out


def theorem4_predicate(original: DecisionTree, pruned: DecisionTree,
                       report: SafeNodeReport) -> CollapsePrediction:
    """Predict whether REP reduced ``original`` to a single leaf.

    Collapse happens exactly when every safe-node subtree was pruned away and
    the safe nodes agree on the majority: all have pos >= neg, or all have
    neg >= pos.
    """
    for s in report.safe:
        n = original.node(s.node)
        if n.is_leaf or (n.total, n.pos) != (s.n_i, s.pos_i):
            raise ContractError(f"report entry for node {s.node} does not match the tree")
    if {s.node for s in report.safe} != {s.node for s in safe_nodes(original).safe}:
        raise ContractError("report does not list the safe nodes of the tree")

    alive = surviving_internal(original, pruned)
    if any(s.node in alive for s in report.safe):
        return CollapsePrediction(False, Reason.SAFE_RETAINED)
    all_pos = all(s.pos_i >= s.neg_i for s in report.safe)
    all_neg = all(s.neg_i >= s.pos_i for s in report.safe)
    if all_pos or all_neg:
        return CollapsePrediction(True, Reason.COLLAPSES)
    return CollapsePrediction(False, Reason.MIXED_MAJORITY)


def corollary3_holds(original: DecisionTree, pruned: DecisionTree) -> bool:
    """No node is pruned while one of its descendants at the first-leaf level survives."""
    alive = surviving_internal(original, pruned)
    for nid in original.internal_ids():
        d = depth_to_first_leaf(original, nid)
        if nid not in alive and any(x in alive for x in descendants_at(original, nid, d)):
            return False
    return True
