"""Binary threshold trees, example routing and the counter-filling pass.

A tree is a full binary tree of ``Node`` objects.  Internal nodes test a
single real attribute against a threshold (``x[attr] < thr`` goes left),
leaves carry a class label in {0, 1}.  Every node carries the pruning-set
counters ``total`` and ``pos`` and optionally the majority class of the
training examples that reached it (``train_label``).

Node ids are preorder indices of the tree they belong to.  Pruning builds a
new tree, so ids of the output tree are recomputed; traces keep the ids of
the tree that was pruned.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from replab.errors import ContractError, InvalidSelectionError, SchemaError, TreeParseError

ORIGINAL = "original"
PRUNED = "pruned"

PRUNING_MAJORITY = "prune"
TRAINING_MAJORITY = "train"


@dataclass(frozen=True)
class Example:
    attributes: tuple[float, ...]
    label: int

    def __post_init__(self):
        if self.label not in (0, 1):
            raise SchemaError(f"label must be 0 or 1, got {self.label!r}")


@dataclass
class Dataset:
    n_attributes: int
    examples: list[Example] = field(default_factory=list)

    def __post_init__(self):
        for i, e in enumerate(self.examples):
            if len(e.attributes) != self.n_attributes:
                raise SchemaError(
                    f"example {i} has {len(e.attributes)} attributes, "
                    f"schema declares {self.n_attributes}"
                )

    def __len__(self) -> int:
        return len(self.examples)

    def __iter__(self) -> Iterator[Example]:
        return iter(self.examples)

    @property
    def positives(self) -> int:
        return sum(e.label for e in self.examples)

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[float]], labels: Iterable[int]) -> Dataset:
        examples = [Example(tuple(float(v) for v in r), int(y)) for r, y in zip(rows, labels)]
        m = len(examples[0].attributes) if examples else 1
        return cls(m, examples)


@dataclass(eq=False)
class Node:
    label: int | None = None
    origin: str = ORIGINAL
    attr: int | None = None
    thr: float | None = None
    left: Node | None = None
    right: Node | None = None
    total: int = 0
    pos: int = 0
    train_label: int | None = None

    @classmethod
    def leaf(cls, label: int, *, origin: str = ORIGINAL, train_label: int | None = None) -> Node:
        return cls(label=label, origin=origin, train_label=train_label)

    @classmethod
    def split(cls, attr: int, thr: float, left: Node, right: Node, *, train_label: int | None = None) -> Node:
        return cls(attr=attr, thr=thr, left=left, right=right, train_label=train_label)

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    @property
    def neg(self) -> int:
        return self.total - self.pos

    def goes_left(self, example: Example) -> bool:
        try:
            return example.attributes[self.attr] < self.thr
        except IndexError:
            raise SchemaError(
                f"test uses attribute {self.attr} but example has "
                f"{len(example.attributes)} attributes"
            ) from None


class DecisionTree:
    """A rooted full binary tree with preorder node ids."""

    def __init__(self, root: Node):
        self.root = root
        self._nodes: list[Node] | None = None

    @property
    def nodes(self) -> list[Node]:
        """Nodes in preorder; ``nodes[i]`` is the node with id ``i``."""
        if self._nodes is None:
            out, stack = [], [self.root]
            while stack:
                node = stack.pop()
                out.append(node)
                if not node.is_leaf:
                    stack.append(node.right)
                    stack.append(node.left)
            self._nodes = out
        return self._nodes

    def node(self, node_id: int) -> Node:
        return self.nodes[node_id]

    def id_of(self, node: Node) -> int:
        for i, n in enumerate(self.nodes):
            if n is node:
                return i
        raise KeyError("node does not belong to this tree")

    def ids(self) -> dict[int, int]:
        """Map ``id(node object) -> preorder id``."""
        return {id(n): i for i, n in enumerate(self.nodes)}

    def parents(self) -> list[int | None]:
        par: list[int | None] = [None] * len(self.nodes)
        ids = self.ids()
        for i, n in enumerate(self.nodes):
            if not n.is_leaf:
                par[ids[id(n.left)]] = i
                par[ids[id(n.right)]] = i
        return par

    def depths(self) -> list[int]:
        depth = [0] * len(self.nodes)
        ids = self.ids()
        for i, n in enumerate(self.nodes):
            if not n.is_leaf:
                depth[ids[id(n.left)]] = depth[i] + 1
                depth[ids[id(n.right)]] = depth[i] + 1
        return depth

    @property
    def size(self) -> int:
        return len(self.nodes)

    @property
    def leaf_count(self) -> int:
        return sum(1 for n in self.nodes if n.is_leaf)

    def internal_ids(self) -> list[int]:
        return [i for i, n in enumerate(self.nodes) if not n.is_leaf]

    def leaf_ids(self) -> list[int]:
        return [i for i, n in enumerate(self.nodes) if n.is_leaf]

    def postorder(self) -> list[int]:
        """Internal-node ids in postorder (children before parent, left first)."""
        ids = self.ids()
        out: list[int] = []

        def visit(node: Node):
            if node.is_leaf:
                return
            visit(node.left)
            visit(node.right)
            out.append(ids[id(node)])

        visit(self.root)
        return out

    def subtree_ids(self, node_id: int) -> list[int]:
        """Ids of the subtree rooted at ``node_id`` (preorder ids are contiguous)."""
        n_nodes = 2 * _leaf_count(self.node(node_id)) - 1
        return list(range(node_id, node_id + n_nodes))

    def copy(self) -> DecisionTree:
        return DecisionTree(_copy(self.root))

    def to_dict(self) -> dict:
        return _to_dict(self.root)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DecisionTree):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __repr__(self) -> str:
        return f"DecisionTree(size={self.size}, leaves={self.leaf_count})"


def _leaf_count(node: Node) -> int:
    if node.is_leaf:
        return 1
    return _leaf_count(node.left) + _leaf_count(node.right)


def _copy(node: Node) -> Node:
    new = Node(
        label=node.label,
        origin=node.origin,
        attr=node.attr,
        thr=node.thr,
        total=node.total,
        pos=node.pos,
        train_label=node.train_label,
    )
    if not node.is_leaf:
        new.left = _copy(node.left)
        new.right = _copy(node.right)
    return new


def majority_label(pos: int, total: int) -> int:
    # strict comparison: ties go to class 0
    return 1 if pos > total - pos else 0


def route(tree: DecisionTree, example: Example) -> int:
    """Id of the leaf that ``example`` reaches."""
    node = tree.root
    ids = tree.ids()
    while not node.is_leaf:
        node = node.left if node.goes_left(example) else node.right
    return ids[id(node)]


def classify_pass(tree: DecisionTree, pruning_set: Dataset | Iterable[Example]) -> DecisionTree:
    """Return a copy of ``tree`` whose counters count the routed pruning examples."""
    if any(n.total or n.pos for n in tree.nodes):
        raise ContractError("classify_pass needs a tree with all counters at zero")
    out = tree.copy()
    for e in pruning_set:
        node = out.root
        while True:
            node.total += 1
            node.pos += e.label
            if node.is_leaf:
                break
            node = node.left if node.goes_left(e) else node.right
    return out


def leaf_error(node: Node) -> int:
    """Errors of the best majority leaf that could replace ``node``."""
    return min(node.pos, node.total - node.pos)


def labeled_leaf_error(node: Node, label: int) -> int:
    return node.total - node.pos if label == 1 else node.pos


def subtree_error(node: Node | DecisionTree) -> int:
    """Pruning-set errors made by the leaves currently under ``node``."""
    if isinstance(node, DecisionTree):
        node = node.root
    if node.is_leaf:
        return labeled_leaf_error(node, node.label)
    return subtree_error(node.left) + subtree_error(node.right)


def is_antichain(tree: DecisionTree, selection: Iterable[int]) -> bool:
    chosen = set(selection)
    par = tree.parents()
    for s in chosen:
        p = par[s]
        while p is not None:
            if p in chosen:
                return False
            p = par[p]
    return True


def apply_pruning(tree: DecisionTree, selection: Iterable[int], labeling: str = PRUNING_MAJORITY) -> DecisionTree:
    """Replace every selected internal node by a leaf; ids refer to ``tree``."""
    chosen = set(selection)
    nodes = tree.nodes
    for s in chosen:
        if not 0 <= s < len(nodes):
            raise InvalidSelectionError(f"node id {s} out of range")
        if nodes[s].is_leaf:
            raise InvalidSelectionError(f"node {s} is a leaf and cannot be collapsed")
    if not is_antichain(tree, chosen):
        raise InvalidSelectionError("selection contains a node and one of its ancestors")
    if labeling not in (PRUNING_MAJORITY, TRAINING_MAJORITY):
        raise ValueError(f"unknown labeling {labeling!r}")

    ids = tree.ids()

    def build(node: Node) -> Node:
        if ids[id(node)] in chosen:
            if labeling == PRUNING_MAJORITY:
                label = majority_label(node.pos, node.total)
            else:
                if node.train_label is None:
                    raise ContractError(f"node {ids[id(node)]} has no train_label")
                label = node.train_label
            return Node(label=label, origin=PRUNED, total=node.total, pos=node.pos,
                        train_label=node.train_label)
        new = Node(label=node.label, origin=node.origin, attr=node.attr, thr=node.thr,
                   total=node.total, pos=node.pos, train_label=node.train_label)
        if not node.is_leaf:
            new.left = build(node.left)
            new.right = build(node.right)
        return new

    return DecisionTree(build(tree.root))


# -- serialization -----------------------------------------------------------

def _to_dict(node: Node) -> dict:
    if node.is_leaf:
        d: dict = {"leaf": {"label": node.label, "origin": node.origin}}
    else:
        d = {
            "test": {"attr": node.attr, "thr": node.thr},
            "left": _to_dict(node.left),
            "right": _to_dict(node.right),
        }
    if node.train_label is not None:
        d["train_label"] = node.train_label
    if node.total or node.pos:
        d["total"] = node.total
        d["pos"] = node.pos
    return d


def _label(value, where: str) -> int:
    if isinstance(value, bool) or value not in (0, 1):
        raise TreeParseError(f"expected label 0 or 1, got {value!r}", where)
    return int(value)


def _count(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < 0:
        raise TreeParseError(f"expected a non-negative integer, got {value!r}", where)
    return value


def _from_dict(d, where: str = "$") -> Node:
    if not isinstance(d, dict):
        raise TreeParseError("node must be an object", where)
    if "leaf" in d:
        extra = {"test", "left", "right"} & d.keys()
        if extra:
            raise TreeParseError(f"leaf node has internal fields {sorted(extra)}", where)
        leaf = d["leaf"]
        if not isinstance(leaf, dict) or "label" not in leaf:
            raise TreeParseError("leaf needs a label", where + ".leaf")
        origin = leaf.get("origin", ORIGINAL)
        if origin not in (ORIGINAL, PRUNED):
            raise TreeParseError(f"unknown origin {origin!r}", where + ".leaf.origin")
        node = Node(label=_label(leaf["label"], where + ".leaf.label"), origin=origin)
    elif "test" in d:
        for side in ("left", "right"):
            if side not in d:
                raise TreeParseError(f"internal node is missing its {side} child", where)
        test = d["test"]
        if not isinstance(test, dict) or "attr" not in test or "thr" not in test:
            raise TreeParseError("test needs attr and thr", where + ".test")
        attr = _count(test["attr"], where + ".test.attr")
        thr = test["thr"]
        if isinstance(thr, bool) or not isinstance(thr, (int, float)):
            raise TreeParseError(f"threshold must be a number, got {thr!r}", where + ".test.thr")
        node = Node(attr=attr, thr=float(thr),
                    left=_from_dict(d["left"], where + ".left"),
                    right=_from_dict(d["right"], where + ".right"))
    else:
        raise TreeParseError("node is neither a leaf nor a test", where)
    if "train_label" in d and d["train_label"] is not None:
        node.train_label = _label(d["train_label"], where + ".train_label")
    node.total = _count(d.get("total", 0), where + ".total")
    node.pos = _count(d.get("pos", 0), where + ".pos")
    if node.pos > node.total:
        raise TreeParseError(f"pos {node.pos} exceeds total {node.total}", where)
    return node


def serialize(tree: DecisionTree, indent: int | None = None) -> str:
    return json.dumps(tree.to_dict(), indent=indent, sort_keys=True)


def deserialize(text: str) -> DecisionTree:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TreeParseError(exc.msg, f"line {exc.lineno} column {exc.colno}") from None
    return DecisionTree(_from_dict(doc))


def dataset_to_csv(data: Dataset) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"a{i}" for i in range(data.n_attributes)] + ["label"])
    for e in data.examples:
        w.writerow([repr(float(a)) for a in e.attributes] + [e.label])
    return buf.getvalue()


def dataset_from_csv(text: str) -> Dataset:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise SchemaError("empty dataset file: missing header")
    header = [h.strip() for h in rows[0]]
    m = len(header) - 1
    expected = [f"a{i}" for i in range(m)] + ["label"]
    if header != expected:
        raise SchemaError(f"bad header {header}, expected {expected}")
    examples = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != m + 1:
            raise SchemaError(f"line {lineno}: expected {m + 1} fields, got {len(row)}")
        try:
            attrs = tuple(float(v) for v in row[:m])
            label = int(row[m])
        except ValueError as exc:
            raise SchemaError(f"line {lineno}: {exc}") from None
        examples.append(Example(attrs, label))
    return Dataset(m, examples)
