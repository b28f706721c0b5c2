"""Seeded generators for trees, noise pruning sets and the occupancy experiments.

Randomness comes from numpy's PCG64 seeded through ``SeedSequence``.  A
stream is identified by ``(seed, index)``: the index goes into the
sequence's spawn key, so trial ``i`` of a campaign sees the same numbers no
matter which worker runs it or in which order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from replab.errors import SchemaError
from replab.structure import safe_nodes
from replab.tree import Dataset, DecisionTree, Example, Node, majority_label

ATTRIBUTE_UNIFORM = "attribute-uniform"
DIRECT = "direct"

Shape = tuple | None  # None is a leaf, (left, right) an internal node


def make_rng(seed: int, *index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=tuple(index))))


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return make_rng(int(seed))


@dataclass(frozen=True)
class NoiseModel:
    p: float
    routing: str = ATTRIBUTE_UNIFORM

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        if self.routing not in (ATTRIBUTE_UNIFORM, DIRECT):
            raise ValueError(f"unknown routing {self.routing!r}")


# -- tree shapes ---------------------------------------------------------------

@lru_cache(maxsize=None)
def _catalan(n: int) -> int:
    return math.comb(2 * n, n) // (n + 1)


def random_shape(internal_count: int, rng: np.random.Generator, bias: float = 0.0) -> Shape:
    """Full binary tree shape with ``internal_count`` internal nodes.

    With ``bias == 0`` every shape is equally likely.  Each node splits its
    remaining internal nodes as evenly as possible with probability ``bias``.
    """
    if internal_count == 0:
        return None
    rest = internal_count - 1
    if bias > 0 and rng.random() < bias:
        left = rest // 2 if rng.random() < 0.5 else rest - rest // 2
    else:
        total = _catalan(internal_count)
        weights = [float(Fraction(_catalan(i) * _catalan(rest - i), total)) for i in range(rest + 1)]
        left = int(rng.choice(rest + 1, p=np.asarray(weights) / sum(weights)))
    return (random_shape(left, rng, bias), random_shape(rest - left, rng, bias))


def shape_internal_count(shape: Shape) -> int:
    return 0 if shape is None else 1 + shape_internal_count(shape[0]) + shape_internal_count(shape[1])


def realize(shape: Shape, rng: np.random.Generator, n_attributes: int = 1) -> DecisionTree:
    """Attach random threshold tests and labels to a shape.

    Each test splits the node's box along a random attribute at a point in the
    middle half of the box, so every leaf region has positive volume.
    """

    def build(s: Shape, lo: list[float], hi: list[float]) -> Node:
        if s is None:
            return Node.leaf(int(rng.integers(2)), train_label=int(rng.integers(2)))
        a = int(rng.integers(n_attributes))
        thr = lo[a] + (hi[a] - lo[a]) * float(rng.uniform(0.25, 0.75))
        left_hi = hi.copy()
        left_hi[a] = thr
        right_lo = lo.copy()
        right_lo[a] = thr
        return Node.split(a, thr, build(s[0], lo, left_hi), build(s[1], right_lo, hi),
                          train_label=int(rng.integers(2)))

    return DecisionTree(build(shape, [0.0] * n_attributes, [1.0] * n_attributes))


def gen_random_tree(internal_count: int, seed=0, bias: float = 0.0, n_attributes: int = 1) -> DecisionTree:
    if internal_count < 0:
        raise ValueError("internal_count must be non-negative")
    rng = _as_rng(seed)
    return realize(random_shape(internal_count, rng, bias), rng, n_attributes)


def safe_node_shape(k: int, extra_internal: int, rng: np.random.Generator) -> Shape:
    """Shape whose safe set has exactly ``k`` nodes.

    The top part is a uniform shape with k - 1 internal nodes.  Each of its k
    leaf slots becomes a safe node: an internal node with one leaf child and,
    on the other side, a random subtree.  ``extra_internal`` internal nodes
    are spread over those subtrees at random.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    sizes = np.bincount(rng.integers(k, size=extra_internal), minlength=k) if extra_internal else [0] * k
    stubs = iter(int(s) for s in sizes)

    def stub() -> Shape:
        below = random_shape(next(stubs), rng)
        return (None, below) if rng.random() < 0.5 else (below, None)

    def fill(s: Shape) -> Shape:
        if s is None:
            return stub()
        return (fill(s[0]), fill(s[1]))

    return fill(random_shape(k - 1, rng))


def gen_safe_node_tree(k: int, extra_internal: int = 0, seed=0, n_attributes: int = 1) -> DecisionTree:
    rng = _as_rng(seed)
    return realize(safe_node_shape(k, extra_internal, rng), rng, n_attributes)


# -- pruning sets ----------------------------------------------------------------

def node_boxes(tree: DecisionTree, n_attributes: int) -> list[tuple[list[float], list[float]]]:
    """Axis-aligned region of [0, 1)^m routed to each node, indexed by node id."""
    boxes: list = [None] * tree.size
    ids = tree.ids()

    def walk(node: Node, lo: list[float], hi: list[float]):
        boxes[ids[id(node)]] = (lo, hi)
        if node.is_leaf:
            return
        if node.attr >= n_attributes:
            raise SchemaError(f"tree tests attribute {node.attr}, schema has {n_attributes}")
        left_hi = hi.copy()
        left_hi[node.attr] = min(hi[node.attr], node.thr)
        right_lo = lo.copy()
        right_lo[node.attr] = max(lo[node.attr], node.thr)
        walk(node.left, lo, left_hi)
        walk(node.right, right_lo, hi)

    walk(tree.root, [0.0] * n_attributes, [1.0] * n_attributes)
    return boxes


def tree_arity(tree: DecisionTree) -> int:
    return 1 + max((n.attr for n in tree.nodes if not n.is_leaf), default=0)


def gen_noise_pruning_set(tree: DecisionTree, model: NoiseModel, n: int, seed=0,
                          n_attributes: int | None = None) -> Dataset:
    """Pruning examples whose class is independent of the attributes.

    Attributes are drawn first: uniformly on [0, 1)^m, or (direct routing) by
    picking a safe node uniformly and a point uniformly inside its region.
    Labels are then drawn i.i.d. Bernoulli(p).
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = _as_rng(seed)
    m = n_attributes or tree_arity(tree)
    if model.routing == ATTRIBUTE_UNIFORM:
        x = rng.random((n, m))
    else:
        boxes = node_boxes(tree, m)
        safe = [s.node for s in safe_nodes(tree).safe]
        which = rng.integers(len(safe), size=n)
        lo = np.array([boxes[safe[w]][0] for w in which])
        hi = np.array([boxes[safe[w]][1] for w in which])
        # keep points strictly inside the half-open box despite rounding
        x = np.minimum(lo + (hi - lo) * rng.random((n, m)), np.nextafter(hi, lo))
    y = (rng.random(n) < model.p).astype(int)
    return Dataset(m, [Example(tuple(map(float, row)), int(lab)) for row, lab in zip(x, y)])


def gen_theorem6_sample(t: int, p: float, seed=0) -> Dataset:
    """t examples with one attribute uniform on [0, 1) and label ~ Bernoulli(p), all x distinct."""
    if t < 1:
        raise ValueError("t must be at least 1")
    rng = _as_rng(seed)
    x = rng.random(t)
    while len(np.unique(x)) < t:
        _, first = np.unique(x, return_index=True)
        dup = np.setdiff1d(np.arange(t), first)
        x[dup] = rng.random(len(dup))
    y = (rng.random(t) < p).astype(int)
    return Dataset(1, [Example((float(a),), int(b)) for a, b in zip(x, y)])


def class_alternations(labels) -> int:
    labels = np.asarray(labels)
    return int(np.count_nonzero(labels[1:] != labels[:-1]))


def minimal_consistent_threshold_tree(sample: Dataset) -> DecisionTree:
    """Zero-training-error tree on one attribute with one leaf per run of equal labels.

    Thresholds sit at the midpoint between neighbouring runs and the runs are
    split recursively in halves.  Each node's ``train_label`` is the majority
    class of the sample examples reaching it.
    """
    if sample.n_attributes != 1:
        raise SchemaError("threshold tree needs a one-attribute sample")
    if len(sample) == 0:
        return DecisionTree(Node.leaf(0, train_label=0))
    pts = sorted((e.attributes[0], e.label) for e in sample)
    xs = [x for x, _ in pts]
    if any(a == b for a, b in zip(xs, xs[1:])):
        raise SchemaError("duplicate attribute values; sample is not consistent-fittable")

    # runs: (first index, last index, label)
    runs = []
    start = 0
    for i in range(1, len(pts) + 1):
        if i == len(pts) or pts[i][1] != pts[start][1]:
            runs.append((start, i - 1, pts[start][1]))
            start = i

    def build(a: int, b: int) -> tuple[Node, int, int]:
        if a == b:
            s, e, lab = runs[a]
            return Node.leaf(lab, train_label=lab), e - s + 1, (e - s + 1) * lab
        mid = (a + b + 1) // 2
        thr = (xs[runs[mid - 1][1]] + xs[runs[mid][0]]) / 2
        left, nl, pl = build(a, mid - 1)
        right, nr, pr = build(mid, b)
        node = Node.split(0, thr, left, right, train_label=majority_label(pl + pr, nl + nr))
        return node, nl + nr, pl + pr

    return DecisionTree(build(0, len(runs) - 1)[0])


# -- balls in bins -----------------------------------------------------------------

@dataclass(frozen=True)
class Occupancy:
    counts: np.ndarray
    empty: int
    small: int | None


def balls_in_bins(m: int, h: int, seed=0, small_threshold: float | None = None) -> Occupancy:
    """Throw ``m`` balls into ``h`` bins; Z = empty bins, Q = bins holding at most the threshold."""
    if m < 0 or h < 1:
        raise ValueError("need m >= 0 and h >= 1")
    rng = _as_rng(seed)
    counts = np.bincount(rng.integers(h, size=m), minlength=h)
    small = None if small_threshold is None else int(np.count_nonzero(counts <= small_threshold))
    return Occupancy(counts, int(np.count_nonzero(counts == 0)), small)


# -- the leaf-labeling divergence instance ---------------------------------------------

# (negatives, positives) of the pruning examples per leaf, left to right, with
# the leaf's own label.  Smallest instance found by exhaustive search over
# leaf labels and counters in {0, 1, 2} (ordered by example count, then
# lexicographically) that meets all of:
#   * the unpruned tree errs 3 times on the pruning set
#   * the root as a training-labeled (negative) leaf errs 2 times
#   * the left subtree errs once; as a negative leaf it would err twice
#   * the right subtree as a positive leaf would err more than it does now
#   * with pruning-majority labels both subtrees become zero-error leaves and
#     the root is kept
FIGURE1_LEAVES = ((0, 0, 1), (1, 0, 1), (0, 1, 0), (1, 2, 0))  # (label, neg, pos)
FIGURE1_TRAIN_LABELS = {"root": 0, "left": 0, "right": 1}
FIGURE1_THRESHOLDS = {"root": 0.5, "left": 0.25, "right": 0.75}


def figure1_tree(leaves=FIGURE1_LEAVES) -> DecisionTree:
    lab = [Node.leaf(label, train_label=label) for label, _, _ in leaves]
    left = Node.split(0, FIGURE1_THRESHOLDS["left"], lab[0], lab[1], train_label=FIGURE1_TRAIN_LABELS["left"])
    right = Node.split(0, FIGURE1_THRESHOLDS["right"], lab[2], lab[3], train_label=FIGURE1_TRAIN_LABELS["right"])
    return DecisionTree(Node.split(0, FIGURE1_THRESHOLDS["root"], left, right,
                                   train_label=FIGURE1_TRAIN_LABELS["root"]))


def gen_figure1_instance() -> tuple[DecisionTree, Dataset]:
    """Small tree on which training-majority and pruning-majority labeling disagree."""
    cells = [(0.0, 0.25), (0.25, 0.5), (0.5, 0.75), (0.75, 1.0)]
    examples = []
    for (lo, hi), (_, neg, pos) in zip(cells, FIGURE1_LEAVES):
        cnt = neg + pos
        xs = [lo + (hi - lo) * (j + 1) / (cnt + 1) for j in range(cnt)]
        examples += [Example((x,), 0) for x in xs[:neg]]
        examples += [Example((x,), 1) for x in xs[neg:]]
    return figure1_tree(), Dataset(1, examples)
