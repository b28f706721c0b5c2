import pytest

from replab.tree import Dataset, DecisionTree, Example, Node


def leaf(label=0, **kw):
    return Node.leaf(label, **kw)


def split(thr, left, right, attr=0, **kw):
    return Node.split(attr, thr, left, right, **kw)


def data(*pairs, m=1):
    """Dataset from (x, label) pairs with a single attribute."""
    return Dataset(m, [Example((float(x),), y) for x, y in pairs])


@pytest.fixture
def stump():
    return DecisionTree(split(0.5, leaf(0), leaf(1)))


@pytest.fixture
def depth2():
    # complete tree: thresholds 0.5 at the root, 0.25 / 0.75 below
    return DecisionTree(split(0.5, split(0.25, leaf(0), leaf(1)), split(0.75, leaf(0), leaf(1))))
