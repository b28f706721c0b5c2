import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import data, leaf, split
from replab.errors import ContractError, InvalidSelectionError, SchemaError, TreeParseError
from replab.experiments import random_instance
from replab.generators import make_rng
from replab.tree import (
    PRUNED,
    PRUNING_MAJORITY,
    TRAINING_MAJORITY,
    Dataset,
    DecisionTree,
    Example,
    apply_pruning,
    classify_pass,
    dataset_from_csv,
    dataset_to_csv,
    deserialize,
    leaf_error,
    route,
    serialize,
    subtree_error,
)


class TestRoute:
    def test_single_leaf(self):
        t = DecisionTree(leaf(1))
        assert route(t, Example((0.9,), 0)) == 0

    def test_left_of_threshold(self, stump):
        assert route(stump, Example((0.2,), 0)) == 1

    def test_threshold_value_goes_right(self, stump):
        assert route(stump, Example((0.5,), 0)) == 2

    def test_depth2_hand_trace(self):
        # 0.3 < 0.5 -> left child; 0.3 >= 0.25 -> its right leaf (preorder id 3)
        t = DecisionTree(split(0.5, split(0.25, leaf(0), leaf(1)), leaf(0)))
        assert route(t, Example((0.3,), 0)) == 3

    def test_attribute_out_of_schema(self):
        t = DecisionTree(split(0.5, leaf(0), leaf(1), attr=3))
        with pytest.raises(SchemaError):
            route(t, Example((0.1,), 0))


class TestClassifyPass:
    def test_empty_set_keeps_zero_counters(self, depth2):
        out = classify_pass(depth2, data())
        assert all((n.total, n.pos) == (0, 0) for n in out.nodes)

    def test_single_leaf_counts_everything(self):
        out = classify_pass(DecisionTree(leaf(1)), data((0.1, 1), (0.2, 1), (0.3, 1), (0.4, 0), (0.5, 0)))
        assert (out.root.total, out.root.pos) == (5, 3)

    def test_input_not_mutated(self, stump):
        classify_pass(stump, data((0.1, 1)))
        assert stump.root.total == 0

    def test_nonzero_counters_rejected(self, stump):
        filled = classify_pass(stump, data((0.1, 1)))
        with pytest.raises(ContractError):
            classify_pass(filled, data((0.1, 1)))

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_counters_match_independent_routing(self, seed):
        tree, ds = random_instance(make_rng(seed), max_leaves=12, max_examples=40)
        out = classify_pass(tree, ds)
        # recount each node by routing every example separately and walking its path
        for nid, node in enumerate(out.nodes):
            sub = set(out.subtree_ids(nid))
            reached = [e for e in ds if route(out, e) in sub]
            assert node.total == len(reached)
            assert node.pos == sum(e.label for e in reached)
            if not node.is_leaf:
                assert node.total == node.left.total + node.right.total
                assert node.pos == node.left.pos + node.right.pos
        assert out.root.total == len(ds)

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_subtree_error_matches_per_example_errors(self, seed):
        tree, ds = random_instance(make_rng(seed), max_leaves=12, max_examples=40)
        out = classify_pass(tree, ds)
        direct = sum(out.node(route(out, e)).label != e.label for e in ds)
        assert subtree_error(out) == direct


class TestErrors:
    @pytest.mark.parametrize("total,pos,expected", [(10, 3, 3), (0, 0, 0), (8, 4, 4)])
    def test_leaf_error(self, total, pos, expected):
        n = leaf(0)
        n.total, n.pos = total, pos
        assert leaf_error(n) == expected

    def test_subtree_error_of_positive_leaf_counts_negatives(self):
        n = leaf(1)
        n.total, n.pos = 5, 3
        assert subtree_error(n) == 2

    def test_internal_over_perfect_leaves(self, stump):
        out = classify_pass(stump, data((0.1, 0), (0.2, 0), (0.7, 1)))
        assert subtree_error(out) == 0

    def test_divergence_instance_makes_three_errors(self):
        from replab.generators import gen_figure1_instance

        t, ds = gen_figure1_instance()
        assert subtree_error(classify_pass(t, ds)) == 3


class TestApplyPruning:
    def _root_counts(self, total, pos):
        t = DecisionTree(split(0.5, leaf(0), leaf(1)))
        t.root.total, t.root.pos = total, pos
        t.root.left.total, t.root.left.pos = total - pos, 0
        t.root.right.total, t.root.right.pos = pos, pos
        return t

    def test_empty_selection_is_identity(self, depth2):
        assert apply_pruning(depth2, set()) == depth2

    def test_strict_majority_positive(self):
        out = apply_pruning(self._root_counts(10, 6), {0})
        assert out.root.is_leaf and out.root.label == 1 and out.root.origin == PRUNED

    def test_tie_labels_negative(self):
        out = apply_pruning(self._root_counts(10, 5), {0})
        assert out.root.label == 0

    def test_training_labeling(self):
        t = self._root_counts(10, 6)
        t.root.train_label = 0
        assert apply_pruning(t, {0}, TRAINING_MAJORITY).root.label == 0

    def test_leaf_selection_rejected(self, stump):
        with pytest.raises(InvalidSelectionError):
            apply_pruning(stump, {1})

    def test_non_antichain_rejected(self, depth2):
        with pytest.raises(InvalidSelectionError):
            apply_pruning(depth2, {0, 1})

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_full_binary_identity_survives(self, seed):
        rng = make_rng(seed)
        tree, ds = random_instance(rng, max_leaves=12, max_examples=30)
        t = classify_pass(tree, ds)
        assert t.size == 2 * t.leaf_count - 1
        internal = t.internal_ids()
        chosen = set()
        for i in rng.permutation(internal)[: rng.integers(0, len(internal) + 1)]:
            cand = chosen | {int(i)}
            try:
                apply_pruning(t, cand)
            except InvalidSelectionError:
                continue
            chosen = cand
        out = apply_pruning(t, chosen)
        assert out.size == 2 * out.leaf_count - 1
        if internal:
            root_only = apply_pruning(t, {0})
            assert subtree_error(root_only) == leaf_error(t.root)

    def test_tie_rule_is_error_neutral(self):
        # labeling a tied node 0 or 1 gives the same error
        for total in range(0, 12, 2):
            t = self._root_counts(total, total // 2)
            a = apply_pruning(t, {0}, PRUNING_MAJORITY)
            t.root.train_label = 1
            b = apply_pruning(t, {0}, TRAINING_MAJORITY)
            assert subtree_error(a) == subtree_error(b)


class TestSerialization:
    def test_round_trip_keeps_everything(self):
        tree, ds = random_instance(make_rng(5), max_leaves=9, max_examples=30)
        t = classify_pass(tree, ds)
        t = apply_pruning(t, {t.internal_ids()[-1]}) if t.internal_ids() else t
        back = deserialize(serialize(t))
        assert back == t
        for a, b in zip(back.nodes, t.nodes):
            assert (a.total, a.pos, a.label, a.origin, a.train_label) == (b.total, b.pos, b.label, b.origin, b.train_label)

    def test_single_leaf_document(self):
        assert json.loads(serialize(DecisionTree(leaf(1)))) == {"leaf": {"label": 1, "origin": "original"}}

    def test_missing_child_reports_location(self):
        doc = {"test": {"attr": 0, "thr": 0.5}, "left": {"test": {"attr": 0, "thr": 0.2}, "left": {"leaf": {"label": 0}}},
               "right": {"leaf": {"label": 1}}}
        with pytest.raises(TreeParseError) as exc:
            deserialize(json.dumps(doc))
        assert exc.value.location == "$.left"

    def test_bad_json_location(self):
        with pytest.raises(TreeParseError, match="line 1"):
            deserialize('{"leaf": ')

    def test_pos_above_total_rejected(self):
        with pytest.raises(TreeParseError):
            deserialize('{"leaf": {"label": 1}, "total": 1, "pos": 2}')

    def test_csv_round_trip(self):
        ds = Dataset(2, [Example((0.1, 0.25), 1), Example((1 / 3, 0.5), 0)])
        assert dataset_from_csv(dataset_to_csv(ds)) == ds

    def test_csv_header_checked(self):
        with pytest.raises(SchemaError):
            dataset_from_csv("x,label\n0.1,1\n")

    def test_dataset_schema_checked(self):
        with pytest.raises(SchemaError):
            Dataset(2, [Example((0.1,), 1)])
