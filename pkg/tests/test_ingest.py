"""Transaction parsing, filtering, and growth-history construction."""

import numpy as np
import pytest

from pafit.errors import DataFormatError, ParameterError
from pafit.history import HpamParams, community_stats, degree_counts
from pafit.ingest import (
    LabelingRule,
    RawEdgeList,
    build_history,
    export_transactions,
    filter_addresses,
    parse_edges,
)
from pafit.simulate import simulate_hpam

PAPER = HpamParams(pi=np.array([0.3, 0.7]), gamma=np.array([[1.0, 0.5], [0.5, 1.5]]))


def _write(tmp_path, text, name="tx.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestParse:
    def test_three_rows_sorted(self, tmp_path):
        path = _write(
            tmp_path, "receiver,sender,timestamp\nb,a,5\nc,a,3\nd,b,4\n"
        )
        edges = parse_edges(path)
        assert len(edges) == 3
        assert [r[2] for r in edges.records] == [3, 4, 5]
        assert edges.n_reordered == 2  # rows 2 and 3 arrive behind row 1

    def test_missing_field_names_line(self, tmp_path):
        path = _write(tmp_path, "receiver,sender,timestamp\nb,a,5\nc,a\n")
        with pytest.raises(DataFormatError, match="line 3"):
            parse_edges(path)

    def test_bad_timestamp_names_line(self, tmp_path):
        path = _write(tmp_path, "receiver,sender,timestamp\nb,a,xyz\n")
        with pytest.raises(DataFormatError, match="line 2"):
            parse_edges(path)

    def test_empty_file(self, tmp_path):
        path = _write(tmp_path, "receiver,sender,timestamp\n")
        with pytest.raises(DataFormatError, match="no transaction records"):
            parse_edges(path)

    def test_stable_sort_keeps_equal_stamps_in_order(self, tmp_path):
        path = _write(
            tmp_path, "receiver,sender,timestamp\nb,a,1\nc,a,1\nd,a,1\n"
        )
        edges = parse_edges(path)
        assert [r[0] for r in edges.records] == ["b", "c", "d"]
        assert edges.n_reordered == 0


class TestFilter:
    def _edges(self):
        records = tuple(
            (f"u{i}", "1DiceXYZ" if i == 4 else f"v{i}", i) for i in range(10)
        )
        return RawEdgeList(records=records)

    def test_prefix_removal(self):
        filtered = filter_addresses(self._edges(), ["1Dice"])
        assert len(filtered) == 9
        assert filtered.n_blocked == 1

    def test_empty_blocklist_is_identity(self):
        edges = self._edges()
        assert filter_addresses(edges, []) is edges

    def test_all_blocked_warns(self):
        with pytest.warns(UserWarning, match="every record"):
            filtered = filter_addresses(self._edges(), ["u"])
        assert len(filtered) == 0


class TestBuildHistory:
    def test_rank_one_cutoff(self):
        # two records among three ids; q = 0.34 selects exactly the most active
        records = (("b", "a", 1), ("c", "a", 2))
        history, report = build_history(
            RawEdgeList(records=records), rule=LabelingRule(0.34)
        )
        assert history.n == 3
        labels = dict(zip(report.node_ids, history.memberships))
        assert labels["a"] == 1  # most active id is the lone super node
        assert labels["b"] == 2 and labels["c"] == 2

    def test_first_record_bootstraps_sender_self_loop(self):
        records = (("b", "a", 1),)
        history, report = build_history(RawEdgeList(records=records), rule=None)
        assert report.node_ids == ("a", "b")
        assert history.events[0].is_self_loop
        assert history.events[1].target == 1

    def test_drops_existing_pairs_and_self_refs(self):
        records = (
            ("b", "a", 1),
            ("a", "b", 2),  # both known: dropped
            ("b", "b", 3),  # self-reference on a known id: dropped
            ("c", "c", 4),  # self-reference introducing c: kept as self-loop
            ("d", "c", 5),
        )
        history, report = build_history(RawEdgeList(records=records), rule=None)
        assert report.dropped_existing_pair == 2
        assert history.n == 4
        assert history.events[2].is_self_loop  # c's arrival

    def test_n_limit_truncates_records(self):
        records = tuple((f"u{i}", "hub", i) for i in range(10))
        history, _ = build_history(RawEdgeList(records=records), n_limit=4, rule=None)
        # record 1 creates hub + u0; records 2..4 in window add one node each
        assert history.n == 5

    def test_n_limit_beyond_available_warns(self):
        records = (("b", "a", 1),)
        with pytest.warns(UserWarning, match="available"):
            history, report = build_history(
                RawEdgeList(records=records), n_limit=5, rule=None
            )
        assert report.truncated_to_available

    def test_empty_edges_rejected(self):
        with pytest.raises(DataFormatError):
            build_history(RawEdgeList(records=()), rule=None)

    def test_invariants_hold(self):
        rng = np.random.default_rng(0)
        ids = [f"n{i}" for i in range(30)]
        records = tuple(
            (ids[int(rng.integers(30))], ids[int(rng.integers(30))], t)
            for t in range(200)
        )
        history, _ = build_history(RawEdgeList(records=records), rule=LabelingRule(0.1))
        counts = degree_counts(history)
        assert sum(k * c for k, c in counts.counts.items()) == 2 * history.n

    def test_monotone_labeling_in_q(self):
        rng = np.random.default_rng(1)
        ids = [f"n{i}" for i in range(40)]
        records = tuple(
            (ids[int(rng.integers(40))], ids[int(rng.integers(40))], t)
            for t in range(300)
        )
        previous_supers = set()
        for q in (0.05, 0.2, 0.5, 0.8):
            history, report = build_history(
                RawEdgeList(records=records), rule=LabelingRule(q)
            )
            supers = {
                ident
                for ident, label in zip(report.node_ids, history.memberships)
                if label == 1
            }
            assert previous_supers <= supers
            previous_supers = supers

    def test_deterministic_tie_break(self):
        # equal activity: lexicographically smaller id wins the super slot
        records = (("b", "a", 1), ("d", "c", 2), ("f", "e", 3))
        history, report = build_history(
            RawEdgeList(records=records), rule=LabelingRule(0.34)
        )
        labels = dict(zip(report.node_ids, history.memberships))
        assert [ident for ident, lab in labels.items() if lab == 1] == ["a", "b"]

    def test_bad_rule(self):
        with pytest.raises(ParameterError):
            LabelingRule(1.5)
        with pytest.raises(ParameterError):
            LabelingRule(0.0)


class TestRoundTrip:
    def test_export_then_rebuild_reproduces_structure(self, tmp_path):
        history = simulate_hpam(300, PAPER, 77)
        path = tmp_path / "tx.csv"
        export_transactions(history, path)
        edges = parse_edges(path)
        rebuilt, report = build_history(edges, n_limit=300, rule=None)
        assert rebuilt.n == history.n
        assert np.array_equal(rebuilt.targets, history.targets)
        assert report.dropped_existing_pair == 0
        # arrival order of exported ids matches node numbering
        assert list(report.node_ids) == [f"n{k:08d}" for k in range(1, 301)]

    def test_rebuild_with_true_labels_recovers_statistics(self, tmp_path):
        from pafit.history import relabel

        history = simulate_hpam(200, PAPER, 5)
        path = tmp_path / "tx.csv"
        export_transactions(history, path)
        rebuilt, report = build_history(parse_edges(path), rule=None)
        index_of = {ident: i for i, ident in enumerate(report.node_ids)}
        labels = np.empty(200, dtype=int)
        for k in range(200):
            labels[index_of[f"n{k + 1:08d}"]] = history.memberships[k]
        relabeled = relabel(rebuilt, labels, 2)
        assert community_stats(relabeled).M.tolist() == community_stats(history).M.tolist()
