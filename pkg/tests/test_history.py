"""Domain types, statistic accumulation, and CSV round-trips."""

import numpy as np
import pytest

from pafit.errors import LabelingError, ParameterError, StructuralError
from pafit.history import (
    AttachEvent,
    BoParam,
    GrowthHistory,
    HpamParams,
    community_stats,
    degree_counts,
    log_degree_factorials,
    read_history_csv,
    relabel,
    strip_memberships,
    write_history_csv,
)
from pafit.simulate import simulate_bo, simulate_hpam


def _history(pairs, labels=None, K=1):
    if labels is None:
        events = [AttachEvent(node=u, target=v) for u, v in pairs]
    else:
        events = [
            AttachEvent(
                node=u, target=v, membership=labels[u - 1], target_membership=labels[v - 1]
            )
            for u, v in pairs
        ]
    return GrowthHistory(events=tuple(events), num_communities=K)


PAPER_HPAM = HpamParams(pi=np.array([0.3, 0.7]), gamma=np.array([[1.0, 0.5], [0.5, 1.5]]))


class TestDegreeCounts:
    def test_single_self_loop(self):
        counts = degree_counts(_history([(1, 1)]))
        assert counts.counts == {2: 1}

    def test_one_attachment(self):
        counts = degree_counts(_history([(1, 1), (2, 1)]))
        assert counts.counts == {3: 1, 1: 1}

    def test_two_self_loops(self):
        counts = degree_counts(_history([(1, 1), (2, 2)]))
        assert counts.counts == {2: 2}

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_sum_identities_on_simulated(self, seed):
        history = simulate_bo(500, 0.8, seed)
        counts = degree_counts(history)
        assert sum(counts.counts.values()) == 500
        assert sum(k * c for k, c in counts.counts.items()) == 1000

    def test_tail_counts(self):
        counts = degree_counts(_history([(1, 1), (2, 1), (3, 1)]))
        # degrees: 4, 1, 1
        tail = counts.tail_counts()
        assert tail[0] == 3 and tail[1] == 1 and tail[3] == 1 and tail[4] == 0


class TestCommunityStats:
    def test_forced_first_step(self):
        h = _history([(1, 1)], labels=[1], K=2)
        stats = community_stats(h)
        assert stats.T.tolist() == [1, 0]
        assert stats.N_final.tolist() == [2, 0]
        assert stats.M[0, 0] == 1
        assert stats.N_path[0].tolist() == [0, 0]

    def test_one_cross_edge(self):
        h = _history([(1, 1), (2, 1)], labels=[1, 2], K=2)
        stats = community_stats(h)
        assert stats.T.tolist() == [1, 1]
        assert stats.N_final.tolist() == [3, 1]
        assert stats.M[0, 1] == 1 and stats.M[1, 0] == 1 and stats.M[0, 0] == 1

    @pytest.mark.parametrize("seed", [3, 4])
    def test_degree_sum_identity(self, seed):
        history = simulate_hpam(300, PAPER_HPAM, seed)
        stats = community_stats(history)
        assert stats.N_final.sum() == 2 * 300
        assert stats.N_path[-1].sum() <= 2 * 300
        # agreement with the degree-count view
        counts = degree_counts(history)
        assert stats.N_final.sum() == sum(k * c for k, c in counts.counts.items())
        # M sums to n over unordered pairs
        iu = np.triu_indices(2)
        assert stats.M[iu].sum() == 300
        assert stats.T.sum() == 300

    def test_n_path_monotone(self):
        history = simulate_hpam(100, PAPER_HPAM, 9)
        stats = community_stats(history)
        assert np.all(np.diff(stats.N_path, axis=0) >= 0)
        assert np.all(stats.N_path[0] == 0)

    def test_requires_labels(self):
        with pytest.raises(LabelingError):
            community_stats(_history([(1, 1), (2, 1)]))


class TestValidation:
    def test_target_above_node(self):
        with pytest.raises(StructuralError):
            AttachEvent(node=2, target=3)

    def test_membership_pairing(self):
        with pytest.raises(LabelingError):
            AttachEvent(node=2, target=1, membership=1)

    def test_event_one_must_self_loop(self):
        ev = [AttachEvent(node=1, target=1), AttachEvent(node=3, target=1)]
        with pytest.raises(StructuralError):
            GrowthHistory(events=tuple(ev))

    def test_label_out_of_range(self):
        with pytest.raises(LabelingError):
            _history([(1, 1), (2, 1)], labels=[1, 3], K=2)

    def test_target_membership_consistency(self):
        events = (
            AttachEvent(node=1, target=1, membership=1, target_membership=1),
            AttachEvent(node=2, target=1, membership=2, target_membership=2),
        )
        with pytest.raises(LabelingError):
            GrowthHistory(events=events, num_communities=2)

    def test_frozen(self):
        h = _history([(1, 1)])
        with pytest.raises(AttributeError):
            h.num_communities = 3


class TestHpamParams:
    def test_valid(self):
        assert PAPER_HPAM.K == 2

    @pytest.mark.parametrize(
        "pi,gamma",
        [
            ([0.5, 0.6], [[1.0, 0.5], [0.5, 1.0]]),  # pi does not sum to 1
            ([0.3, 0.7], [[1.0, 0.5], [0.4, 1.0]]),  # asymmetric
            ([0.3, 0.7], [[2.0, 0.5], [0.5, 1.0]]),  # gamma11 != 1
            ([0.3, 0.7], [[1.0, -0.5], [-0.5, 1.0]]),  # nonpositive
        ],
    )
    def test_invalid(self, pi, gamma):
        with pytest.raises(ParameterError):
            HpamParams(pi=np.array(pi), gamma=np.array(gamma))


class TestBoParam:
    def test_inside_domain(self):
        BoParam(a=0.5)

    def test_outside_domain(self):
        with pytest.raises(ParameterError):
            BoParam(a=0.5, eps=1.0, max=2.0)

    def test_bad_domain(self):
        with pytest.raises(ParameterError):
            BoParam(a=1.0, eps=2.0, max=1.0)


class TestCsvRoundTrip:
    def test_unlabeled(self, tmp_path):
        history = simulate_bo(200, 1.4, 5)
        path = tmp_path / "h.csv"
        write_history_csv(history, path)
        assert read_history_csv(path) == history

    def test_labeled(self, tmp_path):
        history = simulate_hpam(200, PAPER_HPAM, 6)
        path = tmp_path / "h.csv"
        write_history_csv(history, path)
        back = read_history_csv(path)
        assert back == history
        assert back.num_communities == 2

    def test_bad_header(self, tmp_path):
        path = tmp_path / "h.csv"
        path.write_text("a,b,c,d\n1,1,,\n")
        from pafit.errors import DataFormatError

        with pytest.raises(DataFormatError):
            read_history_csv(path)


class TestRelabel:
    def test_relabel_and_strip(self):
        history = simulate_bo(50, 1.0, 8)
        labels = np.tile([1, 2], 25)
        labeled = relabel(history, labels, 2)
        assert labeled.memberships.tolist() == labels.tolist()
        assert strip_memberships(labeled).events == history.events


class TestLogDegreeFactorials:
    @pytest.mark.parametrize("seed", [0, 5])
    def test_matches_lgamma(self, seed):
        from scipy.special import gammaln

        degrees = simulate_bo(400, 0.6, seed).degrees()
        exact = log_degree_factorials(degrees)
        assert exact == pytest.approx(float(gammaln(degrees).sum()), abs=1e-9)

    def test_all_small_degrees(self):
        assert log_degree_factorials(np.array([1, 2, 2, 1])) == 0.0
