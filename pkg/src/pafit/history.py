"""Growth histories and the sufficient statistics the likelihoods consume.

A growth history records, in arrival order, which existing node each
newcomer attached to, plus optional community memberships.  Every
estimator in this package works from statistics accumulated here; there
is deliberately no adjacency structure or graph traversal.

Conventions (used consistently everywhere):
  * node indices are 1-based and equal the arrival time of the node;
  * a self-loop contributes 2 to its node's degree, which is the only
    convention under which each growth step adds exactly 2 to the total
    degree and the attachment denominators telescope.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DataFormatError, LabelingError, ParameterError, StructuralError
from .fileio import atomic_write_text

__all__ = [
    "AttachEvent",
    "GrowthHistory",
    "DegreeCounts",
    "CommunityStats",
    "HpamParams",
    "BoParam",
    "degree_counts",
    "community_stats",
    "write_history_csv",
    "read_history_csv",
    "relabel",
    "strip_memberships",
]


@dataclass(frozen=True, slots=True)
class AttachEvent:
    """Arrival of one node: `node` attaches to `target` (== node for a self-loop)."""

    node: int
    target: int
    membership: int | None = None
    target_membership: int | None = None

    def __post_init__(self):
        if self.target > self.node or self.target < 1:
            raise StructuralError(
                f"event target {self.target} must lie in 1..{self.node}"
            )
        if (self.membership is None) != (self.target_membership is None):
            raise LabelingError(
                "membership and target_membership must be both present or both absent"
            )

    @property
    def is_self_loop(self) -> bool:
        return self.target == self.node


@dataclass(frozen=True)
class GrowthHistory:
    """Ordered record of attachment events; event k is the arrival of node k."""

    events: tuple[AttachEvent, ...]
    num_communities: int = 1

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))
        if self.num_communities < 1:
            raise ParameterError("num_communities must be >= 1")
        n = len(self.events)
        if n == 0:
            return
        if not self.events[0].is_self_loop:
            raise StructuralError("event 1 must be a self-loop")
        nodes = self.nodes
        if not np.array_equal(nodes, np.arange(1, n + 1)):
            raise StructuralError("event k must describe the arrival of node k")
        members = self.memberships
        if members is not None:
            if members.min() < 1 or members.max() > self.num_communities:
                raise LabelingError(
                    f"membership labels must lie in 1..{self.num_communities}"
                )
            targets = self.targets
            declared = np.fromiter(
                (ev.target_membership for ev in self.events), dtype=np.int64, count=n
            )
            if not np.array_equal(declared, members[targets - 1]):
                raise LabelingError(
                    "target_membership disagrees with the target node's membership"
                )

    @property
    def n(self) -> int:
        return len(self.events)

    @cached_property
    def nodes(self) -> np.ndarray:
        out = np.fromiter((ev.node for ev in self.events), dtype=np.int64, count=self.n)
        out.setflags(write=False)
        return out

    @cached_property
    def targets(self) -> np.ndarray:
        out = np.fromiter(
            (ev.target for ev in self.events), dtype=np.int64, count=self.n
        )
        out.setflags(write=False)
        return out

    @cached_property
    def memberships(self) -> np.ndarray | None:
        """Per-node community labels in arrival order, or None when unlabeled."""
        n = self.n
        if n == 0 or self.events[0].membership is None:
            for ev in self.events:
                if ev.membership is not None:
                    raise LabelingError("history mixes labeled and unlabeled events")
            return None
        labels = np.empty(n, dtype=np.int64)
        for i, ev in enumerate(self.events):
            if ev.membership is None:
                raise LabelingError("history mixes labeled and unlabeled events")
            labels[i] = ev.membership
        labels.setflags(write=False)
        return labels

    @property
    def labeled(self) -> bool:
        return self.n > 0 and self.events[0].membership is not None

    def degrees(self) -> np.ndarray:
        """Final degree of each node, index v-1; self-loops count 2."""
        n = self.n
        # node == target on self-loops, so each event adds 2 to the degree total
        deg = np.bincount(self.nodes, minlength=n + 1) + np.bincount(
            self.targets, minlength=n + 1
        )
        return deg[1:]


@dataclass(frozen=True)
class DegreeCounts:
    """Number of nodes per degree in the final graph, stored sparsely."""

    n: int
    counts: dict[int, int]

    def __post_init__(self):
        total = sum(self.counts.values())
        weighted = sum(k * c for k, c in self.counts.items())
        if total != self.n or weighted != 2 * self.n:
            raise StructuralError(
                f"degree counts violate sum identities: nodes {total} (want {self.n}), "
                f"degree total {weighted} (want {2 * self.n})"
            )

    @property
    def max_degree(self) -> int:
        return max(self.counts) if self.counts else 0

    def dense(self) -> np.ndarray:
        """Counts as an array indexed by degree, length max_degree + 1."""
        out = np.zeros(self.max_degree + 1, dtype=np.int64)
        for k, c in self.counts.items():
            out[k] = c
        return out

    def tail_counts(self) -> np.ndarray:
        """Array t with t[k] = number of nodes of degree > k, for k = 0..max_degree."""
        dense = self.dense()
        return self.n - np.cumsum(dense)


@dataclass(frozen=True)
class CommunityStats:
    """Community-level sufficient statistics of a labeled growth history.

    `T[j]` counts nodes in community j+1, `M[i, j]` counts edges between
    communities i+1 and j+1 (each edge once; `M` is stored symmetrically),
    and `N_path[k-1]` is the per-community degree-mass vector just before
    step k.  `memberships` (0-based) and `log_degree_factorials`
    (sum of log (d(v)-1)!) are carried so the exact likelihood can be
    evaluated from this object alone.
    """

    n: int
    K: int
    T: np.ndarray
    N_path: np.ndarray
    M: np.ndarray
    N_final: np.ndarray
    memberships: np.ndarray
    log_degree_factorials: float

    def __post_init__(self):
        for name in ("T", "N_path", "M", "N_final", "memberships"):
            getattr(self, name).setflags(write=False)


@dataclass(frozen=True)
class HpamParams:
    """Membership distribution pi and symmetric interaction matrix gamma.

    gamma is normalized by pinning gamma[0, 0] = 1; the attachment law is
    invariant under rescaling gamma, so this costs no generality.
    """

    pi: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        pi = np.asarray(self.pi, dtype=float)
        gamma = np.asarray(self.gamma, dtype=float)
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "gamma", gamma)
        K = pi.shape[0]
        if pi.ndim != 1 or K < 1:
            raise ParameterError("pi must be a 1-d probability vector")
        if np.any(pi <= 0.0) or abs(pi.sum() - 1.0) > 1e-9:
            raise ParameterError("pi entries must be positive and sum to 1")
        if gamma.shape != (K, K):
            raise ParameterError(f"gamma must be {K}x{K} to match pi")
        if np.any(gamma <= 0.0):
            raise ParameterError("gamma entries must be positive")
        if not np.allclose(gamma, gamma.T, rtol=0.0, atol=1e-12):
            raise ParameterError("gamma must be symmetric")
        if abs(gamma[0, 0] - 1.0) > 1e-12:
            raise ParameterError("gamma[0, 0] must equal 1 (normalization)")
        pi.setflags(write=False)
        gamma.setflags(write=False)

    @property
    def K(self) -> int:
        return self.pi.shape[0]

    def to_json_dict(self) -> dict:
        return {"pi": self.pi.tolist(), "gamma": self.gamma.tolist()}

    @classmethod
    def from_json_dict(cls, data: dict) -> "HpamParams":
        return cls(pi=np.asarray(data["pi"], float), gamma=np.asarray(data["gamma"], float))


@dataclass(frozen=True)
class BoParam:
    """Attachment parameter a restricted to the optimization domain [eps, max]."""

    a: float
    eps: float = 1e-3
    max: float = 100.0

    def __post_init__(self):
        if not 0.0 < self.eps < self.max:
            raise ParameterError("domain must satisfy 0 < eps < max")
        if not self.eps <= self.a <= self.max:
            raise ParameterError(f"a={self.a} outside domain [{self.eps}, {self.max}]")


def degree_counts(history: GrowthHistory) -> DegreeCounts:
    """Accumulate the degree multiset of the final graph."""
    deg = history.degrees()
    values, counts = np.unique(deg, return_counts=True)
    return DegreeCounts(
        n=history.n, counts={int(v): int(c) for v, c in zip(values, counts)}
    )


def community_stats(history: GrowthHistory) -> CommunityStats:
    """Forward-accumulate T, N, M from a fully labeled history."""
    if not history.labeled:
        raise LabelingError("community statistics require membership labels")
    n, K = history.n, history.num_communities
    members = history.memberships - 1
    targets = history.targets - 1
    T = np.zeros(K, dtype=np.int64)
    N = np.zeros(K, dtype=np.int64)
    M = np.zeros((K, K), dtype=np.int64)
    N_path = np.zeros((n, K), dtype=np.int64)
    for k in range(n):
        N_path[k] = N
        j = members[k]
        T[j] += 1
        if targets[k] == k:
            N[j] += 2
            M[j, j] += 1
        else:
            l = members[targets[k]]
            N[j] += 1
            N[l] += 1
            if j == l:
                M[j, j] += 1
            else:
                M[j, l] += 1
                M[l, j] += 1
    log_fact = log_degree_factorials(history.degrees())
    return CommunityStats(
        n=n,
        K=K,
        T=T,
        N_path=N_path,
        M=M,
        N_final=N.copy(),
        memberships=members.copy(),
        log_degree_factorials=log_fact,
    )


def log_degree_factorials(degrees: np.ndarray) -> float:
    """sum_v log (d(v) - 1)! via the exact identity sum_m Z_{>m} log m.

    Each integer factor appears once per node whose degree exceeds it, so
    the sum needs only logs of small integers; this keeps the absolute
    rounding error far below what lgamma on large arguments would give.
    """
    dense = np.bincount(degrees)
    if dense.shape[0] <= 3:  # max degree <= 2: every factorial is 1
        return 0.0
    tail = degrees.shape[0] - np.cumsum(dense)  # tail[m] = #{v: d_v > m}
    m = np.arange(2, dense.shape[0] - 1)  # log 1 = 0; tail vanishes at max degree
    return float(tail[2:-1] @ np.log(m))


def relabel(history: GrowthHistory, memberships, num_communities: int) -> GrowthHistory:
    """Return a copy of `history` carrying the given per-node labels (1-based)."""
    labels = np.asarray(memberships, dtype=np.int64)
    if labels.shape != (history.n,):
        raise LabelingError(f"need exactly {history.n} labels, got {labels.shape}")
    events = tuple(
        AttachEvent(
            node=ev.node,
            target=ev.target,
            membership=int(labels[ev.node - 1]),
            target_membership=int(labels[ev.target - 1]),
        )
        for ev in history.events
    )
    return GrowthHistory(events=events, num_communities=num_communities)


def strip_memberships(history: GrowthHistory) -> GrowthHistory:
    """Drop membership labels, keeping the attachment structure."""
    events = tuple(
        AttachEvent(node=ev.node, target=ev.target) for ev in history.events
    )
    return GrowthHistory(events=events, num_communities=1)


_CSV_HEADER = ["node", "target", "membership", "target_membership"]


def history_to_csv_text(history: GrowthHistory) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(_CSV_HEADER)
    for ev in history.events:
        writer.writerow(
            [
                ev.node,
                ev.target,
                "" if ev.membership is None else ev.membership,
                "" if ev.target_membership is None else ev.target_membership,
            ]
        )
    return buf.getvalue()


def write_history_csv(history: GrowthHistory, path) -> None:
    """Serialize to the `node,target,membership,target_membership` format."""
    atomic_write_text(path, history_to_csv_text(history))


def read_history_csv(path, num_communities: int | None = None) -> GrowthHistory:
    """Parse a history CSV; infers the community count from labels unless given."""
    events = []
    max_label = 0
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != _CSV_HEADER:
            raise DataFormatError(f"unexpected header {header!r}, want {_CSV_HEADER}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise DataFormatError(f"line {lineno}: expected 4 fields, got {len(row)}")
            try:
                node, target = int(row[0]), int(row[1])
                membership = int(row[2]) if row[2] != "" else None
                target_membership = int(row[3]) if row[3] != "" else None
            except ValueError as exc:
                raise DataFormatError(f"line {lineno}: {exc}") from None
            if membership is not None:
                max_label = max(max_label, membership, target_membership)
            events.append(
                AttachEvent(
                    node=node,
                    target=target,
                    membership=membership,
                    target_membership=target_membership,
                )
            )
    if num_communities is None:
        num_communities = max_label if max_label > 0 else 1
    return GrowthHistory(events=tuple(events), num_communities=num_communities)
