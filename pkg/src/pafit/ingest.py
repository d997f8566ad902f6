"""Build labeled growth histories from timestamped transaction edge lists.

Input rows are `receiver,sender,timestamp`.  The growth-model mapping is:
the arrival order of ids is their first appearance; a node's first
transaction becomes its single attachment event; later transactions
between two already-known ids are dropped (and counted), because the
likelihoods are defined only for one-edge-per-arrival histories.  When a
record introduces both of its ids at once, the sender arrives first with a
self-loop and the receiver attaches to it, matching the forced self-loop
that opens every history.

Node activity is the number of selected records mentioning the id; the
top fraction q by activity is labeled community 1 ("super" nodes), the
rest community 2, with ties broken by lexicographic id.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass

from .errors import DataFormatError, ParameterError
from .fileio import atomic_write_text
from .history import AttachEvent, GrowthHistory

__all__ = [
    "RawEdgeList",
    "LabelingRule",
    "IngestReport",
    "parse_edges",
    "filter_addresses",
    "build_history",
    "export_transactions",
]


@dataclass(frozen=True)
class RawEdgeList:
    """Timestamp-sorted transaction records plus bookkeeping counts."""

    records: tuple[tuple[str, str, int], ...]  # (receiver, sender, timestamp)
    n_reordered: int = 0
    n_blocked: int = 0

    def __len__(self) -> int:
        return len(self.records)


@dataclass(frozen=True)
class LabelingRule:
    """Label the top `top_fraction` of ids by transaction count as community 1."""

    top_fraction: float = 0.05

    def __post_init__(self):
        if not 0.0 < self.top_fraction < 1.0:
            raise ParameterError("top_fraction must lie strictly between 0 and 1")


@dataclass(frozen=True)
class IngestReport:
    dropped_existing_pair: int
    dropped_blocked: int
    reordered: int
    n_records_used: int
    node_ids: tuple[str, ...]
    truncated_to_available: bool

    def to_json_dict(self) -> dict:
        return {
            "dropped_existing_pair": self.dropped_existing_pair,
            "dropped_blocked": self.dropped_blocked,
            "reordered": self.reordered,
        }

    def write_json(self, path) -> None:
        atomic_write_text(path, json.dumps(self.to_json_dict(), indent=2) + "\n")


def parse_edges(path, format: str = "csv") -> RawEdgeList:
    """Read and timestamp-sort a `receiver,sender,timestamp` CSV."""
    if format != "csv":
        raise DataFormatError(f"unsupported format {format!r}")
    records = []
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None:
            raise DataFormatError("empty file: no header row")
        if [h.strip() for h in header] != ["receiver", "sender", "timestamp"]:
            raise DataFormatError(
                f"bad header {header!r}; want receiver,sender,timestamp"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3 or not row[0] or not row[1] or not row[2]:
                raise DataFormatError(f"line {lineno}: need 3 nonempty fields")
            try:
                ts = int(row[2])
            except ValueError:
                raise DataFormatError(
                    f"line {lineno}: timestamp {row[2]!r} is not an integer"
                ) from None
            records.append((row[0], row[1], ts))
    if not records:
        raise DataFormatError("no transaction records in file")
    running_max = -math.inf
    reordered = 0
    for _, _, ts in records:
        if ts < running_max:
            reordered += 1
        else:
            running_max = ts
    records.sort(key=lambda rec: rec[2])  # stable: equal stamps keep file order
    return RawEdgeList(records=tuple(records), n_reordered=reordered)


def filter_addresses(edges: RawEdgeList, prefix_blocklist) -> RawEdgeList:
    """Drop records where either endpoint starts with a blocked prefix."""
    prefixes = tuple(prefix_blocklist)
    if not prefixes:
        return edges
    kept = tuple(
        rec
        for rec in edges.records
        if not any(rec[0].startswith(p) or rec[1].startswith(p) for p in prefixes)
    )
    removed = len(edges.records) - len(kept)
    if kept == () and removed:
        warnings.warn("blocklist removed every record", stacklevel=2)
    return RawEdgeList(
        records=kept,
        n_reordered=edges.n_reordered,
        n_blocked=edges.n_blocked + removed,
    )


def build_history(
    edges: RawEdgeList,
    n_limit: int | None = None,
    rule: LabelingRule | None = LabelingRule(),
) -> tuple[GrowthHistory, IngestReport]:
    """Map the first `n_limit` records to a growth history.

    With a labeling rule the output carries K=2 memberships (1 = super);
    with `rule=None` it is unlabeled.  Returns the history together with a
    report carrying drop counts and the id of each node in arrival order.
    """
    if not edges.records:
        raise DataFormatError("no records to build from")
    truncated = False
    if n_limit is None:
        window = edges.records
    else:
        if n_limit < 1:
            raise ParameterError("n_limit must be >= 1")
        if n_limit > len(edges.records):
            warnings.warn(
                f"n_limit {n_limit} exceeds the {len(edges.records)} available "
                "records; using all of them",
                stacklevel=2,
            )
            truncated = True
        window = edges.records[:n_limit]

    arrival: dict[str, int] = {}
    order: list[str] = []
    structure: list[tuple[int, int]] = []  # (node, target)
    dropped_existing = 0

    def arrive(identity: str) -> int:
        index = len(order) + 1
        arrival[identity] = index
        order.append(identity)
        return index

    for receiver, sender, _ in window:
        known_r = receiver in arrival
        known_s = sender in arrival
        if receiver == sender:
            if known_r:
                dropped_existing += 1
            else:
                node = arrive(receiver)
                structure.append((node, node))
            continue
        if known_r and known_s:
            dropped_existing += 1
        elif known_s:
            structure.append((arrive(receiver), arrival[sender]))
        elif known_r:
            structure.append((arrive(sender), arrival[receiver]))
        else:
            # both ids are new: the sender opens with a self-loop, then the
            # receiver attaches to it (receiver is the later arrival)
            s_idx = arrive(sender)
            structure.append((s_idx, s_idx))
            structure.append((arrive(receiver), s_idx))

    if rule is None:
        events = tuple(AttachEvent(node=u, target=v) for u, v in structure)
        history = GrowthHistory(events=events, num_communities=1)
    else:
        activity: dict[str, int] = {}
        for receiver, sender, _ in window:
            activity[receiver] = activity.get(receiver, 0) + 1
            if sender != receiver:
                activity[sender] = activity.get(sender, 0) + 1
        ranked = sorted(order, key=lambda ident: (-activity.get(ident, 0), ident))
        n_super = int(rule.top_fraction * len(order))
        if n_super == 0:
            warnings.warn(
                "top fraction selects no super nodes at this size", stacklevel=2
            )
        supers = set(ranked[:n_super])
        label = {ident: (1 if ident in supers else 2) for ident in order}
        events = tuple(
            AttachEvent(
                node=u,
                target=v,
                membership=label[order[u - 1]],
                target_membership=label[order[v - 1]],
            )
            for u, v in structure
        )
        history = GrowthHistory(events=events, num_communities=2)

    report = IngestReport(
        dropped_existing_pair=dropped_existing,
        dropped_blocked=edges.n_blocked,
        reordered=edges.n_reordered,
        n_records_used=len(window),
        node_ids=tuple(order),
        truncated_to_available=truncated,
    )
    return history, report


def export_transactions(history: GrowthHistory, path=None) -> str:
    """Write a history as transaction rows; the inverse of `build_history`.

    Event k becomes `(receiver=id of node k, sender=id of target, timestamp=k)`
    so rebuilding from the output reproduces the structure exactly.
    """
    lines = ["receiver,sender,timestamp"]
    for ev in history.events:
        lines.append(f"n{ev.node:08d},n{ev.target:08d},{ev.node}")
    text = "\n".join(lines) + "\n"
    if path is not None:
        atomic_write_text(path, text)
    return text
