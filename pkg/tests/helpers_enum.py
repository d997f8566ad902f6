"""Exhaustive enumeration helpers shared by the likelihood-oracle tests."""

import itertools

from pafit.history import AttachEvent, GrowthHistory


def target_sequences(n):
    """All attachment structures on n nodes: step k picks a target in 1..k."""
    return itertools.product(*[range(1, k + 1) for k in range(1, n + 1)])


def history_from_targets(targets, labels=None, K=1):
    if labels is None:
        events = tuple(
            AttachEvent(node=k + 1, target=t) for k, t in enumerate(targets)
        )
        return GrowthHistory(events=events, num_communities=K)
    events = tuple(
        AttachEvent(
            node=k + 1,
            target=t,
            membership=labels[k],
            target_membership=labels[t - 1],
        )
        for k, t in enumerate(targets)
    )
    return GrowthHistory(events=events, num_communities=K)


def all_unlabeled_histories(n):
    for targets in target_sequences(n):
        yield history_from_targets(targets)


def all_labeled_histories(n, K):
    for targets in target_sequences(n):
        for labels in itertools.product(range(1, K + 1), repeat=n):
            yield history_from_targets(targets, labels=labels, K=K)
