"""Seeded samplers for the growth dynamics, exact step probabilities, and
an expected-degree-count recursion used as a simulation oracle.

All samplers are pure functions of (parameters, seed): the same seed gives
a bit-identical history on every platform.  Randomness comes from numpy's
PCG64 generator; experiment harnesses derive per-replication seeds with
`numpy.random.SeedSequence` so replications can run in any order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, StructuralError
from .history import AttachEvent, GrowthHistory, HpamParams
from .sumtree import CumulativeSumTree

__all__ = [
    "SimConfig",
    "simulate",
    "simulate_lcd",
    "simulate_bo",
    "simulate_hpam",
    "simulate_general_f",
    "step_probability",
    "history_log_probability",
    "expected_degree_counts_bo",
]

MODELS = ("lcd", "bo", "hpam", "general_f")


@dataclass(frozen=True)
class SimConfig:
    """Which dynamics to run, with the parameters the chosen model needs."""

    model: str
    n: int
    seed: int
    bo_a: float | None = None
    delta: float | None = None
    hpam: HpamParams | None = None

    def __post_init__(self):
        if self.model not in MODELS:
            raise ParameterError(f"unknown model {self.model!r}, want one of {MODELS}")
        if self.n < 1:
            raise ParameterError("n must be >= 1")
        if self.model in ("bo", "general_f"):
            if self.bo_a is None or self.bo_a <= 0.0:
                raise ParameterError("bo_a must be a positive real")
        if self.model == "general_f":
            if self.delta is None or self.delta <= 0.0:
                raise ParameterError("delta must be a positive real")
        if self.model == "hpam" and self.hpam is None:
            raise ParameterError("hpam model requires HpamParams")

    def to_json(self) -> str:
        return json.dumps(
            {
                "model": self.model,
                "n": self.n,
                "seed": self.seed,
                "bo_a": self.bo_a,
                "delta": self.delta,
                "hpam": None if self.hpam is None else self.hpam.to_json_dict(),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "SimConfig":
        data = json.loads(text)
        hpam = data.get("hpam")
        return cls(
            model=data["model"],
            n=int(data["n"]),
            seed=int(data["seed"]),
            bo_a=data.get("bo_a"),
            delta=data.get("delta"),
            hpam=None if hpam is None else HpamParams.from_json_dict(hpam),
        )


def _uniform_below(rng: np.random.Generator, limit: float) -> float:
    """Uniform draw on [0, limit), robust to the rare rounding onto `limit`."""
    r = rng.random() * limit
    return r if r < limit else float(np.nextafter(limit, 0.0))


def _events_from_arrays(nodes, targets) -> tuple[AttachEvent, ...]:
    return tuple(
        AttachEvent(node=int(u), target=int(v)) for u, v in zip(nodes, targets)
    )


def _simulate_bo_endpoints(n: int, a: float, rng: np.random.Generator) -> np.ndarray:
    """Targets for a >= 1 via the weight split d + a - 1 = (degree) + (a - 1).

    A degree-proportional pick is a uniform endpoint of the existing edge
    list; the constant part is a uniform node.  One uniform drives both the
    branch choice and the pick, so each step costs O(1).
    """
    targets = np.empty(n, dtype=np.int64)
    targets[0] = 1
    endpoints = np.empty(2 * n, dtype=np.int64)
    endpoints[0] = 1
    endpoints[1] = 1
    for i in range(1, n):  # i existing nodes; node i+1 arrives
        r = _uniform_below(rng, (a + 1.0) * i + a)
        if r < 2.0 * i:
            v = int(endpoints[int(r)])
        elif r < (a + 1.0) * i:
            v = int((r - 2.0 * i) / (a - 1.0)) + 1
            if v > i:
                v = i
        else:
            v = i + 1
        targets[i] = v
        endpoints[2 * i] = i + 1
        endpoints[2 * i + 1] = v
    return targets


def _simulate_bo_tree(n: int, a: float, rng: np.random.Generator) -> np.ndarray:
    """Targets for 0 < a < 1: per-node weights d + a - 1 > 0 in a sum tree."""
    targets = np.empty(n, dtype=np.int64)
    targets[0] = 1
    tree = CumulativeSumTree(n)
    tree.add(1, 1.0 + a)  # degree 2 after the opening self-loop
    for i in range(1, n):
        existing = tree.total()  # == (a + 1) * i
        r = _uniform_below(rng, existing + a)
        if r < existing:
            v = tree.find(r)
            tree.add(v, 1.0)
            tree.add(i + 1, a)  # new node arrives with degree 1
        else:
            v = i + 1
            tree.add(i + 1, 1.0 + a)
        targets[i] = v
    return targets


def simulate_bo(n: int, a: float, seed) -> GrowthHistory:
    """Grow n nodes under attachment weight d + a - 1 and self-loop weight a."""
    if n < 1:
        raise ParameterError("n must be >= 1")
    if a <= 0.0:
        raise ParameterError("a must be positive")
    rng = np.random.default_rng(seed)
    if a >= 1.0:
        targets = _simulate_bo_endpoints(n, a, rng)
    else:
        targets = _simulate_bo_tree(n, a, rng)
    return GrowthHistory(events=_events_from_arrays(np.arange(1, n + 1), targets))


def simulate_lcd(n: int, seed) -> GrowthHistory:
    """Degree-proportional growth with self-loop weight 1 (the a = 1 case)."""
    return simulate_bo(n, 1.0, seed)


def simulate_general_f(n: int, a: float, delta: float, seed) -> GrowthHistory:
    """Growth with attachment weight f(d) + a - 1 for f(d) = d**delta."""
    if n < 1:
        raise ParameterError("n must be >= 1")
    if a <= 0.0 or delta <= 0.0:
        raise ParameterError("a and delta must be positive")
    rng = np.random.default_rng(seed)
    targets = np.empty(n, dtype=np.int64)
    targets[0] = 1
    degrees = np.zeros(n + 1, dtype=np.int64)
    degrees[1] = 2
    tree = CumulativeSumTree(n)
    tree.add(1, 2.0**delta + a - 1.0)
    for i in range(1, n):
        existing = tree.total()
        r = _uniform_below(rng, existing + a)
        if r < existing:
            v = tree.find(r)
            d = degrees[v]
            tree.add(v, float((d + 1) ** delta - d**delta))
            degrees[v] = d + 1
            tree.add(i + 1, a)  # f(1) + a - 1 = a
            degrees[i + 1] = 1
        else:
            v = i + 1
            tree.add(i + 1, 2.0**delta + a - 1.0)
            degrees[i + 1] = 2
        targets[i] = v
    return GrowthHistory(events=_events_from_arrays(np.arange(1, n + 1), targets))


def simulate_hpam(n: int, params: HpamParams, seed) -> GrowthHistory:
    """Community-structured growth: node in community k attaches to v in
    community l with weight gamma[k, l] * d(v), self-loop weight gamma[k, k].

    Memberships are drawn i.i.d. from pi up front; node 1 always self-loops.
    """
    if n < 1:
        raise ParameterError("n must be >= 1")
    K = params.K
    gamma = params.gamma
    rng = np.random.default_rng(seed)
    members = rng.choice(K, size=n, p=params.pi)  # 0-based
    trees = [CumulativeSumTree(n) for _ in range(K)]
    mass = np.zeros(K)
    targets = np.empty(n, dtype=np.int64)
    targets[0] = 1
    trees[members[0]].add(1, 2.0)
    mass[members[0]] = 2.0
    for i in range(1, n):
        c = members[i]
        row = gamma[c]
        comm_weight = row * mass
        r = _uniform_below(rng, comm_weight.sum() + gamma[c, c])
        v = 0
        for l in range(K):
            if r < comm_weight[l]:
                v = trees[l].find(_scale_within(r, comm_weight[l], row[l], mass[l]))
                trees[l].add(v, 1.0)
                mass[l] += 1.0
                break
            r -= comm_weight[l]
        if v == 0:  # draw fell in the self-loop segment
            v = i + 1
            trees[c].add(i + 1, 2.0)
            mass[c] += 2.0
        else:
            trees[c].add(i + 1, 1.0)
            mass[c] += 1.0
        targets[i] = v
    labels = members + 1
    events = tuple(
        AttachEvent(
            node=i + 1,
            target=int(targets[i]),
            membership=int(labels[i]),
            target_membership=int(labels[targets[i] - 1]),
        )
        for i in range(n)
    )
    return GrowthHistory(events=events, num_communities=K)


def _scale_within(r: float, segment: float, weight: float, mass: float) -> float:
    """Map the residual draw r in [0, segment) onto [0, mass) for the tree."""
    scaled = r / weight
    return scaled if scaled < mass else float(np.nextafter(mass, 0.0))


def simulate(config: SimConfig) -> GrowthHistory:
    """Dispatch on config.model."""
    if config.model == "lcd":
        return simulate_lcd(config.n, config.seed)
    if config.model == "bo":
        return simulate_bo(config.n, config.bo_a, config.seed)
    if config.model == "hpam":
        return simulate_hpam(config.n, config.hpam, config.seed)
    return simulate_general_f(config.n, config.bo_a, config.delta, config.seed)


def _check_extension(prefix: GrowthHistory, event: AttachEvent) -> None:
    if event.node != prefix.n + 1:
        raise StructuralError(
            f"event node {event.node} does not extend a {prefix.n}-node prefix"
        )


def step_probability(
    prefix: GrowthHistory, event: AttachEvent, config: SimConfig
) -> float:
    """Exact conditional probability of `event` given the prefix.

    For the community model this includes the pi factor for the arriving
    node's membership.
    """
    _check_extension(prefix, event)
    i = prefix.n
    if config.model == "lcd":
        denom = 2.0 * i + 1.0
        if event.is_self_loop:
            return 1.0 / denom
        return prefix.degrees()[event.target - 1] / denom
    if config.model == "bo":
        a = config.bo_a
        denom = (a + 1.0) * i + a
        if event.is_self_loop:
            return a / denom
        return (prefix.degrees()[event.target - 1] + a - 1.0) / denom
    if config.model == "general_f":
        a, delta = config.bo_a, config.delta
        deg = prefix.degrees().astype(float)
        denom = float((deg**delta).sum()) + i * (a - 1.0) + a
        if event.is_self_loop:
            return a / denom
        return (deg[event.target - 1] ** delta + a - 1.0) / denom
    # hpam
    params = config.hpam
    if event.membership is None:
        raise StructuralError("community model events must carry memberships")
    c = event.membership - 1
    pi_factor = params.pi[c]
    if i == 0:
        return float(pi_factor)  # forced self-loop
    members = prefix.memberships
    if members is None:
        raise StructuralError("community model prefix must carry memberships")
    deg = prefix.degrees()
    mass = np.bincount(members - 1, weights=deg, minlength=params.K)
    row = params.gamma[c]
    denom = float(row @ mass) + params.gamma[c, c]
    if event.is_self_loop:
        return float(pi_factor * params.gamma[c, c] / denom)
    l = members[event.target - 1] - 1
    if event.target_membership is not None and event.target_membership - 1 != l:
        raise StructuralError("event target_membership disagrees with prefix labels")
    return float(pi_factor * params.gamma[c, l] * deg[event.target - 1] / denom)


def history_log_probability(history: GrowthHistory, config: SimConfig) -> float:
    """log of the exact probability of the whole history, in one forward pass."""
    n = history.n
    targets = history.targets
    degrees = np.zeros(n + 1, dtype=np.int64)
    terms = []  # per-step log probabilities, combined by exact summation
    if config.model in ("lcd", "bo"):
        a = 1.0 if config.model == "lcd" else config.bo_a
        for i in range(n):
            denom = (a + 1.0) * i + a
            v = targets[i]
            if v == i + 1:
                terms.append(math.log(a / denom))
                degrees[v] += 2
            else:
                terms.append(math.log((degrees[v] + a - 1.0) / denom))
                degrees[v] += 1
                degrees[i + 1] += 1
        return math.fsum(terms)
    if config.model == "general_f":
        a, delta = config.bo_a, config.delta
        ftotal = 0.0
        for i in range(n):
            denom = ftotal + i * (a - 1.0) + a
            v = targets[i]
            if v == i + 1:
                terms.append(math.log(a / denom))
                degrees[v] += 2
                ftotal += 2.0**delta
            else:
                d = degrees[v]
                terms.append(math.log((d**delta + a - 1.0) / denom))
                degrees[v] += 1
                degrees[i + 1] += 1
                ftotal += float((d + 1) ** delta - d**delta) + 1.0
        return math.fsum(terms)
    params = config.hpam
    members = history.memberships
    if members is None:
        raise StructuralError("community model history must carry memberships")
    members0 = members - 1
    gamma = params.gamma
    logpi = np.log(params.pi)
    mass = np.zeros(params.K)
    for i in range(n):
        c = members0[i]
        terms.append(logpi[c])
        v = targets[i]
        denom = float(gamma[c] @ mass) + gamma[c, c]
        if v == i + 1:
            terms.append(math.log(gamma[c, c] / denom))
            degrees[v] += 2
            mass[c] += 2.0
        else:
            l = members0[v - 1]
            terms.append(math.log(gamma[c, l] * degrees[v] / denom))
            degrees[v] += 1
            degrees[i + 1] += 1
            mass[c] += 1.0
            mass[l] += 1.0
    return math.fsum(terms)


def expected_degree_counts_bo(n: int, a: float) -> dict[int, float]:
    """Exact expected degree counts E Z_k^n via the one-step flow recursion.

    Starting from the single self-loop node, each arrival moves expected
    mass (k + a - 1) * N_k / ((a + 1) m + a) from degree k to k + 1, adds a
    degree-1 node unless the arrival self-loops, and adds a degree-2 node
    when it does.
    """
    if n < 1:
        raise ParameterError("n must be >= 1")
    if a <= 0.0:
        raise ParameterError("a must be positive")
    # index = degree, 1..n+1 used
    N = np.zeros(n + 2)
    N[2] = 1.0
    k = np.arange(n + 2, dtype=float)
    loss_weight = k + a - 1.0
    for m in range(1, n):
        denom = (a + 1.0) * m + a
        loss = loss_weight * N
        gain = np.zeros_like(N)
        gain[2:] = loss[1:-1]
        gain[1] += (a + 1.0) * m
        gain[2] += a
        N += (gain - loss) / denom
    return {deg: float(N[deg]) for deg in range(1, n + 2)}
