"""Forward simulation of two competing cascades over the feature layers.

Each layer runs an independent competitive independent cascade on a shared
live-edge realization: a node first reached in round ``t`` takes the rumor
if any rumor-active in-neighbor reached it in that round, otherwise the
positive cascade. The expected objective ``f(S_p)`` is the expected weight
of users left untouched by the rumor, with each user's uniform threshold
integrated out: a user whose feature ``i`` escaped the rumor contributes
``w^i``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import _backend, _fallback
from .graph import FeatureModel, Graph

NONE, RUMOR, POSITIVE = 0, 1, 2

EXACT_GUARD = 22


class InstanceTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class CascadeSeeds:
    """Rumor users, the per-layer rumor-accepted subsets, and the positive seeds.

    Positive seeds are fully active: every one of their feature nodes starts
    with the positive cascade.
    """

    rumor_users: frozenset
    rumor_layers: tuple
    positive_users: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "rumor_users", frozenset(int(u) for u in self.rumor_users))
        object.__setattr__(self, "rumor_layers", tuple(frozenset(int(u) for u in s) for s in self.rumor_layers))
        object.__setattr__(self, "positive_users", frozenset(int(u) for u in self.positive_users))
        for i, layer in enumerate(self.rumor_layers):
            if not layer <= self.rumor_users:
                raise ValueError(f"layer {i} rumor set is not a subset of the rumor users")
        if self.rumor_users & self.positive_users:
            raise ValueError("positive seeds overlap the rumor users")

    @classmethod
    def fully_active(cls, rumor_users: Iterable[int], r: int, positive: Iterable[int] = ()) -> "CascadeSeeds":
        rumor = frozenset(rumor_users)
        return cls(rumor, (rumor,) * r, frozenset(positive))

    @property
    def r(self) -> int:
        return len(self.rumor_layers)

    def with_positive(self, positive: Iterable[int]) -> "CascadeSeeds":
        return CascadeSeeds(self.rumor_users, self.rumor_layers, frozenset(positive))

    def rumor_flags(self, n: int) -> np.ndarray:
        """``(r, n)`` uint8 indicator of rumor-accepted feature nodes."""
        flags = np.zeros((self.r, n), dtype=np.uint8)
        for i, layer in enumerate(self.rumor_layers):
            if layer:
                flags[i, sorted(layer)] = 1
        return flags

    def positive_flags(self, n: int) -> np.ndarray:
        flags = np.zeros(n, dtype=np.uint8)
        if self.positive_users:
            flags[sorted(self.positive_users)] = 1
        return flags

    def check(self, graph: Graph, fm: FeatureModel) -> None:
        if self.r != fm.r:
            raise ValueError(f"seeds describe {self.r} layers, feature model has {fm.r}")
        bad = [u for u in self.rumor_users | self.positive_users if not 0 <= u < graph.n]
        if bad:
            raise ValueError(f"seed ids outside 0..{graph.n - 1}: {sorted(bad)[:5]}")


@dataclass(frozen=True)
class LayerOutcome:
    """Terminal per-node status of one layer: NONE, RUMOR or POSITIVE."""

    status: np.ndarray

    def rumor_mask(self) -> np.ndarray:
        return self.status == RUMOR


@dataclass(frozen=True)
class MCEstimate:
    mean: float
    stderr: float
    num: int

    def __float__(self) -> float:
        return self.mean


def simulate_layer(graph: Graph, fm: FeatureModel, layer: int, seeds: CascadeSeeds,
                   rng: np.random.Generator) -> LayerOutcome:
    """One synchronous-round run of the competitive cascade in ``layer``."""
    probs = fm.edge_probs(graph)[layer]
    live = rng.random(graph.m) < probs
    return spread_on(graph, live, seeds.rumor_layers[layer], seeds.positive_users)


def spread_on(graph: Graph, live: Sequence[bool], rumor: Iterable[int], positive: Iterable[int]) -> LayerOutcome:
    """Deterministic competitive cascade on a fixed live-edge realization."""
    rumor_row = np.zeros(graph.n, dtype=bool)
    rumor_row[list(rumor)] = True
    status = _fallback.spread(graph.n, graph.out_ptr.tolist(), graph.dst.tolist(), list(live),
                              rumor_row.tolist(), set(positive))
    return LayerOutcome(np.asarray(status, dtype=np.int8))


def user_activation(fm: FeatureModel, accepted: Sequence[bool], theta: float) -> bool:
    """Whether a user with per-feature acceptance ``accepted`` clears threshold ``theta``."""
    return math.fsum(w for w, x in zip(fm.weights, accepted) if x) >= theta


def evaluate_f_mc(graph: Graph, fm: FeatureModel, seeds: CascadeSeeds, num: int,
                  rng: np.random.Generator, backend=None) -> MCEstimate:
    """Monte-Carlo estimate of the expected weight of rumor-free users.

    Consumes ``rng``; pass a dedicated stream (see :mod:`mfrb.rng`).
    """
    values = mc_values(graph, fm, seeds, [-1], num, rng, backend)[0]
    se = float(values.std(ddof=1) / math.sqrt(num)) if num > 1 else float("nan")
    return MCEstimate(float(values.mean()), se, num)


def mc_values(graph, fm, seeds, candidates, num, rng, backend=None) -> np.ndarray:
    """Per-run objective values for ``positive_users ∪ {c}`` for each candidate ``c``.

    All candidates see the same realizations (common random numbers).
    Candidate ``-1`` stands for the positive set alone. Shape ``(len(candidates), num)``.
    """
    if num < 1:
        raise ValueError("num must be >= 1")
    seeds.check(graph, fm)
    k = _backend.get(backend)
    return k.simulate_batch(
        graph.out_ptr, graph.dst, fm.edge_probs(graph), seeds.rumor_flags(graph.n),
        seeds.positive_flags(graph.n), np.asarray(candidates, dtype=np.int32),
        fm.weight_array(), int(num), rng,
    )


class ExactOracle:
    """Exact ``f`` by enumerating every live-edge realization of every layer.

    Edges with probability 0 or 1 are fixed rather than enumerated; the
    size guard still counts all ``r * m`` edge-layer pairs.
    """

    def __init__(self, graph: Graph, fm: FeatureModel, rumor_layers: Sequence[Iterable[int]]):
        if fm.r * graph.m > EXACT_GUARD:
            raise InstanceTooLarge(f"r*m = {fm.r * graph.m} exceeds the exact-oracle guard {EXACT_GUARD}")
        self.graph = graph
        self.weights = fm.weight_array()
        self.rumor = [np.isin(np.arange(graph.n), sorted(s)) for s in rumor_layers]
        probs = fm.edge_probs(graph)
        self.layers = []
        for row in probs:
            free = [e for e in range(graph.m) if 0.0 < row[e] < 1.0]
            combos = np.array(list(itertools.product((False, True), repeat=len(free))), dtype=bool)
            combos = combos.reshape(2 ** len(free), len(free))
            live = np.repeat((row >= 1.0)[None, :], len(combos), axis=0)
            live[:, free] = combos
            pr = np.ones(len(combos))
            for col, e in enumerate(free):
                pr *= np.where(combos[:, col], row[e], 1.0 - row[e])
            self.layers.append((live, pr))

    def layer_value(self, i: int, positive: Iterable[int]) -> float:
        """Expected number of layer-``i`` feature nodes not taken by the rumor."""
        g = self.graph
        live, pr = self.layers[i]
        R = len(pr)
        status = np.zeros((R, g.n), dtype=np.int8)
        pos = sorted(positive)
        status[:, pos] = POSITIVE
        status[:, self.rumor[i]] = RUMOR
        front_r = status == RUMOR
        front_p = status == POSITIVE
        while front_r.any() or front_p.any():
            offer_r = np.zeros_like(front_r)
            offer_p = np.zeros_like(front_p)
            for e in range(g.m):
                u, v = g.src[e], g.dst[e]
                offer_r[:, v] |= front_r[:, u] & live[:, e]
                offer_p[:, v] |= front_p[:, u] & live[:, e]
            fresh = status == NONE
            front_r = offer_r & fresh
            front_p = offer_p & ~offer_r & fresh
            status[front_r] = RUMOR
            status[front_p] = POSITIVE
        safe = (status != RUMOR).sum(axis=1)
        return float(pr @ safe)

    def f(self, positive: Iterable[int]) -> float:
        positive = list(positive)
        return math.fsum(w * self.layer_value(i, positive) for i, w in enumerate(self.weights))


def evaluate_f_exact(graph: Graph, fm: FeatureModel, seeds: CascadeSeeds) -> float:
    """Exact expected weight of rumor-free users (small instances only)."""
    seeds.check(graph, fm)
    return ExactOracle(graph, fm, seeds.rumor_layers).f(seeds.positive_users)
