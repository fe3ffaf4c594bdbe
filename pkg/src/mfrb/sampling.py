"""Reverse sampling on the virtual multi-layer graph and coverage estimators.

A sample is drawn by picking one of the ``n * r`` feature nodes uniformly
and searching backwards over lazily flipped live edges, level by level,
until a level touches a rumor-accepted node (the accumulated levels are the
sample) or no level is left (the sample covers every user). A positive seed
set covers a sample when it hits it; ``n * r * W`` is an unbiased estimate
of the objective for non-empty seed sets.
"""

from __future__ import annotations

import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import BinaryIO, Callable, Iterable

import numpy as np

from . import _backend, _fallback
from .diffusion import CascadeSeeds
from .graph import FeatureModel, Graph
from .rng import stream

CHUNK = 2048


@dataclass(frozen=True)
class MultiSample:
    """One reverse sample: its layer, that layer's weight, and the protecting users."""

    layer: int
    weight: float
    users: frozenset
    is_full: bool = False

    def __len__(self) -> int:
        return len(self.users)


def covers(sample: MultiSample, positive: Iterable[int]) -> int:
    positive = set(positive)
    if sample.is_full:
        return int(bool(positive))
    return int(not sample.users.isdisjoint(positive))


def r_sampling(graph: Graph, root: int, rumor_layer: Iterable[int], is_live: Callable[[int], bool],
               layer: int = 0, weight: float = 1.0) -> MultiSample:
    """Reverse level search from ``root`` on the realization answered by ``is_live(edge)``."""
    rumor = np.zeros(graph.n, dtype=bool)
    rumor[list(rumor_layer)] = True
    users, full = _fallback.reverse_sample(
        graph.in_ptr.tolist(), graph.in_src.tolist(), graph.in_eid.tolist(),
        rumor.tolist(), root, is_live,
    )
    return MultiSample(layer, weight, frozenset(users), full)


def _batch(graph, fm, seeds, count, layer, rng, backend=None) -> "SamplePool":
    seeds.check(graph, fm)
    if graph.n < 1:
        raise ValueError("cannot sample an empty graph")
    k = _backend.get(backend)
    layers, full, offsets, users = k.sample_batch(
        graph.in_ptr, graph.in_src, graph.in_eid, fm.edge_probs(graph),
        seeds.rumor_flags(graph.n), int(count), int(layer), rng,
    )
    return SamplePool(graph.n, fm.weight_array(), layers, np.asarray(full, dtype=bool), offsets, users)


def single_sampling(graph: Graph, fm: FeatureModel, layer: int, seeds: CascadeSeeds,
                    rng: np.random.Generator, backend=None) -> MultiSample:
    """One sample rooted at a uniform feature node of ``layer``."""
    return _batch(graph, fm, seeds, 1, layer, rng, backend).sample(0)


def multi_sampling(graph: Graph, fm: FeatureModel, seeds: CascadeSeeds,
                   rng: np.random.Generator, backend=None) -> MultiSample:
    """One sample rooted at a uniform feature node of any layer."""
    return _batch(graph, fm, seeds, 1, -1, rng, backend).sample(0)


class SamplePool:
    """Ordered samples in flat CSR form.

    ``users[offsets[j]:offsets[j+1]]`` are the users of sample ``j``; full
    samples store no users.
    """

    def __init__(self, n: int, weights, layers, full, offsets, users):
        self.n = int(n)
        self.weights = np.asarray(weights, dtype=np.float64)
        self.layers = np.asarray(layers, dtype=np.int32)
        self.full = np.asarray(full, dtype=bool)
        self.offsets = np.asarray(offsets, dtype=np.int64)
        self.users = np.asarray(users, dtype=np.int32)
        self._index = None

    @classmethod
    def empty(cls, n: int, weights) -> "SamplePool":
        return cls(n, weights, np.empty(0, np.int32), np.empty(0, bool), np.zeros(1, np.int64), np.empty(0, np.int32))

    @classmethod
    def from_samples(cls, n: int, weights, samples: Iterable[MultiSample]) -> "SamplePool":
        samples = list(samples)
        layers = [s.layer for s in samples]
        full = [s.is_full for s in samples]
        users = [sorted(s.users) if not s.is_full else [] for s in samples]
        offsets = np.zeros(len(samples) + 1, dtype=np.int64)
        np.cumsum([len(u) for u in users], out=offsets[1:])
        flat = [u for us in users for u in us]
        return cls(n, weights, layers, full, offsets, flat)

    @classmethod
    def concat(cls, pools: list["SamplePool"]) -> "SamplePool":
        if not pools:
            raise ValueError("nothing to concatenate")
        first = pools[0]
        sizes = np.concatenate([np.diff(p.offsets) for p in pools])
        offsets = np.zeros(len(sizes) + 1, dtype=np.int64)
        np.cumsum(sizes, out=offsets[1:])
        return cls(
            first.n, first.weights,
            np.concatenate([p.layers for p in pools]),
            np.concatenate([p.full for p in pools]),
            offsets,
            np.concatenate([p.users for p in pools]),
        )

    def __len__(self) -> int:
        return len(self.layers)

    @property
    def total(self) -> int:
        return len(self.layers)

    @property
    def r(self) -> int:
        return len(self.weights)

    def head(self, count: int) -> "SamplePool":
        end = self.offsets[count]
        return SamplePool(self.n, self.weights, self.layers[:count], self.full[:count],
                          self.offsets[: count + 1], self.users[:end])

    def sample(self, j: int) -> MultiSample:
        lay = int(self.layers[j])
        us = self.users[self.offsets[j] : self.offsets[j + 1]]
        return MultiSample(lay, float(self.weights[lay]), frozenset(us.tolist()), bool(self.full[j]))

    def __iter__(self):
        return (self.sample(j) for j in range(len(self)))

    def layer_counts(self) -> np.ndarray:
        return np.bincount(self.layers, minlength=self.r)

    def sample_weights(self) -> np.ndarray:
        return self.weights[self.layers]

    def index(self) -> tuple[np.ndarray, np.ndarray]:
        """Inverted index as CSR: samples containing user ``u`` are ``ids[ptr[u]:ptr[u+1]]``."""
        if self._index is None:
            sample_of = np.repeat(np.arange(len(self), dtype=np.int64), np.diff(self.offsets))
            order = np.argsort(self.users, kind="stable")
            ptr = np.zeros(self.n + 1, dtype=np.int64)
            np.cumsum(np.bincount(self.users, minlength=self.n), out=ptr[1:])
            self._index = (ptr, sample_of[order])
        return self._index

    def samples_of(self, user: int) -> np.ndarray:
        ptr, ids = self.index()
        return ids[ptr[user] : ptr[user + 1]]

    def covered_mask(self, positive: Iterable[int]) -> np.ndarray:
        positive = sorted(set(int(u) for u in positive))
        covered = np.zeros(len(self), dtype=bool)
        if not positive:
            return covered
        covered |= self.full
        for u in positive:
            covered[self.samples_of(u)] = True
        return covered

    def coverage_values(self, positive: Iterable[int]) -> np.ndarray:
        """Per-sample contribution ``w(R_j) * x(S_p, R_j)``."""
        return np.where(self.covered_mask(positive), self.sample_weights(), 0.0)

    def estimate(self, positive: Iterable[int]) -> float:
        return estimate_W(self, positive)

    def dump(self, fh: BinaryIO) -> None:
        """Debug dump: u64 count, then per sample u16 layer, u8 full, u32 size, sorted u32 ids."""
        fh.write(struct.pack("<Q", len(self)))
        for j in range(len(self)):
            us = np.sort(self.users[self.offsets[j] : self.offsets[j + 1]]).astype("<u4")
            fh.write(struct.pack("<HBI", int(self.layers[j]), int(self.full[j]), len(us)))
            fh.write(us.tobytes())

    @classmethod
    def load(cls, fh: BinaryIO, n: int, weights) -> "SamplePool":
        (count,) = struct.unpack("<Q", fh.read(8))
        samples = []
        for _ in range(count):
            lay, full, size = struct.unpack("<HBI", fh.read(7))
            ids = np.frombuffer(fh.read(4 * size), dtype="<u4")
            samples.append(MultiSample(lay, float(weights[lay]), frozenset(ids.tolist()), bool(full)))
        return cls.from_samples(n, weights, samples)


def estimate_W(pool: SamplePool, positive: Iterable[int]) -> float:
    """Weighted fraction of samples covered by ``positive``."""
    if len(pool) == 0:
        raise ValueError("empty sample pool")
    return math.fsum(pool.coverage_values(positive).tolist()) / len(pool)


class SampleStream:
    """Deterministic, extendable sequence of samples.

    Chunk ``c`` (``CHUNK`` samples) is drawn from ``stream(seed, *key, c)``,
    so the first ``N`` samples never depend on how the stream was grown or on
    the number of worker threads.
    """

    def __init__(self, graph: Graph, fm: FeatureModel, seeds: CascadeSeeds, seed: int,
                 key: tuple[int, ...] = (), jobs: int = 1, backend=None):
        seeds.check(graph, fm)
        self.graph, self.fm, self.seeds = graph, fm, seeds
        self.seed, self.key = seed, tuple(key)
        self.jobs = max(1, int(jobs))
        self.backend = backend
        self._chunks: list[SamplePool] = []
        self._pool = SamplePool.empty(graph.n, fm.weight_array())

    def _chunk(self, c: int) -> SamplePool:
        return _batch(self.graph, self.fm, self.seeds, CHUNK, -1, stream(self.seed, *self.key, c), self.backend)

    def prefix(self, count: int) -> SamplePool:
        """The first ``count`` samples."""
        need = -(-count // CHUNK)
        if need > len(self._chunks):
            todo = range(len(self._chunks), need)
            if self.jobs > 1 and len(todo) > 1:
                with ThreadPoolExecutor(self.jobs) as ex:
                    self._chunks.extend(ex.map(self._chunk, todo))
            else:
                self._chunks.extend(self._chunk(c) for c in todo)
            self._pool = SamplePool.concat(self._chunks)
        return self._pool.head(count)

    def generated(self) -> int:
        return len(self._chunks) * CHUNK


def generate_pool(graph, fm, seeds, count, seed, key=(), jobs=1, backend=None) -> SamplePool:
    return SampleStream(graph, fm, seeds, seed, key, jobs, backend).prefix(count)
