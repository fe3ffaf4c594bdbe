"""Directed graph storage, edge-list ingestion and per-feature edge probabilities.

Graphs are stored as two CSR adjacency structures (outgoing and incoming)
over dense node ids ``0..n-1``. Edge ids index the edge list sorted by
``(source, target)``, so the outgoing CSR is the edge list itself.

Feature layers are never materialised: layer ``i`` of the multi-feature
graph is the base graph with the probability row ``FeatureModel.edge_probs(g)[i]``.
Layers are numbered from 0.
"""

from __future__ import annotations

import io
import logging
import math
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

import numpy as np

log = logging.getLogger(__name__)

WEIGHT_TOL = 1e-9


class ParseError(ValueError):
    """Malformed edge-list input."""

    def __init__(self, lineno: int, line: str, reason: str):
        super().__init__(f"line {lineno}: {reason}: {line!r}")
        self.lineno = lineno


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable directed graph with indexed in/out adjacency.

    Attributes
    ----------
    src, dst : int32 arrays of length m, sorted by (src, dst); position is the edge id.
    out_ptr : int64 array of length n+1; out edges of u are ids out_ptr[u]:out_ptr[u+1].
    in_ptr, in_src, in_eid : incoming CSR; in_src holds sources, in_eid edge ids.
    labels : original node labels from the input file (identity when not remapped).
    """

    n: int
    src: np.ndarray
    dst: np.ndarray
    out_ptr: np.ndarray
    in_ptr: np.ndarray
    in_src: np.ndarray
    in_eid: np.ndarray
    labels: np.ndarray
    dropped_self_loops: int = 0
    dropped_duplicates: int = 0
    _label_index: dict = field(default=None, repr=False, compare=False)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], labels=None) -> "Graph":
        """Build from dense ``(u, v)`` pairs; self-loops and duplicates are dropped."""
        arr = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            raise ValueError(f"edge endpoint outside 0..{n - 1}")
        loops = arr[:, 0] == arr[:, 1]
        n_loops = int(loops.sum())
        arr = arr[~loops]
        before = len(arr)
        if before:
            arr = np.unique(arr, axis=0)  # lexicographic (u, v) order
        n_dup = before - len(arr)
        src = arr[:, 0].astype(np.int32)
        dst = arr[:, 1].astype(np.int32)
        out_ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=out_ptr[1:])
        order = np.lexsort((src, dst))
        in_ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(dst, minlength=n), out=in_ptr[1:])
        if labels is None:
            labels = np.arange(n, dtype=np.int64)
        return cls(
            n=n,
            src=src,
            dst=dst,
            out_ptr=out_ptr,
            in_ptr=in_ptr,
            in_src=src[order].copy(),
            in_eid=order.astype(np.int32),
            labels=np.asarray(labels, dtype=np.int64),
            dropped_self_loops=n_loops,
            dropped_duplicates=n_dup,
        )

    @property
    def m(self) -> int:
        return len(self.src)

    def out_degree(self) -> np.ndarray:
        return np.diff(self.out_ptr)

    def in_degree(self) -> np.ndarray:
        return np.diff(self.in_ptr)

    def out_adj(self, u: int) -> list[tuple[int, int]]:
        lo, hi = self.out_ptr[u], self.out_ptr[u + 1]
        return [(int(self.dst[e]), int(e)) for e in range(lo, hi)]

    def in_adj(self, v: int) -> list[tuple[int, int]]:
        lo, hi = self.in_ptr[v], self.in_ptr[v + 1]
        return [(int(self.in_src[j]), int(self.in_eid[j])) for j in range(lo, hi)]

    def node_of(self, label: int) -> int:
        """Dense id of an original input label."""
        idx = self._label_index
        if idx is None:
            idx = {int(lab): i for i, lab in enumerate(self.labels)}
            object.__setattr__(self, "_label_index", idx)
        try:
            return idx[int(label)]
        except KeyError:
            raise KeyError(f"unknown node label {label}") from None

    def symmetrized(self) -> "Graph":
        pairs = np.concatenate([np.stack([self.src, self.dst], 1), np.stack([self.dst, self.src], 1)])
        return Graph.from_edges(self.n, pairs.tolist(), labels=self.labels)

    def to_edge_list(self, use_labels: bool = True) -> str:
        """Canonical serialization: one ``u v`` line per edge, sorted by (u, v)."""
        src, dst = self.src, self.dst
        if use_labels:
            src, dst = self.labels[src], self.labels[dst]
            order = np.lexsort((dst, src))
            src, dst = src[order], dst[order]
        return "".join(f"{u} {v}\n" for u, v in zip(src.tolist(), dst.tolist()))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.src, other.src)
            and np.array_equal(self.dst, other.dst)
            and np.array_equal(self.labels, other.labels)
        )

    __hash__ = None


def parse_edge_list(stream: IO | bytes | str, remap: bool = True) -> Graph:
    """Read a whitespace-separated ``u v`` edge list.

    Lines starting with ``#`` or ``%`` and blank lines are skipped. Extra
    tokens after the first two are ignored (SNAP/networkrepository files
    often carry weights or timestamps). With ``remap`` the distinct labels are
    mapped in ascending order onto ``0..n-1``; otherwise ``n = 1 + max id``.
    """
    if isinstance(stream, (bytes, str)):
        stream = io.BytesIO(stream.encode() if isinstance(stream, str) else stream)
    pairs: list[tuple[int, int]] = []
    for lineno, raw in enumerate(stream, 1):
        line = raw.decode() if isinstance(raw, bytes) else raw
        line = line.strip()
        if not line or line[0] in "#%":
            continue
        tokens = line.split()
        if len(tokens) < 2:
            raise ParseError(lineno, line, "expected two node ids")
        try:
            u, v = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise ParseError(lineno, line, "node id is not an integer") from None
        if u < 0 or v < 0:
            raise ParseError(lineno, line, "negative node id")
        pairs.append((u, v))

    if not pairs:
        return Graph.from_edges(0, [])
    arr = np.asarray(pairs, dtype=np.int64)
    if remap:
        labels, dense = np.unique(arr, return_inverse=True)
        dense = dense.reshape(arr.shape)
    else:
        labels = np.arange(arr.max() + 1, dtype=np.int64)
        dense = arr
    g = Graph.from_edges(len(labels), dense.tolist(), labels=labels)
    if g.dropped_self_loops:
        log.warning("dropped %d self-loop(s)", g.dropped_self_loops)
    if g.dropped_duplicates:
        log.warning("dropped %d duplicate edge(s)", g.dropped_duplicates)
    return g


def load_graph(path, symmetrize: bool = False) -> Graph:
    with open(path, "rb") as fh:
        g = parse_edge_list(fh)
    return g.symmetrized() if symmetrize else g


def random_graph(n: int, m: int, seed: int = 0, skew: float = 0.7) -> Graph:
    """Directed graph with heavy-tailed degrees (Chung-Lu style), for desk-scale runs.

    Endpoints are drawn with probability proportional to ``rank**-skew``;
    self-loops and duplicates are rejected until ``m`` distinct edges exist.
    """
    if m > n * (n - 1):
        raise ValueError("too many edges for a simple digraph")
    rng = np.random.default_rng(seed)
    ranks = np.arange(1, n + 1, dtype=float)
    w_out = ranks ** -skew
    w_in = rng.permutation(w_out)
    w_out, w_in = w_out / w_out.sum(), w_in / w_in.sum()
    seen: set[tuple[int, int]] = set()
    while len(seen) < m:
        need = m - len(seen)
        us = rng.choice(n, size=2 * need, p=w_out)
        vs = rng.choice(n, size=2 * need, p=w_in)
        for u, v in zip(us.tolist(), vs.tolist()):
            if u != v and (u, v) not in seen:
                seen.add((u, v))
                if len(seen) == m:
                    break
    return Graph.from_edges(n, sorted(seen))


@dataclass(frozen=True)
class FeatureModel:
    """Feature count, global feature weights and the edge-probability scheme.

    ``scheme`` is ``"cp"`` (one constant probability per feature, in ``probs``)
    or ``"wc"`` (every layer uses ``1 / in_degree(target)``).
    """

    weights: tuple[float, ...]
    scheme: str = "cp"
    probs: tuple[float, ...] | None = None

    @classmethod
    def cp(cls, probs: Sequence[float], weights: Sequence[float]) -> "FeatureModel":
        return cls(tuple(float(w) for w in weights), "cp", tuple(float(p) for p in probs))

    @classmethod
    def wc(cls, weights: Sequence[float]) -> "FeatureModel":
        return cls(tuple(float(w) for w in weights), "wc", None)

    @property
    def r(self) -> int:
        return len(self.weights)

    @property
    def w_bar(self) -> float:
        return max(self.weights)

    def weight_array(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=np.float64)

    def edge_probs(self, graph: Graph) -> np.ndarray:
        """Dense ``(r, m)`` float64 table of per-layer edge probabilities."""
        if self.scheme == "cp":
            return np.repeat(np.asarray(self.probs, dtype=np.float64)[:, None], graph.m, axis=1)
        if self.scheme == "wc":
            row = 1.0 / graph.in_degree()[graph.dst].astype(np.float64)
            return np.repeat(row[None, :], self.r, axis=0)
        raise ValueError(f"unknown probability scheme {self.scheme!r}")


def edge_prob(graph: Graph, fm: FeatureModel, edge: int, layer: int) -> float:
    """Activation probability of ``edge`` in feature layer ``layer`` (0-based)."""
    if not 0 <= edge < graph.m:
        raise IndexError(f"edge id {edge} outside 0..{graph.m - 1}")
    if not 0 <= layer < fm.r:
        raise IndexError(f"layer {layer} outside 0..{fm.r - 1}")
    if fm.scheme == "cp":
        return fm.probs[layer]
    if fm.scheme == "wc":
        v = graph.dst[edge]
        return 1.0 / int(graph.in_ptr[v + 1] - graph.in_ptr[v])
    raise ValueError(f"unknown probability scheme {fm.scheme!r}")


def validate_feature_model(fm: FeatureModel) -> list[str]:
    """Return every violated constraint as a message; an empty list means valid."""
    problems = []
    if fm.r < 1:
        problems.append("at least one feature is required")
    bad = [i for i, w in enumerate(fm.weights) if not w > 0]
    if bad:
        problems.append(f"weights must be positive (features {bad})")
    total = math.fsum(fm.weights)
    if fm.r and abs(total - 1.0) > WEIGHT_TOL:
        problems.append(f"weights sum to {total:g}")
    if fm.scheme == "cp":
        if fm.probs is None or len(fm.probs) != fm.r:
            problems.append(f"cp scheme needs {fm.r} probabilities")
        else:
            bad = [i for i, p in enumerate(fm.probs) if not 0.0 <= p <= 1.0]
            if bad:
                problems.append(f"probabilities must lie in [0, 1] (features {bad})")
    elif fm.scheme != "wc":
        problems.append(f"unknown probability scheme {fm.scheme!r}")
    return problems
