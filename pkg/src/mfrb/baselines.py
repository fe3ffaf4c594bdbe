"""Reference seed selectors: Monte-Carlo greedy, rumor-neighbour proximity, random."""

from __future__ import annotations

import time

import numpy as np

from .diffusion import CascadeSeeds, mc_values
from .graph import FeatureModel, Graph
from .rng import GREEDY, stream


def _check_budget(graph: Graph, seeds: CascadeSeeds, k: int) -> None:
    free = graph.n - len(seeds.rumor_users)
    if not 0 <= k <= free:
        raise ValueError(f"budget k={k} outside 0..{free}")


def greedy_mc(graph: Graph, fm: FeatureModel, seeds: CascadeSeeds, k: int, num: int = 2000,
              seed: int = 0, backend=None, times: list | None = None) -> tuple[int, ...]:
    """Plain greedy on Monte-Carlo marginal gains.

    Round ``t`` draws ``num`` realizations from ``stream(seed, GREEDY, t)``
    and scores every remaining candidate on all of them. The first ``j``
    picks of a run equal a run with budget ``j``. If ``times`` is given,
    the elapsed seconds after each pick are appended to it.
    """
    _check_budget(graph, seeds, k)
    t0 = time.perf_counter()
    chosen: list[int] = []
    excluded = set(seeds.rumor_users)
    for t in range(k):
        cands = np.array([u for u in range(graph.n) if u not in excluded], dtype=np.int32)
        base = seeds.with_positive(chosen)
        vals = mc_values(graph, fm, base, cands, num, stream(seed, GREEDY, t), backend)
        # same realizations for all candidates, so the base value cancels
        best = int(cands[np.argmax(vals.sum(axis=1))])
        chosen.append(best)
        excluded.add(best)
        if times is not None:
            times.append(time.perf_counter() - t0)
    return tuple(chosen)


def proximity(graph: Graph, seeds: CascadeSeeds, k: int) -> tuple[int, ...]:
    """Out-neighbours of rumor users by descending out-degree, topped up by global degree."""
    _check_budget(graph, seeds, k)
    deg = graph.out_degree()
    rumor = seeds.rumor_users
    near = {int(v) for u in rumor for v in graph.dst[graph.out_ptr[u] : graph.out_ptr[u + 1]]} - rumor
    picks = sorted(near, key=lambda v: (-deg[v], v))[:k]
    if len(picks) < k:
        taken = rumor | set(picks)
        rest = sorted((v for v in range(graph.n) if v not in taken), key=lambda v: (-deg[v], v))
        picks += rest[: k - len(picks)]
    return tuple(picks)


def random_baseline(graph: Graph, seeds: CascadeSeeds, k: int, rng: np.random.Generator) -> tuple[int, ...]:
    _check_budget(graph, seeds, k)
    pool = np.array([u for u in range(graph.n) if u not in seeds.rumor_users], dtype=np.int64)
    return tuple(int(u) for u in rng.choice(pool, size=k, replace=False))
