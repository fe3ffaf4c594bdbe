"""Compare the compiled kernels with the pure-Python fallback.

    python benchmarks/bench_kernels.py [--n 400] [--m 1200] [--repeat 3]

Each kernel is run on identical inputs and random streams under both
backends; the outputs are checked for equality before timings are shown.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from mfrb import CascadeSeeds, FeatureModel, _backend, random_graph
from mfrb.experiment import select_rumor_seeds
from mfrb.rng import stream


def best_of(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def same(a, b) -> bool:
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=400)
    ap.add_argument("--m", type=int, default=1200)
    ap.add_argument("--samples", type=int, default=20000)
    ap.add_argument("--runs", type=int, default=200)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    g = random_graph(args.n, args.m, seed=1)
    fm = FeatureModel.cp([0.4, 0.5], [0.3, 0.7])
    seeds = CascadeSeeds.fully_active(select_rumor_seeds(g, 20), 2)
    probs = fm.edge_probs(g)
    rumor = seeds.rumor_flags(g.n)
    compiled, python = _backend.get("compiled"), _backend.get("python")

    layers, full, offsets, users = compiled.sample_batch(g.in_ptr, g.in_src, g.in_eid, probs, rumor,
                                                         args.samples, -1, stream(0))
    cands = np.arange(g.n, dtype=np.int32)[rumor.max(axis=0) == 0][:50]
    forbidden = rumor.max(axis=0).astype(np.uint8)

    cases = {
        f"sample_batch ({args.samples} samples)": lambda k: k.sample_batch(
            g.in_ptr, g.in_src, g.in_eid, probs, rumor, args.samples, -1, stream(0)),
        f"simulate_batch ({len(cands)} candidates x {args.runs} runs)": lambda k: k.simulate_batch(
            g.out_ptr, g.dst, probs, rumor, seeds.positive_flags(g.n), cands, fm.weight_array(), args.runs, stream(1)),
        "greedy_cover (k=20)": lambda k: k.greedy_cover(
            offsets, users, layers, np.asarray(full, dtype=np.uint8), fm.weight_array(), g.n, 20, forbidden),
    }
    print(f"graph n={g.n} m={g.m}, best of {args.repeat}")
    print(f"{'kernel':48s} {'compiled':>10s} {'python':>10s} {'speedup':>8s}")
    for name, fn in cases.items():
        tc, oc = best_of(lambda: fn(compiled), args.repeat)
        tp, op = best_of(lambda: fn(python), max(1, args.repeat // 3))
        if not same(oc, op):
            raise SystemExit(f"{name}: backends disagree")
        print(f"{name:48s} {tc * 1e3:9.1f}ms {tp * 1e3:9.1f}ms {tp / tc:7.0f}x")


if __name__ == "__main__":
    main()
