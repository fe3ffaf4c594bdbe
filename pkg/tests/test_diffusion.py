import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mfrb import CascadeSeeds, FeatureModel, Graph
from mfrb.diffusion import (
    NONE, POSITIVE, RUMOR, ExactOracle, InstanceTooLarge, evaluate_f_exact, evaluate_f_mc, mc_values,
    simulate_layer, spread_on, user_activation,
)
from mfrb.rng import stream

from conftest import A, B, C, D, small_instance

BACKENDS = ["compiled", "python"]


def test_flood_without_blocker(path4):
    fm = FeatureModel.cp([1.0], [1.0])
    out = simulate_layer(path4, fm, 0, CascadeSeeds.fully_active({A}, 1), stream(0))
    assert out.status.tolist() == [RUMOR] * 4


def test_positive_seed_blocks_chain(path4):
    fm = FeatureModel.cp([1.0], [1.0])
    out = simulate_layer(path4, fm, 0, CascadeSeeds.fully_active({A}, 1, {B}), stream(0))
    assert out.status.tolist() == [RUMOR, POSITIVE, POSITIVE, POSITIVE]


def test_diamond_with_seeded_blocker():
    # b is active from round 0, so its offer reaches d one round before the rumor via c
    g = Graph.from_edges(4, [(A, B), (A, C), (B, D), (C, D)])
    fm = FeatureModel.cp([1.0], [1.0])
    out = simulate_layer(g, fm, 0, CascadeSeeds.fully_active({A}, 1, {B}), stream(0))
    assert out.status.tolist() == [RUMOR, POSITIVE, RUMOR, POSITIVE]


def test_rumor_wins_same_round_tie():
    # a -> b -> d and e -> c -> d: both offers reach d in round 2
    E = 4
    g = Graph.from_edges(5, [(A, B), (B, D), (C, D), (E, C)])
    out = spread_on(g, [True] * 4, {A}, {E})
    assert out.status.tolist() == [RUMOR, RUMOR, POSITIVE, RUMOR, POSITIVE]
    # and on a single contested node in round 1
    g = Graph.from_edges(3, [(A, C), (B, C)])
    assert spread_on(g, [True, True], {A}, {B}).status[C] == RUMOR


def test_positive_arriving_first_wins():
    # b is positive one hop from d, the rumor needs two hops
    g = Graph.from_edges(5, [(A, C), (C, D), (B, D)])
    out = spread_on(g, [True] * 3, {A}, {B})
    assert out.status.tolist() == [RUMOR, POSITIVE, RUMOR, POSITIVE, NONE]


@pytest.mark.parametrize("backend", BACKENDS)
def test_path_mc_values_are_exact(path_instance, backend):
    g, fm, seeds = path_instance
    est = evaluate_f_mc(g, fm, seeds.with_positive({B}), 7, stream(1), backend)
    assert est.mean == pytest.approx(3.0, abs=1e-12)
    assert est.stderr == pytest.approx(0.0, abs=1e-12)
    assert evaluate_f_mc(g, fm, seeds, 5, stream(2), backend).mean == pytest.approx(1.8, abs=1e-12)


def test_no_rumor_gives_n():
    g = Graph.from_edges(6, [(0, 1), (1, 2), (3, 4)])
    fm = FeatureModel.cp([0.5, 0.7], [0.3, 0.7])
    seeds = CascadeSeeds(frozenset(), (frozenset(), frozenset()))
    assert evaluate_f_mc(g, fm, seeds, 50, stream(3)).mean == pytest.approx(6.0)
    assert evaluate_f_exact(g, fm, seeds) == pytest.approx(6.0)


def test_exact_matches_mc_on_deterministic(path_instance):
    g, fm, seeds = path_instance
    for pos in [(), (B,), (C,), (B, D)]:
        s = seeds.with_positive(pos)
        assert evaluate_f_exact(g, fm, s) == pytest.approx(evaluate_f_mc(g, fm, s, 3, stream(0)).mean, abs=1e-12)


def test_exact_single_edge():
    g = Graph.from_edges(2, [(A, B)])
    fm = FeatureModel.cp([0.3], [1.0])
    assert evaluate_f_exact(g, fm, CascadeSeeds.fully_active({A}, 1)) == pytest.approx(0.7)


def test_exact_path_of_three():
    g = Graph.from_edges(3, [(A, B), (B, C)])
    fm = FeatureModel.cp([0.5], [1.0])
    assert evaluate_f_exact(g, fm, CascadeSeeds.fully_active({A}, 1)) == pytest.approx(1.25)


def test_exact_guard():
    edges = [(u, v) for u in range(6) for v in range(6) if u != v][:23]
    g = Graph.from_edges(6, edges)
    with pytest.raises(InstanceTooLarge):
        evaluate_f_exact(g, FeatureModel.cp([0.5], [1.0]), CascadeSeeds.fully_active({0}, 1))


def test_user_activation():
    fm = FeatureModel.cp([0.1] * 3, [0.2, 0.5, 0.3])
    assert user_activation(fm, (0, 1, 1), 0.5)
    assert user_activation(fm, (1, 1, 1), 1.0)
    assert not user_activation(fm, (0, 0, 0), 0.1)


def test_seed_invariants():
    with pytest.raises(ValueError):
        CascadeSeeds(frozenset({0}), (frozenset({1}),))
    with pytest.raises(ValueError):
        CascadeSeeds.fully_active({0}, 1, {0})


def _reachable(g, live, sources):
    seen, todo = set(sources), list(sources)
    while todo:
        u = todo.pop()
        for v, e in g.out_adj(u):
            if live[e] and v not in seen:
                seen.add(v)
                todo.append(v)
    return seen


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=80, deadline=None)
def test_cascade_invariants(seed):
    rng = np.random.default_rng(seed)
    g, fm, seeds = small_instance(rng)
    free = [u for u in range(g.n) if u not in seeds.rumor_users]
    pos = set(int(u) for u in rng.choice(free, min(2, len(free)), replace=False))
    live = rng.random(g.m) < 0.6
    out = spread_on(g, live, seeds.rumor_layers[0], pos)
    st_ = out.status
    assert all(st_[u] == RUMOR for u in seeds.rumor_layers[0])
    assert all(st_[u] == POSITIVE for u in pos)
    # without positive seeds, rumor status is plain live-edge reachability
    plain = spread_on(g, live, seeds.rumor_layers[0], ())
    assert set(np.flatnonzero(plain.status == RUMOR).tolist()) == _reachable(g, live, seeds.rumor_layers[0])
    # anything active was reached from some seed; blocking never adds rumor nodes
    assert set(np.flatnonzero(st_ != NONE).tolist()) <= _reachable(g, live, seeds.rumor_layers[0] | pos)
    assert (st_ == RUMOR).sum() <= (plain.status == RUMOR).sum()


@pytest.mark.parametrize("seed", range(6))
def test_mc_converges_to_exact(seed):
    g, fm, seeds = small_instance(np.random.default_rng(100 + seed))
    free = [u for u in range(g.n) if u not in seeds.rumor_users]
    s = seeds.with_positive(free[:1])
    exact = evaluate_f_exact(g, fm, s)
    est = evaluate_f_mc(g, fm, s, 20000, stream(seed, 9))
    assert abs(est.mean - exact) <= 4 * est.stderr + 1e-9


@pytest.mark.parametrize("seed", range(8))
def test_exact_monotone_submodular(seed):
    g, fm, seeds = small_instance(np.random.default_rng(200 + seed), n_max=7)
    oracle = ExactOracle(g, fm, seeds.rumor_layers)
    free = [u for u in range(g.n) if u not in seeds.rumor_users]
    f = {S: oracle.f(S) for j in range(len(free) + 1) for S in itertools.combinations(free, j)}
    for S, val in f.items():
        for v in free:
            if v in S:
                continue
            gain = f[tuple(sorted(S + (v,)))] - val
            assert gain >= -1e-9
            for x in S:
                T = tuple(u for u in S if u != x)
                assert f[tuple(sorted(T + (v,)))] - f[T] >= gain - 1e-9


def test_mc_values_crn_and_backends(path_instance):
    g, fm, seeds = path_instance
    a = mc_values(g, fm, seeds, [-1, B, C, D], 4, stream(5), "compiled")
    b = mc_values(g, fm, seeds, [-1, B, C, D], 4, stream(5), "python")
    assert np.array_equal(a, b)
    assert np.allclose(a[:, 0], [1.8, 3.0, 0.8 + 1.8, 1.8 + 0.4])


def test_stochastic_backend_parity():
    g, fm, seeds = small_instance(np.random.default_rng(7))
    a = mc_values(g, fm, seeds, [-1, 0, 1], 300, stream(11), "compiled")
    b = mc_values(g, fm, seeds, [-1, 0, 1], 300, stream(11), "python")
    assert np.array_equal(a, b)
