import numpy as np
import pytest

from mfrb import CascadeSeeds, FeatureModel, Graph

A, B, C, D = 0, 1, 2, 3


@pytest.fixture
def path4():
    """a -> b -> c -> d"""
    return Graph.from_edges(4, [(A, B), (B, C), (C, D)])


@pytest.fixture
def path_instance(path4):
    """Deterministic two-feature path: layer 0 floods (p=1), layer 1 is dead (p=0)."""
    fm = FeatureModel.cp([1.0, 0.0], [0.4, 0.6])
    seeds = CascadeSeeds.fully_active({A}, 2)
    return path4, fm, seeds


def small_instance(rng: np.random.Generator, n_max=10, m_max=8, r_max=2, partial=0.8):
    """Random guard-sized instance: (graph, feature model, seeds)."""
    n = int(rng.integers(4, n_max + 1))
    m = int(rng.integers(3, min(m_max, n * (n - 1)) + 1))
    edges = set()
    while len(edges) < m:
        u, v = (int(x) for x in rng.integers(0, n, 2))
        if u != v:
            edges.add((u, v))
    g = Graph.from_edges(n, sorted(edges))
    r = int(rng.integers(1, r_max + 1))
    w = rng.uniform(0.2, 1.0, r)
    w = tuple((w / w.sum()).tolist())
    probs = tuple(np.round(rng.uniform(0.2, 0.9, r), 2).tolist())
    fm = FeatureModel(w, "cp", probs)
    n_r = int(rng.integers(1, 3))
    rumor = sorted(int(x) for x in rng.choice(n, n_r, replace=False))
    layers = tuple(frozenset(u for u in rumor if rng.random() < partial) for _ in range(r))
    return g, fm, CascadeSeeds(frozenset(rumor), layers)


# ---- acceptance reporting ---------------------------------------------------------

_CRITERIA: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(num, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (rep.when != "call" and rep.passed):
        return
    num, title = mark.args
    detail = dict(item.user_properties).get("detail", "")
    prev = _CRITERIA.get(num)
    if prev is None or prev[0] == "PASS":
        _CRITERIA[num] = ("PASS" if rep.passed else "FAIL", title, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        status, title, detail = _CRITERIA[num]
        terminalreporter.write_line(f"C{num:<2d} {status}  {title}" + (f"  [{detail}]" if detail else ""))
