"""Sampling-based rumor blocking solver.

Pipeline: estimate a lower bound on the optimum with a doubling search over
a growing sample pool, size the final pool from that bound, draw a fresh
pool of that size, and run greedy weighted max-coverage on it.

All logarithms are natural except the iteration count, which is base 2.
The term written ``log C/δ`` in the bounds is read as ``log(C/δ)``.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .diffusion import CascadeSeeds
from .graph import FeatureModel, Graph
from .rng import SAMPLING_FINAL, SAMPLING_WORK
from .sampling import SamplePool, SampleStream, estimate_W

log = logging.getLogger(__name__)

ONE_MINUS_INV_E = 1.0 - 1.0 / math.e
TWO_MINUS_INV_E = 2.0 - 1.0 / math.e


def log_binomial(a: int, b: int) -> float:
    """Natural log of ``C(a, b)``."""
    if not 0 <= b <= a:
        raise ValueError(f"need 0 <= b <= a, got a={a}, b={b}")
    b = min(b, a - b)
    if b <= 1000:
        # direct product keeps full relative precision for large a
        return math.fsum(math.log((a - b + j) / j) for j in range(1, b + 1))
    return math.lgamma(a + 1) - math.lgamma(b + 1) - math.lgamma(a - b + 1)


def compute_lambda_prime(n: int, r: int, w_bar: float, eps_p: float, k: int, n_r: int, delta3: float) -> float:
    """Per-unit sample count used while searching for the lower bound."""
    nr = n * r
    log_term = log_binomial(n - n_r, k) + math.log(1.0 / delta3)
    return nr * (2.0 * w_bar + 2.0 / 3.0 * eps_p) * log_term / eps_p**2


def compute_lambda_star(n: int, r: int, w_bar: float, eps: float, k: int, n_r: int, ell: float) -> float:
    """Final pool size times the optimum value."""
    nr = n * r
    log_term = log_binomial(n - n_r, k) + math.log(2.0) + ell * math.log(n)
    return 2.0 * nr * w_bar * TWO_MINUS_INV_E * (TWO_MINUS_INV_E + eps / (3.0 * w_bar)) * log_term / eps**2


def theta_1(n, r, w_bar, eps1, delta1, opt) -> float:
    return 2.0 * n * r * w_bar * math.log(1.0 / delta1) / (eps1**2 * opt)


def theta_2(n, r, w_bar, eps2, delta2, k, n_r, opt) -> float:
    log_term = log_binomial(n - n_r, k) + math.log(1.0 / delta2)
    return (2.0 * w_bar + 2.0 / 3.0 * eps2) * n * r * log_term / (eps2**2 * opt)


@dataclass(frozen=True)
class SolverParams:
    """Budget ``k``, accuracy ``eps`` and confidence exponent ``ell`` (failure prob ``n**-ell``)."""

    k: int
    eps: float = 0.1
    ell: float = 1.0

    @property
    def eps_prime(self) -> float:
        return math.sqrt(2.0) * self.eps

    @property
    def eps1(self) -> float:
        return self.eps / TWO_MINUS_INV_E

    eps2 = eps1

    def delta1(self, n: int) -> float:
        return 1.0 / (2.0 * n**self.ell)

    delta2 = delta1

    def delta3(self, n: int, r: int) -> float:
        # log2(nr) is 0 for a single feature node; the search loop is empty then
        return 1.0 / (n**self.ell * max(math.log2(n * r), 1.0))

    def iterations(self, n: int, r: int) -> int:
        return max(math.ceil(math.log2(n * r)) - 1, 0) if n * r > 1 else 0

    def check(self, n: int, n_r: int) -> None:
        if self.k < 1:
            raise ValueError("budget k must be >= 1")
        if self.k > n - n_r:
            raise ValueError(f"budget k={self.k} exceeds the {n - n_r} non-rumor users")
        if not 0.0 < self.eps < 1.0:
            raise ValueError("eps must lie in (0, 1)")
        if not self.ell > 0:
            raise ValueError("ell must be positive")


@dataclass
class Solution:
    seeds: tuple
    w_estimate: float
    scaled_estimate: float
    pool_size: int
    lower_bound: float
    timings: dict = field(default_factory=dict)
    working_pool_size: int = 0
    pool: SamplePool | None = field(default=None, repr=False, compare=False)


@dataclass
class SamplingOutcome:
    pool: SamplePool
    lower_bound: float
    theta: int
    working_pool_size: int
    iterations: int
    found_bound: bool
    history: list = field(default_factory=list)


def node_selection(pool: SamplePool, k: int, forbidden=(), backend=None) -> tuple[tuple[int, ...], float]:
    """Greedy weighted max-coverage over ``pool``.

    Picks ``k`` users outside ``forbidden`` one at a time, each with the
    largest covered-weight gain (lowest id on ties). Returns the picks in
    order and ``W`` of the final set.
    """
    if len(pool) == 0:
        raise ValueError("empty sample pool")
    blocked = np.zeros(pool.n, dtype=np.uint8)
    forbidden = [int(u) for u in forbidden]
    if forbidden:
        blocked[forbidden] = 1
    if k > pool.n - int(blocked.sum()):
        raise ValueError(f"budget k={k} exceeds the {pool.n - int(blocked.sum())} selectable users")
    kern = _backend.get(backend)
    picks, total = kern.greedy_cover(pool.offsets, pool.users, pool.layers, pool.full.view(np.uint8), pool.weights,
                                     pool.n, int(k), blocked)
    return tuple(int(u) for u in picks), float(total) / len(pool)


def sampling_phase(graph: Graph, fm: FeatureModel, seeds: CascadeSeeds, params: SolverParams,
                   seed: int = 0, jobs: int = 1, backend=None) -> SamplingOutcome:
    """Lower-bound search followed by a freshly drawn final pool."""
    n, r, n_r = graph.n, fm.r, len(seeds.rumor_users)
    params.check(n, n_r)
    nr = n * r
    eps_p = params.eps_prime
    lam_p = compute_lambda_prime(n, r, fm.w_bar, eps_p, params.k, n_r, params.delta3(n, r))
    lam_s = compute_lambda_star(n, r, fm.w_bar, params.eps, params.k, n_r, params.ell)

    work = SampleStream(graph, fm, seeds, seed, (SAMPLING_WORK,), jobs, backend)
    pool = None
    lb = None
    last_estimate = 0.0
    history = []
    iters = params.iterations(n, r)
    i = 0
    for i in range(1, iters + 1):
        x_i = nr * 2.0**-i
        theta_i = lam_p / x_i
        # grow while |R| <= theta_i
        pool = work.prefix(math.floor(theta_i) + 1)
        picks, w = node_selection(pool, params.k, seeds.rumor_users, backend)
        last_estimate = nr * w
        history.append((i, x_i, len(pool), last_estimate))
        if last_estimate >= (1.0 + eps_p) * x_i:
            lb = last_estimate / (1.0 + eps_p)
            break
    found = lb is not None
    if not found:
        # every positive seed is worth exactly 1, so OPT >= k
        lb = max(float(params.k), last_estimate / (1.0 + eps_p))
        log.info("lower-bound search exhausted after %d iterations; LB=%g", iters, lb)

    theta = math.ceil(lam_s / lb)
    final = SampleStream(graph, fm, seeds, seed, (SAMPLING_FINAL,), jobs, backend).prefix(theta)
    return SamplingOutcome(final, lb, theta, len(pool) if pool is not None else 0, i, found, history)


def revised_imm(graph: Graph, fm: FeatureModel, seeds: CascadeSeeds, params: SolverParams,
                seed: int = 0, jobs: int = 1, backend=None) -> Solution:
    """Select ``params.k`` positive seeds maximising the expected rumor-free weight."""
    t0 = time.perf_counter()
    outcome = sampling_phase(graph, fm, seeds, params, seed, jobs, backend)
    t1 = time.perf_counter()
    picks, w = node_selection(outcome.pool, params.k, seeds.rumor_users, backend)
    t2 = time.perf_counter()
    return Solution(
        seeds=picks,
        w_estimate=w,
        scaled_estimate=graph.n * fm.r * w,
        pool_size=len(outcome.pool),
        lower_bound=outcome.lower_bound,
        timings={"sampling_s": t1 - t0, "selection_s": t2 - t1, "total_s": t2 - t0},
        working_pool_size=outcome.working_pool_size,
        pool=outcome.pool,
    )


def scaled_estimate(pool: SamplePool, positive) -> float:
    """``n * r * W`` for an arbitrary positive set."""
    return pool.n * pool.r * estimate_W(pool, positive)
