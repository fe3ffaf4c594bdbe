"""Experiment protocol: rumor seeding, algorithm runs over budgets, CSV output."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import baselines
from .diffusion import CascadeSeeds, evaluate_f_mc
from .graph import FeatureModel, Graph, load_graph, validate_feature_model
from .rng import MC_EVAL, RANDOM_BASELINE, RUMOR, stream
from .solver import SolverParams, revised_imm

ALGORITHMS = ("revised-imm", "greedy", "proximity", "random")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    dataset: str = ""
    symmetrize: bool = False
    scheme: str = "cp"
    probs: tuple = (0.4, 0.5)
    weights: tuple = (0.3, 0.7)
    rumor_size: int = 20
    rumor_prob: float = 0.8
    budgets: tuple = tuple(range(1, 21))
    algorithms: tuple = ALGORITHMS
    eps: float = 0.1
    ell: float = 1.0
    mc_num: int = 2000
    seed: int = 0
    out: str = "results.csv"
    jobs: int = 1
    timings: bool = False

    def feature_model(self) -> FeatureModel:
        if self.scheme == "cp":
            return FeatureModel.cp(self.probs, self.weights)
        return FeatureModel.wc(self.weights)

    def validate(self, n: int | None = None) -> None:
        problems = []
        if self.scheme not in ("cp", "wc"):
            problems.append(f"scheme must be cp or wc, got {self.scheme!r}")
        else:
            problems += validate_feature_model(self.feature_model())
        if not 0.0 <= self.rumor_prob <= 1.0:
            problems.append("rumor probability must lie in [0, 1]")
        unknown = [a for a in self.algorithms if a not in ALGORITHMS]
        if unknown:
            problems.append(f"unknown algorithms {unknown}")
        if not 0.0 < self.eps < 1.0:
            problems.append("eps must lie in (0, 1)")
        if self.ell <= 0:
            problems.append("ell must be positive")
        if self.mc_num < 1:
            problems.append("mc-num must be >= 1")
        if self.rumor_size < 0:
            problems.append("rumor size must be >= 0")
        if n is not None:
            if self.rumor_size >= n:
                problems.append(f"rumor size {self.rumor_size} must be below n={n}")
            bad = [k for k in self.budgets if not 1 <= k <= n - self.rumor_size]
            if bad:
                problems.append(f"budgets {bad} outside 1..{n - self.rumor_size}")
        if problems:
            raise ConfigError("; ".join(problems))


@dataclass
class ReportRow:
    dataset: str
    scheme: str
    r: int
    algorithm: str
    k: int
    f_estimate: float
    estimator_value: float | None
    relative_error: float | None
    pool_size: int | None
    wall_time_ms: float | None
    rng_seed: int
    seeds: tuple = field(default=(), repr=False)


CSV_COLUMNS = [f.name for f in fields(ReportRow) if f.name != "seeds"]


def select_rumor_seeds(graph: Graph, size: int) -> list[int]:
    """The ``size`` users with the largest out-degree, lowest id first on ties."""
    if size >= graph.n:
        raise ValueError(f"rumor size {size} must be below n={graph.n}")
    deg = graph.out_degree()
    order = np.lexsort((np.arange(graph.n), -deg))
    return sorted(int(u) for u in order[:size])


def partial_activate(rumor_users: Iterable[int], r: int, prob: float, rng: np.random.Generator) -> tuple:
    """Per-layer rumor-accepted subsets: each (user, layer) accepts independently with ``prob``."""
    if not 0.0 <= prob <= 1.0:
        raise ValueError("prob must lie in [0, 1]")
    users = sorted(rumor_users)
    return tuple(frozenset(u for u in users if rng.random() < prob) for _ in range(r))


def build_seeds(graph: Graph, config: ExperimentConfig, rumor_users: Sequence[int] | None = None) -> CascadeSeeds:
    if rumor_users is None:
        rumor_users = select_rumor_seeds(graph, config.rumor_size)
    layers = partial_activate(rumor_users, len(config.weights), config.rumor_prob, stream(config.seed, RUMOR))
    return CascadeSeeds(frozenset(rumor_users), layers)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x) if math.isfinite(x) else ""
    return str(x)


def write_csv(rows: Sequence[ReportRow], fh, timings: bool = False) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in rows:
        d = asdict(row)
        if not timings:
            d["wall_time_ms"] = None
        w.writerow([_fmt(d[c]) for c in CSV_COLUMNS])


def plot_data(rows: Sequence[ReportRow]) -> dict:
    """k versus f, pool size and relative error, per algorithm."""
    out: dict = {}
    for row in rows:
        series = out.setdefault(row.algorithm, {"k": [], "f": [], "pool_size": [], "relative_error": [], "seeds": []})
        series["k"].append(row.k)
        series["f"].append(row.f_estimate)
        series["pool_size"].append(row.pool_size)
        series["relative_error"].append(row.relative_error)
        series["seeds"].append(list(row.seeds))
    return out


def run_experiment(config: ExperimentConfig, graph: Graph | None = None, write: bool = True) -> list[ReportRow]:
    """Run every (algorithm, budget) cell and return rows sorted by (algorithm, k).

    Node ids in ``ReportRow.seeds`` are dense graph ids.
    """
    if graph is None:
        if not config.dataset:
            raise ConfigError("no dataset given")
        try:
            graph = load_graph(config.dataset, config.symmetrize)
        except OSError as exc:
            raise OSError(f"cannot read dataset {config.dataset}: {exc}") from exc
    config.validate(graph.n)
    fm = config.feature_model()
    seeds = build_seeds(graph, config)
    name = Path(config.dataset).stem if config.dataset else "graph"
    budgets = sorted(set(config.budgets))

    def evaluate(picks) -> float:
        return evaluate_f_mc(graph, fm, seeds.with_positive(picks), config.mc_num, stream(config.seed, MC_EVAL)).mean

    def row(algo, k, picks, secs, est=None, pool=None) -> ReportRow:
        f = evaluate(picks)
        rel = abs(f - est) / f if est is not None and f > 0 else None
        return ReportRow(name, config.scheme, fm.r, algo, k, f, est, rel, pool, secs * 1e3, config.seed, tuple(picks))

    def imm_cell(k):
        sol = revised_imm(graph, fm, seeds, SolverParams(k, config.eps, config.ell), config.seed)
        return [row("revised-imm", k, sol.seeds, sol.timings["total_s"], sol.scaled_estimate, sol.pool_size)]

    def greedy_cell(_):
        if not budgets:
            return []
        times: list[float] = []
        picks = baselines.greedy_mc(graph, fm, seeds, budgets[-1], config.mc_num, config.seed, times=times)
        return [row("greedy", k, picks[:k], times[k - 1]) for k in budgets]

    def proximity_cell(k):
        t0 = time.perf_counter()
        picks = baselines.proximity(graph, seeds, k)
        return [row("proximity", k, picks, time.perf_counter() - t0)]

    def random_cell(k):
        t0 = time.perf_counter()
        picks = baselines.random_baseline(graph, seeds, k, stream(config.seed, RANDOM_BASELINE, k))
        return [row("random", k, picks, time.perf_counter() - t0)]

    cells = []
    for algo in config.algorithms:
        if algo == "greedy":
            cells.append((greedy_cell, None))
        else:
            fn = {"revised-imm": imm_cell, "proximity": proximity_cell, "random": random_cell}[algo]
            cells += [(fn, k) for k in budgets]
    if config.jobs > 1:
        with ThreadPoolExecutor(config.jobs) as ex:
            results = list(ex.map(lambda c: c[0](c[1]), cells))
    else:
        results = [fn(arg) for fn, arg in cells]
    rows = sorted((r for rs in results for r in rs), key=lambda r: (r.algorithm, r.k))

    if write:
        out = Path(config.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", encoding="utf-8", newline="") as fh:
            write_csv(rows, fh, config.timings)
        with open(out.with_suffix(".plot.json"), "w", encoding="utf-8") as fh:
            json.dump(plot_data(rows), fh, indent=1, sort_keys=True)
    return rows


def csv_text(rows: Sequence[ReportRow], timings: bool = False) -> str:
    buf = io.StringIO()
    write_csv(rows, buf, timings)
    return buf.getvalue()


# ---- config files --------------------------------------------------------------

def parse_int_list(text: str) -> tuple[int, ...]:
    """``"1-5,8,10"`` -> ``(1, 2, 3, 4, 5, 8, 10)``; empty text gives ``()``."""
    out: list[int] = []
    for part in text.replace(" ", "").split(","):
        if not part:
            continue
        if "-" in part:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return tuple(out)


def parse_float_list(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.replace(" ", "").split(",") if x)


_CONVERTERS = {
    "dataset": str,
    "symmetrize": lambda s: str(s).lower() in ("1", "true", "yes", "on"),
    "scheme": lambda s: str(s).lower(),
    "probs": parse_float_list,
    "weights": parse_float_list,
    "rumor_size": int,
    "rumor_prob": float,
    "rumor_activation_prob": float,
    "budgets": parse_int_list,
    "k": parse_int_list,
    "algorithms": lambda s: tuple(a for a in str(s).replace(" ", "").split(",") if a),
    "algo": lambda s: tuple(a for a in str(s).replace(" ", "").split(",") if a),
    "eps": float,
    "ell": float,
    "mc_num": int,
    "seed": int,
    "out": str,
    "jobs": int,
    "timings": lambda s: str(s).lower() in ("1", "true", "yes", "on"),
}
_ALIASES = {"k": "budgets", "algo": "algorithms", "rumor_activation_prob": "rumor_prob"}


def apply_settings(config: ExperimentConfig, settings: dict) -> ExperimentConfig:
    for raw_key, value in settings.items():
        key = raw_key.strip().replace("-", "_")
        conv = _CONVERTERS.get(key)
        if conv is None:
            raise ConfigError(f"unknown setting {raw_key!r}")
        try:
            parsed = conv(value) if isinstance(value, str) else value
        except ValueError as exc:
            raise ConfigError(f"bad value for {raw_key}: {value!r} ({exc})") from None
        setattr(config, _ALIASES.get(key, key), parsed)
    return config


def read_config_file(path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    settings = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            key, value = line.split("=", 1)
            settings[key.strip()] = value.strip()
    return settings
