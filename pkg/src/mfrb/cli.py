"""``mfrb`` command line: solve, experiment, oracle, generate.

Exit status: 0 on success, 2 on configuration errors, 1 on runtime errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import _backend, baselines
from .diffusion import ExactOracle, InstanceTooLarge, evaluate_f_mc
from .experiment import (
    ALGORITHMS,
    ConfigError,
    ExperimentConfig,
    apply_settings,
    build_seeds,
    parse_int_list,
    read_config_file,
    run_experiment,
)
from .graph import ParseError, load_graph, random_graph
from .rng import MC_EVAL, RANDOM_BASELINE, stream
from .solver import SolverParams, revised_imm

# flag dest -> config key
_FLAG_KEYS = {
    "dataset": "dataset", "symmetrize": "symmetrize", "scheme": "scheme", "probs": "probs",
    "weights": "weights", "rumor_size": "rumor_size", "rumor_prob": "rumor_prob", "budgets": "budgets",
    "eps": "eps", "ell": "ell", "algo": "algorithms", "mc_num": "mc_num", "seed": "seed", "out": "out",
    "jobs": "jobs", "timings": "timings",
}


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value settings file (flags override it)")
    p.add_argument("--dataset", help="edge-list file, one 'u v' per line")
    p.add_argument("--symmetrize", action="store_const", const=True, default=None,
                   help="add the reverse of every edge")
    p.add_argument("--scheme", choices=["cp", "wc"])
    p.add_argument("--probs", help="per-feature edge probabilities for cp, e.g. 0.4,0.5")
    p.add_argument("--weights", help="per-feature weights summing to 1, e.g. 0.3,0.7")
    p.add_argument("--rumor-size", type=int)
    p.add_argument("--rumor-prob", type=float, help="chance a rumor user's feature accepts the rumor")
    p.add_argument("--eps", type=float)
    p.add_argument("--ell", type=float)
    p.add_argument("--mc-num", type=int, help="Monte-Carlo runs for f evaluation")
    p.add_argument("--seed", type=int, help="master random seed")
    p.add_argument("--jobs", type=int)
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mfrb", description="Multi-feature rumor blocking")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="select positive seeds for one budget")
    _common(p)
    p.add_argument("--k", "--budgets", dest="budgets", help="budget")
    p.add_argument("--algo", default=None, choices=ALGORITHMS)
    p.add_argument("--out", help="write the JSON result here instead of stdout")

    p = sub.add_parser("experiment", help="run algorithms over budgets and write CSV")
    _common(p)
    p.add_argument("--budgets", "--k", dest="budgets", help="e.g. 1-20 or 1,5,10")
    p.add_argument("--algo", help=f"comma list from {','.join(ALGORITHMS)}")
    p.add_argument("--out", help="CSV path; plot data goes next to it as .plot.json")
    p.add_argument("--timings", action="store_const", const=True, default=None,
                   help="fill wall_time_ms (makes the CSV run-dependent)")

    p = sub.add_parser("oracle", help="evaluate f for a given positive seed set")
    _common(p)
    p.add_argument("--positive", required=True, help="comma list of positive seed labels")
    p.add_argument("--exact", action="store_true", help="also enumerate realizations (tiny graphs)")

    p = sub.add_parser("generate", help="write a random heavy-tailed digraph edge list")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    return parser


def _config(args) -> ExperimentConfig:
    cfg = ExperimentConfig()
    if getattr(args, "config", None):
        try:
            apply_settings(cfg, read_config_file(args.config))
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
    flags = {key: getattr(args, dest) for dest, key in _FLAG_KEYS.items()
             if getattr(args, dest, None) is not None}
    apply_settings(cfg, flags)
    if not cfg.dataset:
        raise ConfigError("--dataset is required")
    return cfg


def _load(cfg: ExperimentConfig):
    try:
        return load_graph(cfg.dataset, cfg.symmetrize)
    except OSError as exc:
        raise ConfigError(f"cannot read dataset {cfg.dataset}: {exc}") from None
    except ParseError as exc:
        raise ConfigError(f"{cfg.dataset}: {exc}") from None


def cmd_solve(args) -> int:
    cfg = _config(args)
    graph = _load(cfg)
    if len(cfg.budgets) != 1:
        raise ConfigError("solve takes a single budget via --k")
    cfg.validate(graph.n)
    k = cfg.budgets[0]
    algo = args.algo or "revised-imm"
    fm = cfg.feature_model()
    seeds = build_seeds(graph, cfg)
    result: dict = {"algorithm": algo, "k": k, "backend": _backend.BACKEND}
    if algo == "revised-imm":
        sol = revised_imm(graph, fm, seeds, SolverParams(k, cfg.eps, cfg.ell), cfg.seed, cfg.jobs)
        picks = sol.seeds
        result.update(estimator_value=sol.scaled_estimate, pool_size=sol.pool_size,
                      lower_bound=sol.lower_bound, timings=sol.timings)
    elif algo == "greedy":
        picks = baselines.greedy_mc(graph, fm, seeds, k, cfg.mc_num, cfg.seed)
    elif algo == "proximity":
        picks = baselines.proximity(graph, seeds, k)
    else:
        picks = baselines.random_baseline(graph, seeds, k, stream(cfg.seed, RANDOM_BASELINE, k))
    result["seeds"] = [int(graph.labels[u]) for u in picks]
    result["rumor_users"] = [int(graph.labels[u]) for u in sorted(seeds.rumor_users)]
    text = json.dumps(result, indent=1)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def cmd_experiment(args) -> int:
    cfg = _config(args)
    graph = _load(cfg)
    rows = run_experiment(cfg, graph)
    for row in rows:
        est = "" if row.estimator_value is None else f"  est={row.estimator_value:.3f}"
        print(f"{row.algorithm:12s} k={row.k:3d}  f={row.f_estimate:.3f}{est}")
    print(f"wrote {cfg.out}", file=sys.stderr)
    return 0


def cmd_oracle(args) -> int:
    cfg = _config(args)
    graph = _load(cfg)
    cfg.budgets = ()  # not used here
    cfg.validate(graph.n)
    fm = cfg.feature_model()
    try:
        positive = [graph.node_of(x) for x in parse_int_list(args.positive)]
    except (KeyError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    seeds = build_seeds(graph, cfg)
    try:
        seeds = seeds.with_positive(positive)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    est = evaluate_f_mc(graph, fm, seeds, cfg.mc_num, stream(cfg.seed, MC_EVAL))
    result = {"f_mc": est.mean, "stderr": est.stderr, "num": est.num}
    if args.exact:
        try:
            result["f_exact"] = ExactOracle(graph, fm, seeds.rumor_layers).f(seeds.positive_users)
        except InstanceTooLarge as exc:
            raise ConfigError(str(exc)) from None
    print(json.dumps(result, indent=1))
    return 0


def cmd_generate(args) -> int:
    g = random_graph(args.n, args.m, args.seed)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(g.to_edge_list())
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"solve": cmd_solve, "experiment": cmd_experiment, "oracle": cmd_oracle,
               "generate": cmd_generate}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"mfrb: config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - top-level reporter
        print(f"mfrb: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
