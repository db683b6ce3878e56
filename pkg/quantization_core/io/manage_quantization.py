#!/usr/bin/env python3
"""
Quantization Management CLI

Command-line interface for building recursive marginal quantization trees,
pricing on them, running the Monte Carlo baseline and regenerating the
experiment tables as CSV.

Results go to stdout (or --out); status lines and logs go to stderr.
"""

import argparse
import logging
import sys
from typing import Any, Dict, List, Optional

import pandas as pd

from ..config import get_experiment
from ..diffusion_model import brownian
from ..error_bounds import READINGS, BoundParams, a_coeff, constants_table, dispatch_bound, theorem_bound, uniform_a_bound
from ..exceptions import ConfigError, QuantizationError
from ..gaussian_kernel import std_normal_quantizer
from ..monte_carlo import mc_price
from ..pricing import lipschitz_error_bound, price_european
from ..recursive_tree import build_tree
from ..utils import ensure_parent, setup_logging
from . import experiments
from .run_config import RunConfig, parse_range
from .tree_store import read_tree, write_tree, write_tree_csv

logger = logging.getLogger(__name__)

TABLES = list(experiments.PRICING_TABLES) + ["brownian", "figure-grids"]

EPILOG = """
Examples:
  python -m quantization_core build --model pseudo-cev --theta 0.5 --out tree.json
  python -m quantization_core price --tree tree.json --payoff put --strike 100 --r 0.15
  python -m quantization_core mc-price --model black-scholes --sigma 0.05 --paths 1000000 --seed 42
  python -m quantization_core normal-grid --size 10
  python -m quantization_core bounds --model brownian --budget equal:250 --n 50 --T 1
  python -m quantization_core dispatch --brownian --n 50 --N 250:5000:50
  python -m quantization_core compare-brownian --n 50 --budgets 250:5000:50
  python -m quantization_core table --name table1 --mc-paths 100000
"""


def _status(message: str) -> None:
    print(message, file=sys.stderr)


def _emit(frame: pd.DataFrame, out: Optional[str]) -> None:
    if out:
        path = ensure_parent(out)
        frame.to_csv(path, index=False)
        _status(f"💾 Results saved to {path}")
    else:
        frame.to_csv(sys.stdout, index=False)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _add_model_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("model")
    group.add_argument("--config", help="Flat YAML run configuration")
    group.add_argument("--model", help="brownian, black-scholes or pseudo-cev")
    group.add_argument("--r", type=float, help="Interest rate")
    group.add_argument("--sigma", type=float, help="Black-Scholes volatility")
    group.add_argument("--theta", type=float, help="Pseudo-CEV volatility level")
    group.add_argument("--delta", type=float, help="Pseudo-CEV elasticity in (0, 1)")
    group.add_argument("--x0", type=float, help="Initial state")
    group.add_argument("--T", type=float, help="Horizon")
    group.add_argument("--n", type=int, help="Number of Euler steps")


def _add_tree_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("tree")
    group.add_argument("--budget", help="equal:N, optimal:N, const:M or explicit sizes '1,5,5,...'")
    group.add_argument("--nr-iters", dest="nr_iters", type=int, help="Newton iterations per level")
    group.add_argument("--progress", action="store_true", help="Show progress bars")


def _add_payoff_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("payoff")
    group.add_argument("--payoff", choices=["put", "call"], help="Payoff kind")
    group.add_argument("--strike", type=float, help="Strike K")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quantization_core",
        description="Recursive marginal quantization of Euler schemes",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=EPILOG,
    )
    parser.add_argument("--log-level", default="WARNING", help="Logging level (default: WARNING)")
    parser.add_argument("--log-file", help="Also write logs to this file")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("build", help="Build a quantization tree and save it as JSON")
    _add_model_flags(p)
    _add_tree_flags(p)
    p.add_argument("--no-transitions", dest="keep_transitions", action="store_false", default=None,
                   help="Drop transition matrices")
    p.add_argument("--out", help="Tree JSON path (default: tree.json)")
    p.add_argument("--csv", help="Also write the (level,index,x,weight) dump")

    p = sub.add_parser("price", help="Price a European payoff on a tree")
    _add_model_flags(p)
    _add_tree_flags(p)
    _add_payoff_flags(p)
    p.add_argument("--tree", help="Tree JSON (built from the model flags when omitted)")
    p.add_argument("--bound-lip", dest="bound_lip", type=float, help="Lipschitz constant for the error bound")

    p = sub.add_parser("mc-price", help="Euler Monte Carlo price with a confidence interval")
    _add_model_flags(p)
    _add_payoff_flags(p)
    p.add_argument("--paths", type=int, help="Number of paths")
    p.add_argument("--seed", type=int, help="Root seed")
    p.add_argument("--workers", type=int, help="Worker threads")
    p.add_argument("--confidence", type=float, default=0.95, help="Confidence level (default: 0.95)")
    p.add_argument("--block-size", dest="block_size", type=int, default=2 ** 16, help="Paths per substream")
    p.add_argument("--progress", action="store_true", help="Show progress bars")

    p = sub.add_parser("normal-grid", help="Optimal quadratic quantizer of N(0,1)")
    p.add_argument("--size", type=int, required=True, help="Number of points")
    p.add_argument("--out", help="CSV path (default: stdout)")

    p = sub.add_parser("bounds", help="Error bound constants and the cumulative bound")
    _add_model_flags(p)
    p.add_argument("--budget", help="Budget specification (see build)")
    p.add_argument("--k", type=int, help="Level whose error is bounded (default: n)")
    p.add_argument("--p", type=float, default=3.0, help="Moment order in (2, 3] (default: 3)")
    p.add_argument("--reading", choices=READINGS, default="statement", help="Exponent reading of a_l")
    p.add_argument("--k-universal", dest="k_universal", type=float, default=1.0, help="Universal constant")

    p = sub.add_parser("dispatch", help="Grid-size schedules as CSV")
    _add_model_flags(p)
    p.add_argument("--brownian", action="store_true", help="Use Brownian motion started at 0")
    p.add_argument("--N", dest="budgets", required=True, help="Budgets 'start:stop:step' or 'a,b,c'")
    p.add_argument("--mode", choices=["optimal", "equal"], default="optimal", help="Dispatching rule")

    p = sub.add_parser("compare-brownian", help="Recursive vs regular quantization of W_T")
    p.add_argument("--n", type=int, default=50, help="Number of steps (default: 50)")
    p.add_argument("--T", type=float, default=1.0, help="Horizon (default: 1)")
    p.add_argument("--budgets", default="250:5000:50", help="Budgets 'start:stop:step'")
    p.add_argument("--nr-iters", dest="nr_iters", type=int, default=5, help="Newton iterations per level")
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.add_argument("--progress", action="store_true", help="Show progress bars")

    p = sub.add_parser("table", help="Regenerate an experiment table as CSV")
    p.add_argument("--name", choices=TABLES, required=True, help="Experiment name")
    p.add_argument("--mc-paths", dest="mc_paths", type=int, default=0, help="Monte Carlo paths per row")
    p.add_argument("--seed", type=int, default=42, help="Monte Carlo seed")
    p.add_argument("--workers", type=int, help="Monte Carlo worker threads")
    p.add_argument("--nr-iters", dest="nr_iters", type=int, default=5, help="Newton iterations per level")
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.add_argument("--progress", action="store_true", help="Show progress bars")

    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    keys = set(RunConfig.keys())
    values = {k: v for k, v in vars(args).items() if k in keys and v is not None}
    if "model" in values:
        values["model"] = values["model"].replace("-", "_")
    return values


def _config(args: argparse.Namespace) -> RunConfig:
    return RunConfig.resolve(getattr(args, "config", None), _overrides(args))


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_build(args: argparse.Namespace) -> int:
    cfg = _config(args)
    model = cfg.build_model()
    sizes = cfg.sizes(model)
    _status(f"🚀 Building {cfg.model} tree: n={cfg.n}, N_n={sizes[-1]}")
    tree = build_tree(model, cfg.x0, cfg.T, cfg.n, sizes, nr_iters=cfg.nr_iters,
                      keep_transitions=cfg.keep_transitions, progress=args.progress)
    path = write_tree(tree, cfg.out or "tree.json")
    _status(f"💾 Tree saved to {path}")
    if args.csv:
        _status(f"💾 Tree CSV saved to {write_tree_csv(tree, args.csv)}")
    _status(f"✅ Terminal quantization error {tree.terminal_error():.6e}")
    return 0


def cmd_price(args: argparse.Namespace) -> int:
    cfg = _config(args)
    if args.tree:
        tree = read_tree(args.tree)
        # Driftless models (Brownian) carry no rate: discount at 0
        r = args.r if args.r is not None else float(tree.model_id.get("r", 0.0))
    else:
        model = cfg.build_model()
        tree = build_tree(model, cfg.x0, cfg.T, cfg.n, cfg.sizes(model), nr_iters=cfg.nr_iters,
                          keep_transitions=False, progress=args.progress)
        r = cfg.r
    payoff = cfg.build_payoff()
    record = {"payoff": payoff.kind, "strike": payoff.strike, "r": r, "price": price_european(tree, payoff, r)}
    if cfg.bound_lip is not None:
        record["error_bound"] = lipschitz_error_bound(tree, cfg.bound_lip, r)
    _emit(pd.DataFrame([record]), None)
    return 0


def cmd_mc_price(args: argparse.Namespace) -> int:
    cfg = _config(args)
    result = mc_price(
        cfg.build_model(), cfg.x0, cfg.build_payoff(), cfg.r, cfg.T, cfg.n, cfg.paths, cfg.seed,
        confidence=args.confidence, block_size=args.block_size, workers=cfg.workers, progress=args.progress,
    )
    record = {
        "price": result.price,
        "std_error": result.std_error,
        "ci_low": result.ci_low,
        "ci_high": result.ci_high,
        "paths": result.paths,
        "seed": result.seed,
    }
    _emit(pd.DataFrame([record]), None)
    return 0


def cmd_normal_grid(args: argparse.Namespace) -> int:
    quantizer = std_normal_quantizer(args.size)
    frame = pd.DataFrame({"index": range(quantizer.size), "x": quantizer.points, "weight": quantizer.weights})
    _status(f"📊 N(0,1) quantizer N={quantizer.size}: distortion {quantizer.distortion:.12e}")
    _emit(frame, args.out)
    return 0


def cmd_bounds(args: argparse.Namespace) -> int:
    cfg = _config(args)
    model = cfg.build_model()
    sizes = cfg.sizes(model)
    dt = cfg.T / cfg.n
    k = cfg.n if args.k is None else args.k
    params = BoundParams.from_model(model, dt=dt, x0=cfg.x0, p=args.p, K_universal=args.k_universal)
    t_grid = [j * dt for j in range(cfg.n + 1)]
    a = [a_coeff(ell, cfg.T, params, args.reading) for ell in range(cfg.n + 1)]

    rows = list(constants_table(params).items())
    rows += [
        ("k", k),
        ("N_k", sizes[k] if 0 <= k <= cfg.n else float("nan")),
        ("bound", theorem_bound(k, sizes, t_grid, params, args.reading)),
        ("uniform_a_bound", uniform_a_bound(cfg.T, params)),
        ("optimal_dispatch_bound", dispatch_bound(sum(sizes[1:]), a, K_universal=args.k_universal)),
    ]
    _emit(pd.DataFrame(rows, columns=["name", "value"]), None)
    return 0


def cmd_dispatch(args: argparse.Namespace) -> int:
    budgets = parse_range(args.budgets)
    if args.brownian:
        n = args.n if args.n is not None else 50
        T = args.T if args.T is not None else 1.0
        frame = experiments.dispatch_schedules(budgets, n, T, mode=args.mode, model=brownian(), x0=0.0)
    else:
        cfg = _config(args)
        frame = experiments.dispatch_schedules(budgets, cfg.n, cfg.T, mode=args.mode,
                                               model=cfg.build_model(), x0=cfg.x0)
    _emit(frame, None)
    return 0


def cmd_compare_brownian(args: argparse.Namespace) -> int:
    budgets = parse_range(args.budgets)
    _status(f"🚀 Comparing recursive and regular quantization of W_{args.T:g} over {len(budgets)} budgets")
    frame = experiments.compare_brownian(budgets, n=args.n, T=args.T, nr_iters=args.nr_iters,
                                         progress=args.progress)
    _emit(frame, args.out)
    return 0


def cmd_table(args: argparse.Namespace) -> int:
    _status(f"🚀 Running experiment {args.name}")
    if args.name == "figure-grids":
        frame = experiments.figure_grids(nr_iters=args.nr_iters, progress=args.progress)
    elif args.name == "brownian":
        spec = get_experiment("brownian")
        b = spec["budgets"]
        budgets = list(range(int(b["start"]), int(b["stop"]) + 1, int(b["step"])))
        frame = experiments.compare_brownian(budgets, n=int(spec["n"]), T=float(spec["T"]),
                                             nr_iters=args.nr_iters, progress=args.progress)
    else:
        frame = experiments.pricing_table(args.name, mc_paths=args.mc_paths, seed=args.seed,
                                          nr_iters=args.nr_iters, workers=args.workers, progress=args.progress)
    _emit(frame, args.out)
    return 0


HANDLERS = {
    "build": cmd_build,
    "price": cmd_price,
    "mc-price": cmd_mc_price,
    "normal-grid": cmd_normal_grid,
    "bounds": cmd_bounds,
    "dispatch": cmd_dispatch,
    "compare-brownian": cmd_compare_brownian,
    "table": cmd_table,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI function; returns the process exit status"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    try:
        setup_logging(args.log_level, log_file=args.log_file, stream=sys.stderr)
    except (AttributeError, OSError) as e:
        _status(f"❌ Invalid logging setup: {e}")
        return 2

    try:
        return HANDLERS[args.command](args)
    except KeyboardInterrupt:
        _status("\n⚠️ Operation cancelled by user")
        return 1
    except ConfigError as e:
        _status(f"❌ Configuration error: {e}")
        return 1
    except (QuantizationError, OSError, ValueError, KeyError) as e:
        _status(f"❌ {args.command} failed: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
