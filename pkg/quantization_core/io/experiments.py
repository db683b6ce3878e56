#!/usr/bin/env python3
"""
Experiment Runners

Reproducible experiment drivers returning pandas frames ready for CSV:

- pricing tables (pseudo-CEV and Black-Scholes puts, optional MC columns)
- recursive vs regular quantization errors of Brownian motion
- grid-size schedules of equal and optimal dispatching
- per-level grids and weights of the figure runs
"""

import logging
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from ..config import get_experiment
from ..diffusion_model import brownian, builtin
from ..gaussian_kernel import regular_quantization_error
from ..monte_carlo import mc_price
from ..pricing import Payoff, bs_put_closed_form, price_european
from ..recursive_tree import build_tree, dispatch_equal, optimal_sizes
from .tree_store import tree_frame

logger = logging.getLogger(__name__)

PRICING_TABLES = ("table1", "table2", "table3", "table4")
MODEL_KEYS = {
    "black_scholes": ("r", "sigma"),
    "pseudo_cev": ("r", "theta", "delta"),
}


def _model_for(spec: Dict[str, Any], row: Dict[str, Any]):
    name = spec["model"]
    params = {key: float(row.get(key, spec.get(key))) for key in MODEL_KEYS[name]}
    return builtin(name, **params)


def pricing_table(
    name: str,
    mc_paths: int = 0,
    seed: int = 42,
    nr_iters: int = 5,
    workers: Optional[int] = None,
    progress: bool = False,
) -> pd.DataFrame:
    """
    Reproduce one put pricing table.

    Rows varying a model parameter build one tree each; rows varying the
    strike share a single tree.

    Args:
        name: 'table1' .. 'table4'
        mc_paths: Monte Carlo paths per row (0 leaves the MC columns empty)
        seed: Monte Carlo seed
        nr_iters: Newton iterations per level
        workers: Monte Carlo worker threads
        progress: Show progress bars

    Returns:
        Frame with columns <vary>, rmq, mc, ci_lo, ci_hi, reference
        (+ closed_form for Black-Scholes tables)
    """
    if name not in PRICING_TABLES:
        raise ValueError(f"Unknown table '{name}'. Choose from {PRICING_TABLES}")
    spec = get_experiment(name)
    vary = spec["vary"]
    n, T, x0, r = int(spec["n"]), float(spec["T"]), float(spec["x0"]), float(spec["r"])
    sizes = [1] + [int(spec["size"])] * n
    logger.info(f"📊 Running {name}: {len(spec['rows'])} rows varying {vary}")

    shared_tree = None
    records: List[Dict[str, Any]] = []
    for row in spec["rows"]:
        model = _model_for(spec, row)
        strike = float(row.get("strike", spec.get("strike")))
        payoff = Payoff.put(strike)

        if vary == "strike":
            if shared_tree is None:
                shared_tree = build_tree(model, x0, T, n, sizes, nr_iters=nr_iters,
                                         keep_transitions=False, progress=progress)
            tree = shared_tree
        else:
            tree = build_tree(model, x0, T, n, sizes, nr_iters=nr_iters,
                              keep_transitions=False, progress=progress)

        record = {vary: float(row[vary]), "rmq": price_european(tree, payoff, r)}
        if mc_paths > 0:
            mc = mc_price(model, x0, payoff, r, T, n, mc_paths, seed, workers=workers, progress=progress)
            record.update(mc=mc.price, ci_lo=mc.ci_low, ci_hi=mc.ci_high)
        else:
            record.update(mc=np.nan, ci_lo=np.nan, ci_hi=np.nan)
        record["reference"] = float(row["reference"])
        if spec["model"] == "black_scholes":
            record["closed_form"] = bs_put_closed_form(x0, strike, r, model.params["sigma"], T)
        records.append(record)
        logger.info(f"   {vary}={row[vary]}: RMQ {record['rmq']:.6f} (published {row['reference']})")

    return pd.DataFrame.from_records(records)


def compare_brownian(
    budgets: Sequence[int],
    n: int = 50,
    T: float = 1.0,
    nr_iters: int = 5,
    progress: bool = False,
) -> pd.DataFrame:
    """
    Terminal quantization errors of W_T under equal and optimal dispatching,
    against the regular quantization error of N(0, T) at the same terminal size.

    Returns:
        Frame with columns N, err_equal, err_optimal, err_regular,
        size_equal, size_optimal, err_regular_equal
    """
    model = brownian()
    records = []
    for N in budgets:
        sizes_equal = dispatch_equal(int(N), n)
        sizes_optimal = optimal_sizes(model, 0.0, T, n, int(N))
        tree_equal = build_tree(model, 0.0, T, n, sizes_equal, nr_iters=nr_iters,
                                keep_transitions=False, progress=progress)
        tree_optimal = build_tree(model, 0.0, T, n, sizes_optimal, nr_iters=nr_iters,
                                  keep_transitions=False, progress=progress)
        records.append(
            {
                "N": int(N),
                "err_equal": tree_equal.terminal_error(),
                "err_optimal": tree_optimal.terminal_error(),
                "err_regular": regular_quantization_error(sizes_optimal[-1], T),
                "size_equal": sizes_equal[-1],
                "size_optimal": sizes_optimal[-1],
                "err_regular_equal": regular_quantization_error(sizes_equal[-1], T),
            }
        )
        logger.debug(f"N={N}: equal {records[-1]['err_equal']:.6f}, optimal {records[-1]['err_optimal']:.6f}")
    logger.info(f"✅ Brownian comparison done for {len(records)} budgets")
    return pd.DataFrame.from_records(records)


def dispatch_schedules(
    budgets: Sequence[int],
    n: int,
    T: float = 1.0,
    mode: str = "optimal",
    model=None,
    x0: float = 0.0,
) -> pd.DataFrame:
    """Grid sizes N_0..N_n per budget, one row per budget"""
    if mode not in ("optimal", "equal"):
        raise ValueError(f"mode must be 'optimal' or 'equal', got '{mode}'")
    model = model or brownian()
    rows = []
    for N in budgets:
        if mode == "equal":
            sizes = dispatch_equal(int(N), n)
        else:
            sizes = optimal_sizes(model, x0, T, n, int(N))
        rows.append([int(N)] + sizes)
    return pd.DataFrame(rows, columns=["N"] + [f"N_{k}" for k in range(n + 1)])


def figure_grids(nr_iters: int = 5, progress: bool = False) -> pd.DataFrame:
    """Per-level grids and weights of the figure runs: (model, level, index, x, weight)"""
    frames = []
    for run in get_experiment("figure_grids")["runs"]:
        model = _model_for(run, run)
        n = int(run["n"])
        tree = build_tree(model, float(run["x0"]), float(run["T"]), n, [1] + [int(run["size"])] * n,
                          nr_iters=nr_iters, keep_transitions=False, progress=progress)
        frame = tree_frame(tree)
        frame.insert(0, "model", run["model"])
        frames.append(frame)
    return pd.concat(frames, ignore_index=True)
