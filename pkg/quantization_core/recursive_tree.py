#!/usr/bin/env python3
"""
Recursive Marginal Quantization Tree

Builds the quantization tree of the Euler scheme level by level:

1. Level 0 is the single point x0 with weight 1.
2. Given level k (grid x^k, weights w^k), the Euler marginal at t_{k+1} is
   the Gaussian mixture sum_i w_i^k N(m_k(x_i^k), v_k(x_i^k)^2).
3. Level k+1's grid is a stationary quantizer of that mixture (Newton-Raphson,
   warm-started), its transition matrix holds the cdf differences of each
   one-step law over the new cells, and its weights are w^k times that matrix.

Grid sizes come from `dispatch_equal` or `dispatch_optimal`.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from tqdm import tqdm

from .diffusion_model import DiffusionModel, euler_params
from .distortion_engine import GaussianMixture, Grid, cell_probabilities, newton_solve
from .exceptions import ConvergenceError, QuantizationError
from .gaussian_kernel import std_normal_quantizer

logger = logging.getLogger(__name__)

# Per-level stationarity target recorded against each level
LEVEL_TOLERANCE = 1e-8
# Early exit of the Newton iterations
EARLY_EXIT_TOLERANCE = 1e-10
DEFAULT_NR_ITERS = 5


@dataclass(frozen=True, eq=False)
class Level:
    """
    One time level of the tree.

    Attributes:
        t: Time t_k = k T / n
        grid: Quantization grid of size N_k
        weights: P(X_hat_k = x_i^k)
        transition_from_prev: Row-stochastic (N_{k-1} x N_k) matrix, None at level 0
            or when transitions were dropped
        distortion: Distortion of the level's mixture on its grid
        residual: Gradient sup-norm at the returned grid
        iterations: Newton iterations performed
        engine_calls: Kernel table evaluations spent on this level
    """

    t: float
    grid: Grid
    weights: np.ndarray
    transition_from_prev: Optional[np.ndarray] = None
    distortion: float = 0.0
    residual: float = 0.0
    iterations: int = 0
    engine_calls: int = 0

    @property
    def size(self) -> int:
        return self.grid.size

    @property
    def converged(self) -> bool:
        return self.residual <= LEVEL_TOLERANCE


@dataclass(frozen=True, eq=False)
class QuantizationTree:
    """
    Full recursive marginal quantization output.

    Attributes:
        model_id: Model descriptor ({'name': ..., params})
        x0: Initial state
        T: Horizon
        n: Number of time steps
        levels: n + 1 levels
    """

    model_id: Dict[str, Any]
    x0: float
    T: float
    n: int
    levels: List[Level] = field(default_factory=list)

    def __post_init__(self):
        if len(self.levels) != self.n + 1:
            raise ValueError(f"Tree with n={self.n} needs {self.n + 1} levels, got {len(self.levels)}")

    @property
    def dt(self) -> float:
        return self.T / self.n

    @property
    def sizes(self) -> List[int]:
        return [level.size for level in self.levels]

    @property
    def terminal(self) -> Level:
        return self.levels[-1]

    @property
    def has_transitions(self) -> bool:
        return all(level.transition_from_prev is not None for level in self.levels[1:])

    @property
    def kernel_evaluations(self) -> int:
        """Number of (component, cell) kernel evaluations spent building the tree"""
        sizes = self.sizes
        return sum(self.levels[k].engine_calls * sizes[k - 1] * sizes[k] for k in range(1, self.n + 1))

    def terminal_error(self) -> float:
        """Quadratic quantization error sqrt(D_n) of the last level"""
        return math.sqrt(self.terminal.distortion)


# ---------------------------------------------------------------------------
# Closed-form weights and transitions
# ---------------------------------------------------------------------------

def transitions(level_k: Level, model: DiffusionModel, t_k: float, dt: float, grid_next: Grid) -> np.ndarray:
    """
    Transition matrix from level k to the next grid.

    Entry (i, j) is the mass the one-step law N(m_k(x_i), v_k(x_i)^2) puts on
    cell j of `grid_next`: cdf(b_ij) - cdf(a_ij). Zero-volatility rows put
    their whole mass on the owning cell.
    """
    params = euler_params(model, t_k, dt, level_k.grid.points)
    return cell_probabilities(params.m, params.v, grid_next)


def marginal_weights(weights_k: np.ndarray, transition: np.ndarray) -> np.ndarray:
    """Propagate weights one level: weights_k @ transition"""
    weights_k = np.asarray(weights_k, dtype=float)
    transition = np.asarray(transition, dtype=float)
    if transition.ndim != 2 or transition.shape[0] != weights_k.size:
        raise ValueError(
            f"Weights of length {weights_k.size} do not match a transition of shape {transition.shape}"
        )
    return weights_k @ transition


def level_mixture(model: DiffusionModel, level_k: Level, dt: float) -> GaussianMixture:
    """Law of the Euler marginal at t_{k+1} given the level-k quantization"""
    params = euler_params(model, level_k.t, dt, level_k.grid.points)
    weights = level_k.weights / level_k.weights.sum()
    return GaussianMixture(
        means=np.atleast_1d(params.m),
        stdevs=np.atleast_1d(params.v),
        probs=weights,
    )


# ---------------------------------------------------------------------------
# Grid size dispatching
# ---------------------------------------------------------------------------

def dispatch_equal(N: int, n: int) -> List[int]:
    """
    Equal dispatching of a budget N over levels 1..n.

    Returns:
        [1, N//n, ..., N//n + N % n] (remainder appended to the last level)
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if N < n:
        raise ValueError(f"Budget N={N} is smaller than the number of steps n={n}")
    sizes = [1] + [N // n] * n
    sizes[-1] += N % n
    return sizes


def dispatch_optimal(a: Sequence[float], N: int, d: int = 1) -> List[int]:
    """
    Optimal dispatching of a budget N given the error coefficients a_0..a_n.

    N_0 = 1 and N_l = round(a_l^(d/(d+1)) N / sum_k a_k^(d/(d+1))) v 1,
    each share rounded to the nearest integer.

    Args:
        a: Coefficients a_l (a_l > 0 for l >= 1)
        N: Total budget
        d: State dimension
    """
    a = np.asarray(a, dtype=float)
    if a.size < 2:
        raise ValueError("Need coefficients for at least levels 0 and 1")
    if np.any(a[1:] <= 0) or np.any(a < 0):
        raise ValueError("Coefficients a_l must be positive for l >= 1")
    if N < 1 or d < 1:
        raise ValueError(f"N and d must be positive, got N={N}, d={d}")

    powered = a ** (d / (d + 1.0))
    sizes = np.maximum(np.rint(powered * N / powered.sum()), 1).astype(int)
    sizes[0] = 1
    return [int(s) for s in sizes]


def tree_complexity(sizes: Sequence[int]) -> int:
    """Sum of N_k N_{k+1}: kernel evaluations per pass over the tree"""
    return int(sum(sizes[k] * sizes[k + 1] for k in range(len(sizes) - 1)))


# ---------------------------------------------------------------------------
# Warm starts
# ---------------------------------------------------------------------------

def _affine_start(mixture: GaussianMixture, size: int) -> np.ndarray:
    z = std_normal_quantizer(size).points
    return mixture.mean() + math.sqrt(max(mixture.variance(), 0.0)) * z


def _interpolated_start(level_k: Level, size: int) -> Optional[np.ndarray]:
    """Monotone quantile interpolation of the level-k grid at ranks (2j-1)/(2N)"""
    x = level_k.grid.points
    if x.size < 2:
        return None
    w = level_k.weights / level_k.weights.sum()
    ranks_k = np.cumsum(w) - 0.5 * w
    if np.any(np.diff(ranks_k) <= 0):
        return None
    ranks = (2.0 * np.arange(1, size + 1) - 1.0) / (2.0 * size)
    start = np.interp(ranks, ranks_k, x)
    # Linear extrapolation beyond the outermost ranks
    low, high = ranks < ranks_k[0], ranks > ranks_k[-1]
    slope_low = (x[1] - x[0]) / (ranks_k[1] - ranks_k[0])
    slope_high = (x[-1] - x[-2]) / (ranks_k[-1] - ranks_k[-2])
    start[low] = x[0] + slope_low * (ranks[low] - ranks_k[0])
    start[high] = x[-1] + slope_high * (ranks[high] - ranks_k[-1])
    if not np.all(np.diff(start) > 0):
        return None
    return start


def warm_start(model: DiffusionModel, level_k: Level, dt: float, size: int, mixture: GaussianMixture) -> Grid:
    """
    Starting grid for level k+1.

    - From the single initial point: m_0(x0) + v_0(x0) z^N with z^N the N(0,1) quantizer.
    - Same size as level k: the converged level-k grid.
    - Otherwise: quantile interpolation of the level-k grid, falling back to
      the moment-matched affine image of z^N.
    """
    if level_k.size == 1:
        params = euler_params(model, level_k.t, dt, float(level_k.grid.points[0]))
        if params.v > 0:
            return Grid(params.m + params.v * std_normal_quantizer(size).points)
        if size == 1:
            return Grid([params.m])
        # Dirac start: spread the points around the atom, the solve moves one onto it
        return Grid(params.m + std_normal_quantizer(size).points)
    if level_k.size == size:
        return level_k.grid
    start = _interpolated_start(level_k, size)
    if start is None:
        start = _affine_start(mixture, size)
    return Grid(start)


# ---------------------------------------------------------------------------
# Tree construction
# ---------------------------------------------------------------------------

def build_tree(
    model: DiffusionModel,
    x0: float,
    T: float,
    n: int,
    sizes: Sequence[int],
    nr_iters: int = DEFAULT_NR_ITERS,
    keep_transitions: bool = True,
    progress: bool = False,
) -> QuantizationTree:
    """
    Run recursive marginal quantization end to end.

    Args:
        model: Diffusion model
        x0: Initial state
        T: Horizon (> 0)
        n: Number of Euler steps (>= 1)
        sizes: Grid sizes N_0..N_n with N_0 = 1
        nr_iters: Newton iterations per level (early exit once the gradient
            sup-norm reaches 1e-10)
        keep_transitions: Store transition matrices (dense, N_{k-1} x N_k)
        progress: Show a progress bar over levels

    Returns:
        QuantizationTree with n + 1 levels

    Raises:
        ValueError: Invalid arguments
        ConvergenceError: A level failed; carries the level index and residual
    """
    sizes = [int(s) for s in sizes]
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not T > 0:
        raise ValueError(f"T must be > 0, got {T}")
    if len(sizes) != n + 1:
        raise ValueError(f"sizes must have n + 1 = {n + 1} entries, got {len(sizes)}")
    if sizes[0] != 1:
        raise ValueError(f"sizes[0] must be 1, got {sizes[0]}")
    if min(sizes) < 1:
        raise ValueError("All grid sizes must be positive")
    if nr_iters < 1:
        raise ValueError(f"nr_iters must be >= 1, got {nr_iters}")

    dt = T / n
    levels = [Level(t=0.0, grid=Grid([x0]), weights=np.ones(1))]
    logger.info(f"🚀 Building quantization tree: model={model.name}, n={n}, sizes {sizes[1]}..{sizes[-1]}")

    steps = range(n)
    if progress:
        steps = tqdm(steps, desc="levels", unit="level")

    for k in steps:
        current = levels[k]
        t_next = (k + 1) * T / n
        try:
            mixture = level_mixture(model, current, dt)
            start = warm_start(model, current, dt, sizes[k + 1], mixture)
            result = newton_solve(mixture, start, nr_iters=nr_iters, tol=EARLY_EXIT_TOLERANCE)
        except ConvergenceError:
            raise
        except QuantizationError as e:
            raise ConvergenceError(f"quantization failed: {e}", residual=float("nan"), level=k + 1) from e

        if not math.isfinite(result.residual):
            raise ConvergenceError("non-finite gradient", residual=result.residual, level=k + 1)
        if result.residual > LEVEL_TOLERANCE:
            logger.warning(
                f"⚠️ Level {k + 1}: residual {result.residual:.2e} after {result.iterations} iterations"
            )

        transition = transitions(current, model, current.t, dt, result.grid)
        weights = marginal_weights(current.weights, transition)
        levels.append(
            Level(
                t=t_next,
                grid=result.grid,
                weights=weights,
                transition_from_prev=transition if keep_transitions else None,
                distortion=result.distortion,
                residual=result.residual,
                iterations=result.iterations,
                engine_calls=result.engine_calls,
            )
        )
        logger.debug(
            f"Level {k + 1}: N={result.grid.size}, distortion {result.distortion:.6e}, "
            f"residual {result.residual:.2e}, iterations {result.iterations}"
        )

    tree = QuantizationTree(model_id=model.describe(), x0=float(x0), T=float(T), n=n, levels=levels)
    logger.info(f"✅ Tree built: terminal size {tree.terminal.size}, terminal error {tree.terminal_error():.6e}")
    return tree


def optimal_sizes(
    model: DiffusionModel,
    x0: float,
    T: float,
    n: int,
    N: int,
    p: float = 3.0,
    d: int = 1,
) -> List[int]:
    """
    Optimal dispatching of a budget N for a model.

    Uses the Brownian coefficients for the Brownian model and the general
    a_l(t_n) coefficients otherwise.
    """
    from .error_bounds import BoundParams, a_coeff, brownian_a

    dt = T / n
    if model.name == "brownian":
        a = [brownian_a(ell, dt) for ell in range(n + 1)]
    else:
        params = BoundParams.from_model(model, dt=dt, x0=x0, p=p, d=d)
        a = [a_coeff(ell, T, params) for ell in range(n + 1)]
    return dispatch_optimal(a, N, d)
