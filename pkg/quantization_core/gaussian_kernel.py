#!/usr/bin/env python3
"""
Standard-Normal Kernel

Standard-normal numerics used throughout the package:
- density, cumulative distribution and inverse cumulative distribution
- absolute moments E|Z|^p
- optimal quadratic quantizers of N(0,1), memoized by size

The quantizers are both the regular-quantization baseline of the Brownian
experiment and the seed of every recursive tree (level 1 starts from an
affine image of the N(0,1) grid).
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np
from scipy import special

from .exceptions import ConvergenceError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

# Stationarity target for N(0,1) grids (gradient sup-norm)
QUANTIZER_TOLERANCE = 1e-10


def std_normal_pdf(z: ArrayLike) -> ArrayLike:
    """
    Density of N(0,1), (1/sqrt(2 pi)) exp(-z^2/2).

    Args:
        z: Finite real or array of reals

    Returns:
        Density value(s), same shape as `z`
    """
    z = np.asarray(z, dtype=float)
    out = np.exp(-0.5 * z * z) * INV_SQRT_2PI
    return float(out) if out.ndim == 0 else out


def std_normal_cdf(z: ArrayLike) -> ArrayLike:
    """
    Cumulative distribution of N(0,1).

    Evaluated through the complementary error function (scipy's `ndtr`),
    which is accurate to double precision in both tails and returns exactly
    0 and 1 at -inf and +inf.
    """
    out = special.ndtr(np.asarray(z, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def std_normal_ppf(u: ArrayLike) -> ArrayLike:
    """Inverse cumulative distribution of N(0,1) on (0, 1)"""
    out = special.ndtri(np.asarray(u, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def abs_moment(p: float) -> float:
    """
    Absolute moment E|Z|^p of a standard normal variable.

    Args:
        p: Moment order in (2, 3]

    Returns:
        2^(p/2) Gamma((p+1)/2) / sqrt(pi)
    """
    if not (2.0 < p <= 3.0):
        raise ValueError(f"p must lie in (2, 3], got {p}")
    return float(2.0 ** (p / 2.0) * special.gamma((p + 1.0) / 2.0) / math.sqrt(math.pi))


@dataclass(frozen=True)
class StdNormalQuantizer:
    """
    Stationary quadratic N-quantizer of N(0,1).

    Attributes:
        points: Strictly increasing, symmetric grid
        weights: Mass of each Voronoi cell
        distortion: E d(Z, points)^2
        residual: Gradient sup-norm at `points`
    """

    points: np.ndarray
    weights: np.ndarray
    distortion: float
    residual: float

    @property
    def size(self) -> int:
        return int(self.points.size)

    @property
    def error(self) -> float:
        """Quadratic quantization error sqrt(distortion)"""
        return math.sqrt(self.distortion)


def quantile_seed(size: int) -> np.ndarray:
    """Quantile seeding x_i = ppf((2i - 1) / (2N)), i = 1..N"""
    ranks = (2.0 * np.arange(1, size + 1) - 1.0) / (2.0 * size)
    return special.ndtri(ranks)


@lru_cache(maxsize=None)
def std_normal_quantizer(size: int, nr_iters: int = 200) -> StdNormalQuantizer:
    """
    Optimal quadratic quantizer of N(0,1) of a given size.

    Seeds the safeguarded Newton-Raphson solve with normal quantiles and
    symmetrizes the converged grid. Results are cached per (size, nr_iters);
    `lru_cache` is safe for concurrent lookups and inserts.

    Args:
        size: Number of points N >= 1
        nr_iters: Maximal number of Newton iterations

    Returns:
        StdNormalQuantizer with read-only arrays

    Raises:
        ValueError: If size < 1 or nr_iters < 1
        ConvergenceError: If the gradient sup-norm stays above 1e-10
    """
    # Local import: the engine itself depends on the pdf/cdf defined here
    from .distortion_engine import GaussianMixture, Grid, cell_masses, distortion, gradient, newton_solve

    if size < 1:
        raise ValueError(f"Quantizer size must be >= 1, got {size}")
    if nr_iters < 1:
        raise ValueError(f"nr_iters must be >= 1, got {nr_iters}")

    law = GaussianMixture.single(0.0, 1.0)
    result = newton_solve(law, Grid(quantile_seed(size)), nr_iters=nr_iters, tol=1e-13)

    points = result.grid.points
    points = 0.5 * (points - points[::-1])
    grid = Grid(points)
    residual = float(np.max(np.abs(gradient(law, grid))))
    if residual > QUANTIZER_TOLERANCE:
        raise ConvergenceError(f"N(0,1) quantizer of size {size} did not converge", residual)

    weights = cell_masses(law, grid)
    value = distortion(law, grid)
    logger.debug(f"N(0,1) quantizer N={size}: distortion {value:.6e}, residual {residual:.2e}")

    points = grid.points.copy()
    points.setflags(write=False)
    weights.setflags(write=False)
    return StdNormalQuantizer(points=points, weights=weights, distortion=value, residual=residual)


def regular_quantization_error(size: int, horizon: float = 1.0) -> float:
    """
    Quadratic error of the optimal `size`-quantizer of N(0, horizon).

    Used as the regular-quantization baseline for W_T when comparing with
    recursive marginal quantization.
    """
    if horizon <= 0:
        raise ValueError(f"horizon must be > 0, got {horizon}")
    return math.sqrt(horizon) * std_normal_quantizer(size).error
