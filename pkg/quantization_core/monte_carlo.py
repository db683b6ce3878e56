#!/usr/bin/env python3
"""
Monte Carlo Baseline

Seeded Euler-scheme Monte Carlo pricer with a normal-approximation
confidence interval. Paths are simulated with the same Euler operator as the
quantization tree, so both share the time-discretization bias.

Reproducibility: paths are grouped in fixed blocks of `block_size`; block b
draws from a Philox generator seeded by `SeedSequence(seed).spawn(...)[b]`.
Block statistics (count, mean, sum of squared deviations) are merged in
block order, so results depend on (seed, block_size) only and never on the
number of worker threads.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np
from tqdm import tqdm

from .diffusion_model import DiffusionModel, euler_step
from .gaussian_kernel import std_normal_ppf

logger = logging.getLogger(__name__)

DEFAULT_BLOCK_SIZE = 2 ** 16
Z_95 = 1.96
_UNIT = 2.0 ** -53


@dataclass(frozen=True)
class McResult:
    """
    Monte Carlo price with its confidence interval.

    Attributes:
        price: Discounted sample mean
        std_error: Sample standard deviation / sqrt(paths)
        ci_low: price - z std_error
        ci_high: price + z std_error
        paths: Number of simulated paths
        seed: Root seed
        confidence: Confidence level of the interval
    """

    price: float
    std_error: float
    ci_low: float
    ci_high: float
    paths: int
    seed: int
    confidence: float = 0.95

    def contains(self, value: float, widen: float = 0.0) -> bool:
        return self.ci_low - widen <= value <= self.ci_high + widen


class _BlockStats:
    """Running (count, mean, M2) merged with Chan's pairwise update"""

    __slots__ = ("count", "mean", "m2")

    def __init__(self, count: int = 0, mean: float = 0.0, m2: float = 0.0):
        self.count = count
        self.mean = mean
        self.m2 = m2

    @classmethod
    def of(cls, values: np.ndarray) -> "_BlockStats":
        if values.size and np.all(values == values[0]):
            return cls(int(values.size), float(values[0]), 0.0)
        mean = float(values.mean())
        return cls(int(values.size), mean, float(np.sum((values - mean) ** 2)))

    def merge(self, other: "_BlockStats") -> None:
        if other.count == 0:
            return
        total = self.count + other.count
        delta = other.mean - self.mean
        self.mean += delta * other.count / total
        self.m2 += other.m2 + delta * delta * self.count * other.count / total
        self.count = total


def z_value(confidence: float) -> float:
    """Two-sided normal quantile; exactly 1.96 at the 95% level"""
    if not 0.0 < confidence < 1.0:
        raise ValueError(f"confidence must lie in (0, 1), got {confidence}")
    if abs(confidence - 0.95) < 1e-12:
        return Z_95
    return float(std_normal_ppf(0.5 + 0.5 * confidence))


def standard_normals(rng: np.random.Generator, size: int) -> np.ndarray:
    """Inverse-transform normals from 53-bit uniforms on the open interval (0, 1)"""
    u = (rng.integers(0, 2 ** 53, size=size, dtype=np.int64) + 0.5) * _UNIT
    return std_normal_ppf(u)


def _block_sizes(num_paths: int, block_size: int) -> List[int]:
    full, rest = divmod(num_paths, block_size)
    return [block_size] * full + ([rest] if rest else [])


def simulate_terminal(
    model: DiffusionModel,
    x0: float,
    T: float,
    n: int,
    size: int,
    seed_seq: np.random.SeedSequence,
) -> np.ndarray:
    """Terminal Euler states of `size` paths drawn from one substream"""
    rng = np.random.Generator(np.random.Philox(seed_seq))
    dt = T / n
    x = np.full(size, float(x0))
    for k in range(n):
        x = euler_step(model, k * dt, dt, x, standard_normals(rng, size))
    return x


def mc_price(
    model: DiffusionModel,
    x0: float,
    payoff: Callable,
    r: float,
    T: float,
    n: int,
    num_paths: int,
    seed: int,
    confidence: float = 0.95,
    block_size: int = DEFAULT_BLOCK_SIZE,
    workers: Optional[int] = None,
    progress: bool = False,
) -> McResult:
    """
    Price a European payoff by Euler Monte Carlo.

    Args:
        model: Diffusion model
        x0: Initial state
        payoff: Vectorized payoff of the terminal state
        r: Continuously compounded rate
        T: Horizon (> 0)
        n: Euler steps (>= 1)
        num_paths: Number of paths (>= 2)
        seed: Root seed
        confidence: Confidence level of the interval
        block_size: Paths per substream
        workers: Worker threads (None lets the executor decide, 1 runs inline)
        progress: Show a progress bar over blocks

    Returns:
        McResult
    """
    if num_paths < 2:
        raise ValueError(f"num_paths must be >= 2, got {num_paths}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not T > 0:
        raise ValueError(f"T must be > 0, got {T}")
    if block_size < 1:
        raise ValueError(f"block_size must be >= 1, got {block_size}")
    z = z_value(confidence)

    sizes = _block_sizes(int(num_paths), int(block_size))
    streams = np.random.SeedSequence(int(seed)).spawn(len(sizes))
    logger.info(f"🚀 Monte Carlo: {num_paths} paths, {n} steps, {len(sizes)} blocks, seed {seed}")

    def run_block(job: Tuple[int, np.random.SeedSequence]) -> _BlockStats:
        size, seq = job
        terminal = simulate_terminal(model, x0, T, n, size, seq)
        values = np.asarray(payoff(terminal), dtype=float)
        return _BlockStats.of(np.broadcast_to(values, terminal.shape))

    jobs = list(zip(sizes, streams))
    if workers == 1:
        blocks = map(run_block, jobs)
        results = list(tqdm(blocks, total=len(jobs), desc="paths", unit="block", disable=not progress))
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            blocks = executor.map(run_block, jobs)
            results = list(tqdm(blocks, total=len(jobs), desc="paths", unit="block", disable=not progress))

    stats = _BlockStats()
    for block in results:
        stats.merge(block)

    discount = math.exp(-r * T)
    price = discount * stats.mean
    std_error = discount * math.sqrt(stats.m2 / (stats.count - 1)) / math.sqrt(stats.count)
    half_width = z * std_error
    result = McResult(
        price=price,
        std_error=std_error,
        ci_low=price - half_width,
        ci_high=price + half_width,
        paths=stats.count,
        seed=int(seed),
        confidence=float(confidence),
    )
    logger.info(f"✅ Monte Carlo price {price:.6f} ± {half_width:.6f}")
    return result
