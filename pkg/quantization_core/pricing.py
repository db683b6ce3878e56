#!/usr/bin/env python3
"""
Pricing on Quantization Trees

European payoffs priced on the terminal quantization,
    price = e^(-rT) sum_i f(x_i^n) P(X_hat_n = x_i^n),
one-step conditional expectations along the tree, and the Black-Scholes
closed forms used to validate both.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.stats import norm

from .recursive_tree import QuantizationTree

logger = logging.getLogger(__name__)

PAYOFF_KINDS = ("put", "call", "custom")


@dataclass(frozen=True)
class Payoff:
    """
    Vectorized payoff function.

    Attributes:
        kind: 'put', 'call' or 'custom'
        strike: Strike K (> 0) for puts and calls
        fn: Function of the terminal state for custom payoffs
    """

    kind: str
    strike: Optional[float] = None
    fn: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        if self.kind not in PAYOFF_KINDS:
            raise ValueError(f"Payoff kind must be one of {PAYOFF_KINDS}, got '{self.kind}'")
        if self.kind == "custom":
            if self.fn is None:
                raise ValueError("Custom payoffs need a function")
        elif self.strike is None or not self.strike > 0:
            raise ValueError(f"{self.kind} payoff needs a strike > 0, got {self.strike}")

    @classmethod
    def put(cls, strike: float) -> "Payoff":
        return cls(kind="put", strike=float(strike))

    @classmethod
    def call(cls, strike: float) -> "Payoff":
        return cls(kind="call", strike=float(strike))

    @classmethod
    def custom(cls, fn: Callable[[np.ndarray], np.ndarray]) -> "Payoff":
        return cls(kind="custom", fn=fn)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "put":
            out = np.maximum(self.strike - x, 0.0)
        elif self.kind == "call":
            out = np.maximum(x - self.strike, 0.0)
        else:
            out = np.broadcast_to(np.asarray(self.fn(x), dtype=float), x.shape)
        return float(out) if np.ndim(out) == 0 else out

    def describe(self) -> str:
        if self.kind == "custom":
            return "custom"
        return f"{self.kind}(K={self.strike:g})"


def price_european(tree: QuantizationTree, payoff: Callable, r: float) -> float:
    """
    Discounted expectation of a payoff under the terminal quantization.

    Args:
        tree: Quantization tree
        payoff: Vectorized function of the terminal state (e.g. a Payoff)
        r: Continuously compounded rate

    Returns:
        e^(-rT) sum_i payoff(x_i^n) w_i^n
    """
    terminal = tree.terminal
    values = np.asarray(payoff(terminal.grid.points), dtype=float)
    price = math.exp(-r * tree.T) * float(np.dot(values, terminal.weights))
    logger.debug(f"Priced {getattr(payoff, 'kind', 'payoff')} on N={terminal.size} terminal points: {price:.6f}")
    return price


def conditional_expectation(tree: QuantizationTree, k: int, f: Callable) -> np.ndarray:
    """
    One-step conditional expectations E[f(X_hat_{k+1}) | X_hat_k = x_i^k].

    Args:
        tree: Tree built with transitions
        k: Level index in 0..n-1
        f: Vectorized function of the level k+1 states

    Returns:
        Vector of size N_k: transition_{k+1} @ f(x^{k+1})

    Raises:
        ValueError: If k is out of range or the transitions were dropped
    """
    if not 0 <= k < tree.n:
        raise ValueError(f"Level k must lie in [0, {tree.n - 1}], got {k}")
    nxt = tree.levels[k + 1]
    if nxt.transition_from_prev is None:
        raise ValueError(f"Tree was built without transitions (level {k + 1} has none)")
    values = np.asarray(f(nxt.grid.points), dtype=float)
    values = np.broadcast_to(values, nxt.grid.points.shape)
    return nxt.transition_from_prev @ values


def lipschitz_error_bound(tree: QuantizationTree, lip: float, r: float) -> float:
    """
    Quantization error bound of a Lipschitz payoff price:
    |E f(X_bar_n) - E f(X_hat_n)| e^(-rT) <= e^(-rT) [f]_Lip sqrt(D_n)
    """
    if lip < 0:
        raise ValueError(f"Lipschitz constant must be >= 0, got {lip}")
    return math.exp(-r * tree.T) * lip * tree.terminal_error()


# ---------------------------------------------------------------------------
# Black-Scholes closed forms
# ---------------------------------------------------------------------------

def _d_plus_minus(s0: float, strike: float, r: float, sigma: float, T: float):
    if not (s0 > 0 and sigma > 0 and T > 0):
        raise ValueError(f"Need s0, sigma, T > 0, got s0={s0}, sigma={sigma}, T={T}")
    sqrt_t = math.sqrt(T)
    d_plus = (math.log(s0 / strike) + (r + 0.5 * sigma ** 2) * T) / (sigma * sqrt_t)
    return d_plus, d_plus - sigma * sqrt_t


def bs_put_closed_form(s0: float, strike: float, r: float, sigma: float, T: float) -> float:
    """
    Black-Scholes European put: K e^(-rT) N(-d2) - s0 N(-d1).

    A nonpositive strike gives a worthless put.
    """
    if strike <= 0:
        return 0.0
    d_plus, d_minus = _d_plus_minus(s0, strike, r, sigma, T)
    return float(strike * math.exp(-r * T) * norm.cdf(-d_minus) - s0 * norm.cdf(-d_plus))


def bs_call_closed_form(s0: float, strike: float, r: float, sigma: float, T: float) -> float:
    """Black-Scholes European call: s0 N(d1) - K e^(-rT) N(d2)"""
    if strike <= 0:
        # Worthless put, so the call is the forward by parity
        return float(s0 - strike * math.exp(-r * T))
    d_plus, d_minus = _d_plus_minus(s0, strike, r, sigma, T)
    return float(s0 * norm.cdf(d_plus) - strike * math.exp(-r * T) * norm.cdf(d_minus))
