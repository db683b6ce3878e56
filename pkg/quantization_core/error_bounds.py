#!/usr/bin/env python3
"""
Error Bounds

Constants of the non-asymptotic L^2 error bound of recursive marginal
quantization and the bound itself:

    ||X_bar_k - X_hat_k||_2 <= K * sum_{l=0}^{k} a_l(t_k) N_l^(-1/d)

with, for p in (2, 3],

    kappa_p   = (p+1)(p-2)/2 + 2 p L
    K_p       = 2^(p-1) L^p (1 + p + dt^(p/2-1)) E|Z|^p
    C_{b,s}   = [b]_Lip + [sigma]_Lip^2 / 2
    a_l(t_k)  = e^(C (t_k - t_l)/p) [ e^((kappa+K) t_l) |x0|^p
                + (e^(kappa dt) L + K_p)/(kappa + K_p) (e^((kappa+K) t_l) - 1) ]^(1/p)

The universal constant K is not known numerically; it defaults to 1 and
cancels in optimal dispatching.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Sequence

import numpy as np

from .diffusion_model import DiffusionModel
from .gaussian_kernel import abs_moment

logger = logging.getLogger(__name__)

READINGS = ("statement", "proof")


@dataclass(frozen=True)
class BoundParams:
    """
    Inputs of the error bound constants.

    Attributes:
        p: Moment order 2 + eta in (2, 3]
        L: Linear growth constant
        lip_b: Lipschitz constant of the drift
        lip_sigma: Lipschitz constant of the volatility
        dt: Time step
        x0: Initial state
        d: State dimension (only enters through N^(-1/d))
        K_universal: Universal quantization constant
    """

    p: float = 3.0
    L: float = 0.0
    lip_b: float = 0.0
    lip_sigma: float = 0.0
    dt: float = 1.0
    x0: float = 0.0
    d: int = 1
    K_universal: float = 1.0

    def __post_init__(self):
        if not (2.0 < self.p <= 3.0):
            raise ValueError(f"p must lie in (2, 3], got {self.p}")
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if min(self.L, self.lip_b, self.lip_sigma) < 0:
            raise ValueError("L and Lipschitz constants must be nonnegative")
        if self.d < 1 or not self.K_universal > 0:
            raise ValueError("d must be >= 1 and K_universal > 0")

    @classmethod
    def from_model(
        cls,
        model: DiffusionModel,
        dt: float,
        x0: float,
        p: float = 3.0,
        d: int = 1,
        K_universal: float = 1.0,
    ) -> "BoundParams":
        """Read the declarative constants of a model"""
        return cls(
            p=p,
            L=model.lin_growth_L,
            lip_b=model.lip_b,
            lip_sigma=model.lip_sigma,
            dt=dt,
            x0=x0,
            d=d,
            K_universal=K_universal,
        )


def kappa_p(params: BoundParams) -> float:
    """kappa_p = (p+1)(p-2)/2 + 2 p L"""
    p = params.p
    return (p + 1.0) * (p - 2.0) / 2.0 + 2.0 * p * params.L


def big_k_p(params: BoundParams) -> float:
    """K_p = 2^(p-1) L^p (1 + p + dt^(p/2-1)) E|Z|^p"""
    p = params.p
    return 2.0 ** (p - 1.0) * params.L ** p * (1.0 + p + params.dt ** (p / 2.0 - 1.0)) * abs_moment(p)


def c_b_sigma(params: BoundParams) -> float:
    """C_{b,sigma} = [b]_Lip + [sigma]_Lip^2 / 2"""
    return params.lip_b + 0.5 * params.lip_sigma ** 2


def _bracket(t_ell: float, params: BoundParams) -> float:
    kappa = kappa_p(params)
    big_k = big_k_p(params)
    rate = kappa + big_k
    if rate <= 0:
        raise ValueError("kappa_p + K_p must be positive")
    growth = math.exp(rate * t_ell)
    return growth * abs(params.x0) ** params.p + (
        (math.exp(kappa * params.dt) * params.L + big_k) / rate * (growth - 1.0)
    )


def a_coeff(ell: int, t_k: float, params: BoundParams, reading: str = "statement") -> float:
    """
    Error coefficient a_l(t_k).

    Args:
        ell: Level index l (t_l = l dt)
        t_k: Time of the level whose error is bounded (t_l <= t_k)
        params: Bound parameters
        reading: 'statement' applies the 1/p power once; 'proof' applies it
            a second time, giving the flatter coefficient profile

    Returns:
        a_l(t_k) >= 0
    """
    if reading not in READINGS:
        raise ValueError(f"reading must be one of {READINGS}, got '{reading}'")
    t_ell = ell * params.dt
    if ell < 0 or t_ell > t_k * (1.0 + 1e-12) + 1e-15:
        raise ValueError(f"Level {ell} (t={t_ell}) lies after t_k={t_k}")

    p = params.p
    value = math.exp(c_b_sigma(params) * (t_k - t_ell) / p) * _bracket(t_ell, params) ** (1.0 / p)
    if reading == "proof":
        value = value ** (1.0 / p)
    return value


def uniform_a_bound(T: float, params: BoundParams) -> float:
    """
    Bound on every a_l(t_k), k, l <= n, independent of the number of steps:
    e^(C T/p) [ e^((kappa+K)T)|x0|^p + (e^(kappa T) L + K)/(kappa+K) (e^((kappa+K)T) - 1) ]^(1/p)
    """
    kappa = kappa_p(params)
    big_k = big_k_p(params)
    rate = kappa + big_k
    p = params.p
    bracket = math.exp(rate * T) * abs(params.x0) ** p + (
        (math.exp(kappa * T) * params.L + big_k) / rate * (math.exp(rate * T) - 1.0)
    )
    return math.exp(c_b_sigma(params) * T / p) * bracket ** (1.0 / p)


def brownian_a(ell: int, dt: float) -> float:
    """
    Coefficients specialized to Brownian motion with eta = 1:
    a_l = [sqrt(2/pi) (4 + sqrt(dt)) (e^(2 t_l) - 1)]^(1/3)
    """
    if ell < 0 or not dt > 0:
        raise ValueError(f"Need ell >= 0 and dt > 0, got ell={ell}, dt={dt}")
    t_ell = ell * dt
    return (math.sqrt(2.0 / math.pi) * (4.0 + math.sqrt(dt)) * math.expm1(2.0 * t_ell)) ** (1.0 / 3.0)


def theorem_bound(
    k: int,
    sizes: Sequence[int],
    t_grid: Sequence[float],
    params: BoundParams,
    reading: str = "statement",
) -> float:
    """
    Error bound K * sum_{l=0}^{k} a_l(t_k) N_l^(-1/d).

    Args:
        k: Level whose error is bounded
        sizes: Grid sizes N_0..N_n
        t_grid: Times t_0..t_n
        params: Bound parameters
        reading: Exponent reading of a_l
    """
    if k < 0 or k >= len(sizes) or k >= len(t_grid):
        raise ValueError(f"Level {k} outside the size/time grids")
    sizes_arr = np.asarray(sizes[: k + 1], dtype=float)
    if np.any(sizes_arr <= 0):
        raise ValueError("Grid sizes must be positive")
    t_k = float(t_grid[k])
    total = sum(
        a_coeff(ell, t_k, params, reading) * sizes_arr[ell] ** (-1.0 / params.d) for ell in range(k + 1)
    )
    return params.K_universal * total


def dispatch_bound(N: int, a: Sequence[float], d: int = 1, K_universal: float = 1.0) -> float:
    """Bound reached by optimal dispatching: K N^(-1/d) (sum a_l^(d/(d+1)))^(1+1/d)"""
    powered = np.asarray(a, dtype=float) ** (d / (d + 1.0))
    return K_universal * N ** (-1.0 / d) * float(powered.sum()) ** (1.0 + 1.0 / d)


def constants_table(params: BoundParams) -> Dict[str, float]:
    """The constants entering the bound, keyed by name"""
    return {
        "p": params.p,
        "L": params.L,
        "dt": params.dt,
        "x0": params.x0,
        "kappa_p": kappa_p(params),
        "K_p": big_k_p(params),
        "C_b_sigma": c_b_sigma(params),
        "K_universal": params.K_universal,
    }
