#!/usr/bin/env python3
"""
Diffusion Models

SDE coefficients b(t, x), sigma(t, x) of a one-dimensional diffusion, the
one-step Euler transition parameters, and the built-in models:

- brownian:        dX = dW
- black_scholes:   dX = r X dt + sigma |X| dW
- pseudo_cev:      dX = r X dt + theta |X|^(delta+1) / sqrt(1 + X^2) dW

Coefficients must broadcast over numpy arrays so a whole grid, or a whole
block of Monte Carlo paths, is stepped in one call. Lipschitz and linear
growth constants are declarative metadata consumed by the error bounds; they
are never verified here.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional, Union

import numpy as np

from .exceptions import ModelEvaluationError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]
Coefficient = Callable[[float, ArrayLike], ArrayLike]


@dataclass(frozen=True)
class DiffusionModel:
    """
    Drift/volatility pair with growth and Lipschitz metadata.

    Attributes:
        drift: b(t, x)
        vol: sigma(t, x) >= 0
        lin_growth_L: Linear growth constant L
        lip_b: Lipschitz constant of the drift
        lip_sigma: Lipschitz constant of the volatility
        name: Model name used in tree documents
        params: Model parameters used in tree documents
    """

    drift: Coefficient
    vol: Coefficient
    lin_growth_L: float = 0.0
    lip_b: float = 0.0
    lip_sigma: float = 0.0
    name: str = "custom"
    params: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        for label in ("lin_growth_L", "lip_b", "lip_sigma"):
            value = getattr(self, label)
            if not (value >= 0 and math.isfinite(value)):
                raise ValueError(f"{label} must be finite and nonnegative, got {value}")

    def describe(self) -> Dict[str, Any]:
        """Descriptor stored in tree documents"""
        return {"name": self.name, **{k: float(v) for k, v in self.params.items()}}


@dataclass(frozen=True)
class EulerParams:
    """Conditional mean m = x + dt b(t, x) and stdev v = sqrt(dt) sigma(t, x)"""

    m: ArrayLike
    v: ArrayLike


def _evaluate(fn: Coefficient, label: str, t: float, x: ArrayLike) -> ArrayLike:
    value = fn(t, x)
    value = np.broadcast_to(np.asarray(value, dtype=float), np.shape(x))
    if not np.all(np.isfinite(value)):
        raise ModelEvaluationError(f"{label}(t={t}, x) returned a non-finite value")
    return value


def euler_params(model: DiffusionModel, t: float, dt: float, x: ArrayLike) -> EulerParams:
    """
    One-step Euler transition parameters at state(s) x.

    Args:
        model: Diffusion model
        t: Current time t_k
        dt: Time step (> 0)
        x: State or array of states

    Returns:
        EulerParams with m = x + dt b(t, x), v = sqrt(dt) sigma(t, x)

    Raises:
        ValueError: If dt <= 0
        ModelEvaluationError: If a coefficient is not finite
    """
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    x_arr = np.asarray(x, dtype=float)
    b = _evaluate(model.drift, "drift", t, x_arr)
    sigma = _evaluate(model.vol, "vol", t, x_arr)
    if np.any(sigma < 0):
        raise ModelEvaluationError(f"vol(t={t}, x) returned a negative value")

    m = x_arr + dt * b
    v = math.sqrt(dt) * sigma
    if x_arr.ndim == 0:
        return EulerParams(m=float(m), v=float(v))
    return EulerParams(m=m, v=v)


def euler_step(model: DiffusionModel, t: float, dt: float, x: ArrayLike, z: ArrayLike) -> ArrayLike:
    """Euler operator E(x, z) = x + dt b(t, x) + sqrt(dt) sigma(t, x) z"""
    params = euler_params(model, t, dt, x)
    out = params.m + params.v * np.asarray(z, dtype=float)
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# Built-in models
# ---------------------------------------------------------------------------

def brownian() -> DiffusionModel:
    """Standard Brownian motion: b = 0, sigma = 1"""
    return DiffusionModel(
        drift=lambda t, x: np.zeros_like(np.asarray(x, dtype=float)),
        vol=lambda t, x: np.ones_like(np.asarray(x, dtype=float)),
        lin_growth_L=1.0,
        lip_b=0.0,
        lip_sigma=0.0,
        name="brownian",
    )


def black_scholes(r: float, sigma: float) -> DiffusionModel:
    """
    Black-Scholes dynamics dX = r X dt + sigma |X| dW.

    Args:
        r: Interest rate
        sigma: Volatility (> 0)
    """
    if not sigma > 0:
        raise ValueError(f"Black-Scholes sigma must be > 0, got {sigma}")
    return DiffusionModel(
        drift=lambda t, x: r * np.asarray(x, dtype=float),
        vol=lambda t, x: sigma * np.abs(np.asarray(x, dtype=float)),
        lin_growth_L=max(abs(r), sigma),
        lip_b=abs(r),
        lip_sigma=sigma,
        name="black_scholes",
        params={"r": r, "sigma": sigma},
    )


def pseudo_cev(r: float, theta: float, delta: float) -> DiffusionModel:
    """
    Pseudo-CEV local volatility dynamics
    dX = r X dt + theta |X|^(delta+1) / sqrt(1 + X^2) dW.

    The local volatility theta |x|^delta / sqrt(1 + x^2) is bounded by theta,
    so L = max(|r|, theta) bounds linear growth; the diffusion coefficient
    has derivative bounded by theta (1 + delta). Evaluated on |x| so the
    coefficient stays defined when a grid reaches negative states.

    Args:
        r: Interest rate
        theta: Volatility level (> 0)
        delta: Elasticity in (0, 1)
    """
    if not theta > 0:
        raise ValueError(f"pseudo-CEV theta must be > 0, got {theta}")
    if not (0.0 < delta < 1.0):
        raise ValueError(f"pseudo-CEV delta must lie in (0, 1), got {delta}")

    def vol(t, x):
        ax = np.abs(np.asarray(x, dtype=float))
        return theta * ax ** (delta + 1.0) / np.sqrt(1.0 + ax * ax)

    return DiffusionModel(
        drift=lambda t, x: r * np.asarray(x, dtype=float),
        vol=vol,
        lin_growth_L=max(abs(r), theta),
        lip_b=abs(r),
        lip_sigma=theta * (1.0 + delta),
        name="pseudo_cev",
        params={"r": r, "theta": theta, "delta": delta},
    )


BUILTIN_MODELS = {
    "brownian": brownian,
    "black_scholes": black_scholes,
    "pseudo_cev": pseudo_cev,
}


def builtin(name: str, **params: float) -> DiffusionModel:
    """
    Build a built-in model by name.

    Args:
        name: One of 'brownian', 'black_scholes', 'pseudo_cev' ('-' accepted for '_')
        **params: Model parameters (r, sigma) or (r, theta, delta)

    Raises:
        ValueError: Unknown model name, missing/extra parameters or parameters out of range
    """
    key = name.replace("-", "_").lower()
    if key not in BUILTIN_MODELS:
        raise ValueError(f"Unknown model '{name}'. Choose from {sorted(BUILTIN_MODELS)}")
    try:
        return BUILTIN_MODELS[key](**params)
    except TypeError as e:
        raise ValueError(f"Invalid parameters for model '{name}': {e}") from e


def model_from_descriptor(descriptor: Optional[Dict[str, Any]]) -> DiffusionModel:
    """Rebuild a built-in model from a tree-document descriptor"""
    if not descriptor or "name" not in descriptor:
        raise ValueError("Model descriptor must contain a 'name'")
    params = {k: float(v) for k, v in descriptor.items() if k != "name"}
    return builtin(descriptor["name"], **params)
