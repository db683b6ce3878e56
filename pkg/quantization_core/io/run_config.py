#!/usr/bin/env python3
"""
Run Configuration

Flat key-value run settings shared by the command-line commands.
Precedence, lowest to highest: built-in defaults < `--config` YAML file <
explicit command-line flags.

Budget specifications:
- "equal:N"     equal dispatching of N over levels 1..n
- "optimal:N"   optimal dispatching of N
- "const:M"     M points at every level 1..n
- "1,5,5,..."   explicit sizes N_0..N_n (a YAML list works too)
"""

import logging
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from ..config import load_config
from ..diffusion_model import DiffusionModel, builtin
from ..exceptions import ConfigError
from ..pricing import Payoff
from ..recursive_tree import dispatch_equal, optimal_sizes

logger = logging.getLogger(__name__)

MODEL_PARAMS = {
    "brownian": (),
    "black_scholes": ("r", "sigma"),
    "pseudo_cev": ("r", "theta", "delta"),
}


@dataclass(frozen=True)
class RunConfig:
    """Settings of one command-line run"""

    model: str = "pseudo_cev"
    r: float = 0.15
    sigma: float = 0.2
    theta: float = 0.5
    delta: float = 0.5
    x0: float = 100.0
    T: float = 1.0
    n: int = 120
    budget: Union[str, List[int]] = "const:400"
    nr_iters: int = 5
    payoff: str = "put"
    strike: float = 100.0
    seed: int = 42
    paths: int = 100_000
    out: Optional[str] = None
    keep_transitions: bool = True
    bound_lip: Optional[float] = None
    workers: Optional[int] = None

    @classmethod
    def keys(cls) -> List[str]:
        return [f.name for f in fields(cls)]

    @classmethod
    def resolve(
        cls,
        config_path: Optional[Union[str, Path]] = None,
        overrides: Optional[Dict[str, Any]] = None,
    ) -> "RunConfig":
        """
        Merge defaults, an optional YAML file and explicit overrides.

        Args:
            config_path: Flat YAML run configuration
            overrides: Values given on the command line; None entries are ignored

        Raises:
            ConfigError: Unknown keys, unreadable file or invalid values
        """
        values: Dict[str, Any] = {}
        if config_path is not None:
            try:
                values.update(load_config(config_path))
            except (OSError, ValueError) as e:
                raise ConfigError(f"Cannot read configuration {config_path}: {e}") from e
        if overrides:
            values.update({k: v for k, v in overrides.items() if v is not None})

        unknown = sorted(set(values) - set(cls.keys()))
        if unknown:
            raise ConfigError(f"Unknown configuration keys: {', '.join(unknown)}")

        config = replace(cls(), **values)
        config.validate()
        return config

    def validate(self) -> None:
        """Check value types and ranges"""
        try:
            for name in ("r", "sigma", "theta", "delta", "x0", "T", "strike"):
                object.__setattr__(self, name, float(getattr(self, name)))
            for name in ("n", "nr_iters", "seed", "paths"):
                object.__setattr__(self, name, int(getattr(self, name)))
            if self.bound_lip is not None:
                object.__setattr__(self, "bound_lip", float(self.bound_lip))
            if self.workers is not None:
                object.__setattr__(self, "workers", int(self.workers))
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Invalid configuration value: {e}") from e

        model = self.model.replace("-", "_").lower()
        if model not in MODEL_PARAMS:
            raise ConfigError(f"Unknown model '{self.model}'. Choose from {sorted(MODEL_PARAMS)}")
        object.__setattr__(self, "model", model)
        if self.n < 1:
            raise ConfigError(f"n must be >= 1, got {self.n}")
        if not self.T > 0:
            raise ConfigError(f"T must be > 0, got {self.T}")
        if self.nr_iters < 1:
            raise ConfigError(f"nr_iters must be >= 1, got {self.nr_iters}")
        if self.payoff not in ("put", "call"):
            raise ConfigError(f"payoff must be 'put' or 'call', got '{self.payoff}'")
        if self.workers is not None and self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")

    def build_model(self) -> DiffusionModel:
        params = {name: getattr(self, name) for name in MODEL_PARAMS[self.model]}
        try:
            return builtin(self.model, **params)
        except ValueError as e:
            raise ConfigError(str(e)) from e

    def build_payoff(self) -> Payoff:
        try:
            return Payoff(kind=self.payoff, strike=self.strike)
        except ValueError as e:
            raise ConfigError(str(e)) from e

    def sizes(self, model: Optional[DiffusionModel] = None) -> List[int]:
        """Grid sizes N_0..N_n from the budget specification"""
        model = model or self.build_model()
        return parse_budget(self.budget, self.n, model=model, x0=self.x0, T=self.T)


def parse_budget(
    spec: Union[str, List[int]],
    n: int,
    model: Optional[DiffusionModel] = None,
    x0: float = 0.0,
    T: float = 1.0,
) -> List[int]:
    """
    Turn a budget specification into grid sizes N_0..N_n.

    Raises:
        ConfigError: Malformed specification or sizes inconsistent with n
    """
    try:
        if isinstance(spec, (list, tuple)):
            sizes = [int(s) for s in spec]
        elif ":" in str(spec):
            mode, _, amount = str(spec).partition(":")
            amount = int(amount)
            mode = mode.strip().lower()
            if mode == "equal":
                sizes = dispatch_equal(amount, n)
            elif mode == "optimal":
                if model is None:
                    raise ConfigError("optimal dispatching needs a model")
                sizes = optimal_sizes(model, x0, T, n, amount)
            elif mode == "const":
                if amount < 1:
                    raise ConfigError(f"const size must be >= 1, got {amount}")
                sizes = [1] + [amount] * n
            else:
                raise ConfigError(f"Unknown budget mode '{mode}' (equal, optimal, const)")
        else:
            sizes = [int(s) for s in str(spec).split(",") if s.strip()]
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(f"Invalid budget '{spec}': {e}") from e

    if len(sizes) != n + 1:
        raise ConfigError(f"Budget gives {len(sizes)} sizes, need n + 1 = {n + 1}")
    if sizes[0] != 1 or min(sizes) < 1:
        raise ConfigError(f"Budget sizes must start with 1 and stay positive, got {sizes[:5]}...")
    return sizes


def parse_range(spec: str) -> List[int]:
    """
    Integer range 'start:stop:step' with an inclusive stop, or a comma list.

    '250:5000:50' -> [250, 300, ..., 5000]
    """
    try:
        if ":" in spec:
            parts = [int(p) for p in spec.split(":")]
            if len(parts) == 2:
                parts.append(1)
            start, stop, step = parts
            if step < 1 or stop < start:
                raise ValueError("need start <= stop and step >= 1")
            return list(range(start, stop + 1, step))
        return [int(p) for p in spec.split(",") if p.strip()]
    except ValueError as e:
        raise ConfigError(f"Invalid range '{spec}': {e}") from e
