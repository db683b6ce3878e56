#!/usr/bin/env python3
"""
Configuration loaders for quantization_core

Run configurations are flat YAML documents supplied by the user; experiment
definitions ship with the package in `experiments.yaml`.
"""

import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

from ..utils import load_yaml

logger = logging.getLogger(__name__)

EXPERIMENTS_PATH = Path(__file__).parent / "experiments.yaml"


def load_config(config_path: Union[str, Path]) -> Dict[str, Any]:
    """
    Load a run configuration from a YAML file

    Args:
        config_path: Path to configuration file

    Returns:
        Configuration dictionary ({} for an empty document)

    Raises:
        FileNotFoundError: If the file does not exist
        ValueError: If the document is not a key-value mapping
    """
    config = load_yaml(config_path)
    if not isinstance(config, dict):
        raise ValueError(f"Configuration {config_path} must be a key-value mapping")
    logger.info(f"Configuration loaded from {config_path}")
    return config


def load_experiments(config_path: Optional[Union[str, Path]] = None) -> Dict[str, Any]:
    """Load the experiment definitions (packaged file by default)"""
    if config_path is None:
        config_path = EXPERIMENTS_PATH
    return load_yaml(config_path)


def get_experiment(name: str, experiments: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """Look up one experiment by name"""
    experiments = experiments if experiments is not None else load_experiments()
    if name not in experiments:
        raise KeyError(f"Unknown experiment '{name}'. Choose from {sorted(experiments)}")
    return experiments[name]
