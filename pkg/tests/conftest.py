"""Shared fixtures for the quantization_core test suite"""

import numpy as np
import pytest

from quantization_core.diffusion_model import black_scholes, brownian, pseudo_cev
from quantization_core.recursive_tree import build_tree


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)


@pytest.fixture(scope="session")
def brownian_tree():
    """Brownian motion from 0, five steps to T = 1, eight points per level"""
    return build_tree(brownian(), 0.0, 1.0, 5, [1, 8, 8, 8, 8, 8], nr_iters=20)


@pytest.fixture(scope="session")
def bs_tree():
    """Black-Scholes r=0.15, sigma=0.2, ten steps, varying sizes"""
    sizes = [1, 6, 8, 10, 12, 14, 16, 18, 20, 20, 20]
    return build_tree(black_scholes(0.15, 0.2), 100.0, 1.0, 10, sizes, nr_iters=10)


@pytest.fixture(scope="session")
def cev_tree():
    """Pseudo-CEV r=0.15, theta=0.7, delta=0.5, four steps"""
    return build_tree(pseudo_cev(0.15, 0.7, 0.5), 100.0, 1.0, 4, [1, 7, 7, 5, 9], nr_iters=10)


@pytest.fixture(params=["brownian_tree", "bs_tree", "cev_tree"])
def any_tree(request):
    return request.getfixturevalue(request.param)
