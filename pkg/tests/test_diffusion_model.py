import math

import numpy as np
import pytest

from quantization_core.diffusion_model import (
    DiffusionModel,
    black_scholes,
    brownian,
    builtin,
    euler_params,
    euler_step,
    model_from_descriptor,
    pseudo_cev,
)
from quantization_core.exceptions import ModelEvaluationError


def test_brownian_euler_params():
    params = euler_params(brownian(), 0.0, 0.04, 1.5)
    assert params.m == 1.5
    assert params.v == pytest.approx(0.2, rel=1e-15)


def test_black_scholes_euler_params():
    params = euler_params(black_scholes(0.15, 0.2), 0.0, 0.01, 100.0)
    assert params.m == pytest.approx(100.15, rel=1e-15)
    assert params.v == pytest.approx(2.0, rel=1e-15)


def test_black_scholes_vol_is_nonnegative_for_negative_states():
    params = euler_params(black_scholes(0.15, 0.2), 0.0, 0.01, -5.0)
    assert params.v > 0


def test_pseudo_cev_euler_params():
    params = euler_params(pseudo_cev(0.15, 0.5, 0.5), 0.0, 1.0 / 120.0, 100.0)
    assert params.m == pytest.approx(100.125, rel=1e-15)
    expected = math.sqrt(1.0 / 120.0) * 0.5 * 100.0 ** 1.5 / math.sqrt(1.0 + 100.0 ** 2)
    assert params.v == pytest.approx(expected, rel=1e-14)
    assert params.v == pytest.approx(0.456413, abs=1e-6)


def test_black_scholes_tracks_pseudo_cev_at_the_money():
    # sigma = theta x0^(delta - 1) pairs the two models at x = 100
    dt = 1.0 / 120.0
    bs = euler_params(black_scholes(0.15, 0.05), 0.0, dt, 100.0)
    cev = euler_params(pseudo_cev(0.15, 0.5, 0.5), 0.0, dt, 100.0)
    assert bs.m == pytest.approx(cev.m, rel=1e-15)
    assert abs(bs.v - cev.v) / bs.v < 1e-3


def test_euler_params_broadcast_over_grids():
    x = np.array([90.0, 100.0, 110.0])
    params = euler_params(pseudo_cev(0.15, 0.7, 0.5), 0.2, 0.01, x)
    assert params.m.shape == (3,)
    assert params.v.shape == (3,)
    for i, xi in enumerate(x):
        single = euler_params(pseudo_cev(0.15, 0.7, 0.5), 0.2, 0.01, xi)
        assert params.m[i] == single.m
        assert params.v[i] == single.v


def test_brownian_params_broadcast():
    params = euler_params(brownian(), 0.0, 0.25, np.zeros(4))
    np.testing.assert_array_equal(params.v, np.full(4, 0.5))


def test_euler_step():
    model = black_scholes(0.1, 0.3)
    x = euler_step(model, 0.0, 0.01, 50.0, 1.5)
    assert x == pytest.approx(50.0 + 0.01 * 5.0 + 0.1 * 0.3 * 50.0 * 1.5, rel=1e-14)
    paths = euler_step(model, 0.0, 0.01, np.full(3, 50.0), np.array([-1.0, 0.0, 1.0]))
    assert paths[1] == pytest.approx(50.05, rel=1e-15)


@pytest.mark.parametrize("dt", [0.0, -0.1])
def test_euler_params_rejects_nonpositive_dt(dt):
    with pytest.raises(ValueError):
        euler_params(brownian(), 0.0, dt, 0.0)


def test_non_finite_coefficient_raises():
    model = DiffusionModel(drift=lambda t, x: np.log(x), vol=lambda t, x: np.ones_like(x))
    with np.errstate(divide="ignore"):
        with pytest.raises(ModelEvaluationError):
            euler_params(model, 0.0, 0.1, np.array([0.0, 1.0]))


def test_negative_vol_raises():
    model = DiffusionModel(drift=lambda t, x: 0.0 * x, vol=lambda t, x: -np.ones_like(x))
    with pytest.raises(ModelEvaluationError):
        euler_params(model, 0.0, 0.1, np.array([1.0]))


def test_model_metadata():
    bs = black_scholes(-0.05, 0.3)
    assert bs.lin_growth_L == 0.3
    assert bs.lip_b == 0.05
    cev = pseudo_cev(0.15, 4.0, 0.5)
    assert cev.lin_growth_L == 4.0
    assert cev.lip_sigma == pytest.approx(6.0)
    assert brownian().lin_growth_L == 1.0


@pytest.mark.parametrize(
    "factory,args",
    [
        (black_scholes, (0.1, 0.0)),
        (pseudo_cev, (0.1, 0.0, 0.5)),
        (pseudo_cev, (0.1, 0.5, 1.0)),
        (pseudo_cev, (0.1, 0.5, 0.0)),
    ],
)
def test_invalid_model_parameters(factory, args):
    with pytest.raises(ValueError):
        factory(*args)


def test_negative_metadata_rejected():
    with pytest.raises(ValueError):
        DiffusionModel(drift=lambda t, x: x, vol=lambda t, x: x, lin_growth_L=-1.0)


def test_builtin_by_name():
    model = builtin("pseudo-cev", r=0.15, theta=0.7, delta=0.5)
    assert model.name == "pseudo_cev"
    assert builtin("BROWNIAN").name == "brownian"


@pytest.mark.parametrize(
    "name,params",
    [("heston", {}), ("black_scholes", {"r": 0.1}), ("brownian", {"sigma": 1.0})],
)
def test_builtin_rejects_unknown_names_and_params(name, params):
    with pytest.raises(ValueError):
        builtin(name, **params)


def test_descriptor_rebuilds_model():
    model = pseudo_cev(0.15, 0.7, 0.5)
    descriptor = model.describe()
    assert descriptor == {"name": "pseudo_cev", "r": 0.15, "theta": 0.7, "delta": 0.5}
    rebuilt = model_from_descriptor(descriptor)
    x = np.array([80.0, 120.0])
    np.testing.assert_array_equal(rebuilt.vol(0.0, x), model.vol(0.0, x))


def test_descriptor_without_name():
    with pytest.raises(ValueError):
        model_from_descriptor({"r": 0.1})
