import math

import numpy as np
import pytest

from quantization_core.exceptions import ConvergenceError
from quantization_core.gaussian_kernel import (
    abs_moment,
    quantile_seed,
    regular_quantization_error,
    std_normal_cdf,
    std_normal_pdf,
    std_normal_ppf,
    std_normal_quantizer,
)


def test_pdf_values():
    assert std_normal_pdf(0.0) == pytest.approx(0.3989422804014327, rel=1e-15)
    assert std_normal_pdf(1.0) == pytest.approx(0.24197072451914337, rel=1e-14)
    assert std_normal_pdf(1.5) == std_normal_pdf(-1.5)


def test_pdf_is_vectorized():
    z = np.array([-2.0, 0.0, 2.0])
    out = std_normal_pdf(z)
    assert out.shape == (3,)
    assert out[0] == out[2]


def test_cdf_values():
    assert std_normal_cdf(0.0) == 0.5
    assert std_normal_cdf(-np.inf) == 0.0
    assert std_normal_cdf(np.inf) == 1.0
    assert std_normal_cdf(1.959963984540054) == pytest.approx(0.975, abs=1e-15)
    # far tail keeps relative precision
    assert std_normal_cdf(-10.0) == pytest.approx(7.619853024160527e-24, rel=1e-12)


def test_cdf_symmetry():
    z = np.linspace(-6, 6, 41)
    np.testing.assert_allclose(std_normal_cdf(z) + std_normal_cdf(-z), 1.0, atol=1e-15)


def test_ppf_inverts_cdf():
    u = np.array([1e-10, 0.025, 0.3, 0.5, 0.9, 0.975])
    np.testing.assert_allclose(std_normal_cdf(std_normal_ppf(u)), u, rtol=1e-12)
    assert std_normal_ppf(0.975) == pytest.approx(1.959963984540054, rel=1e-14)


def test_abs_moment():
    assert abs_moment(3.0) == pytest.approx(2.0 * math.sqrt(2.0 / math.pi), rel=1e-14)
    assert abs_moment(2.5) == pytest.approx(2 ** 1.25 * math.gamma(1.75) / math.sqrt(math.pi), rel=1e-14)


@pytest.mark.parametrize("p", [2.0, 1.0, 3.5])
def test_abs_moment_rejects_order_outside_range(p):
    with pytest.raises(ValueError):
        abs_moment(p)


def test_quantile_seed_is_sorted_and_symmetric():
    seed = quantile_seed(7)
    assert np.all(np.diff(seed) > 0)
    np.testing.assert_allclose(seed, -seed[::-1], atol=1e-15)


def test_single_point_quantizer():
    q = std_normal_quantizer(1)
    assert q.points.tolist() == [0.0]
    assert q.weights.tolist() == [1.0]
    assert q.distortion == pytest.approx(1.0, abs=1e-14)


def test_two_point_quantizer():
    q = std_normal_quantizer(2)
    c = math.sqrt(2.0 / math.pi)
    np.testing.assert_allclose(q.points, [-c, c], atol=1e-12)
    np.testing.assert_allclose(q.weights, [0.5, 0.5], atol=1e-15)
    assert q.distortion == pytest.approx(1.0 - 2.0 / math.pi, abs=1e-12)


@pytest.mark.parametrize(
    "size,outer,distortion",
    [(3, 1.2240, 0.1902), (4, 1.5104, 0.1175)],
)
def test_known_optimal_quantizers(size, outer, distortion):
    q = std_normal_quantizer(size)
    assert q.points[-1] == pytest.approx(outer, abs=1e-4)
    assert q.distortion == pytest.approx(distortion, abs=1e-4)


@pytest.mark.parametrize("size", [5, 10, 40, 100])
def test_quantizer_invariants(size):
    q = std_normal_quantizer(size)
    assert q.size == size
    assert np.all(np.diff(q.points) > 0)
    np.testing.assert_allclose(q.points, -q.points[::-1], atol=1e-9)
    assert q.weights.sum() == pytest.approx(1.0, abs=1e-12)
    assert q.distortion >= 0
    assert q.residual <= 1e-10


def test_quantizer_distortion_decreases_with_size():
    values = [std_normal_quantizer(size).distortion for size in range(1, 21)]
    assert all(a > b for a, b in zip(values, values[1:]))
    assert std_normal_quantizer(50).distortion < values[-1]


@pytest.mark.parametrize("size", [1, 2, 7, 20, 64])
def test_quantizer_preserves_the_mean(size):
    q = std_normal_quantizer(size)
    assert abs(float(q.weights @ q.points)) <= 1e-10


def test_cdf_differences_match_pdf():
    h = 1e-5
    for z in range(-3, 4):
        slope = (std_normal_cdf(z + h) - std_normal_cdf(z - h)) / (2.0 * h)
        assert slope == pytest.approx(std_normal_pdf(float(z)), rel=1e-6)


def test_quantizer_is_cached_and_read_only():
    q = std_normal_quantizer(12)
    assert std_normal_quantizer(12) is q
    with pytest.raises(ValueError):
        q.points[0] = 0.0


@pytest.mark.parametrize("size,iters", [(0, 10), (5, 0)])
def test_quantizer_rejects_bad_arguments(size, iters):
    with pytest.raises(ValueError):
        std_normal_quantizer(size, iters)


def test_quantizer_without_enough_iterations_raises():
    with pytest.raises(ConvergenceError):
        std_normal_quantizer(60, 1)


def test_regular_quantization_error_scales_with_horizon():
    assert regular_quantization_error(2, 4.0) == pytest.approx(2.0 * math.sqrt(1.0 - 2.0 / math.pi), rel=1e-12)
    with pytest.raises(ValueError):
        regular_quantization_error(2, 0.0)
