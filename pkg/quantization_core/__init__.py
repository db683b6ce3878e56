"""
Quantization Core Module

Recursive marginal quantization of the Euler scheme of one-dimensional
diffusions: optimal grids, weights and transition matrices built level by
level with Newton-Raphson, European option pricing on the resulting tree,
error bounds and a seeded Monte Carlo baseline.

The command-line interface and tree storage live in `quantization_core.io`.
"""

from .diffusion_model import DiffusionModel, EulerParams, black_scholes, brownian, builtin, euler_params, euler_step, pseudo_cev
from .distortion_engine import GaussianMixture, Grid, NewtonResult, distortion, gradient, hessian, newton_solve
from .error_bounds import BoundParams, a_coeff, brownian_a, theorem_bound
from .exceptions import (
    ConfigError,
    ConvergenceError,
    ModelEvaluationError,
    OrderingError,
    QuantizationError,
    SingularHessianError,
    TreeSchemaError,
)
from .gaussian_kernel import StdNormalQuantizer, std_normal_cdf, std_normal_pdf, std_normal_quantizer
from .monte_carlo import McResult, mc_price
from .pricing import Payoff, bs_call_closed_form, bs_put_closed_form, conditional_expectation, price_european
from .recursive_tree import Level, QuantizationTree, build_tree, dispatch_equal, dispatch_optimal, optimal_sizes

__all__ = [
    'DiffusionModel', 'EulerParams', 'black_scholes', 'brownian', 'builtin', 'euler_params', 'euler_step', 'pseudo_cev',
    'GaussianMixture', 'Grid', 'NewtonResult', 'distortion', 'gradient', 'hessian', 'newton_solve',
    'BoundParams', 'a_coeff', 'brownian_a', 'theorem_bound',
    'ConfigError', 'ConvergenceError', 'ModelEvaluationError', 'OrderingError', 'QuantizationError',
    'SingularHessianError', 'TreeSchemaError',
    'StdNormalQuantizer', 'std_normal_cdf', 'std_normal_pdf', 'std_normal_quantizer',
    'McResult', 'mc_price',
    'Payoff', 'bs_call_closed_form', 'bs_put_closed_form', 'conditional_expectation', 'price_european',
    'Level', 'QuantizationTree', 'build_tree', 'dispatch_equal', 'dispatch_optimal', 'optimal_sizes',
]
