"""
Exception hierarchy for quantization_core.

Library code raises these; the command-line layer turns them into a one-line
diagnostic and a nonzero exit status.
"""

from typing import Optional


class QuantizationError(Exception):
    """Base class for every error raised by quantization_core"""


class ModelEvaluationError(QuantizationError, ValueError):
    """Drift or volatility returned a non-finite value"""


class SingularHessianError(QuantizationError, ArithmeticError):
    """Zero or near-zero pivot while solving the tridiagonal Newton system"""

    def __init__(self, message: str, iteration: Optional[int] = None):
        if iteration is not None:
            message = f"{message} (iteration {iteration})"
        super().__init__(message)
        self.iteration = iteration


class OrderingError(QuantizationError):
    """Grid ordering could not be restored by halving the Newton step"""

    def __init__(self, message: str, iteration: Optional[int] = None):
        if iteration is not None:
            message = f"{message} (iteration {iteration})"
        super().__init__(message)
        self.iteration = iteration


class ConvergenceError(QuantizationError):
    """An iterative solve stopped with a residual above its tolerance"""

    def __init__(self, message: str, residual: float, level: Optional[int] = None):
        prefix = f"level {level}: " if level is not None else ""
        super().__init__(f"{prefix}{message} (residual {residual:.3e})")
        self.residual = residual
        self.level = level


class TreeSchemaError(QuantizationError, ValueError):
    """A tree document violates the schema; `path` locates the offending field"""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class ConfigError(QuantizationError, ValueError):
    """Invalid run configuration"""
