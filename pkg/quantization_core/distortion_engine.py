#!/usr/bin/env python3
"""
Distortion Engine

Quadratic distortion of a one-dimensional grid against a finite Gaussian
mixture, with its gradient and tridiagonal Hessian in closed form, and the
safeguarded Newton-Raphson iteration built on them.

Conventions:
- Gradient and Hessian are those of D/2 (the common factor 2 of the true
  gradient is dropped from both, which leaves the Newton direction unchanged).
- Voronoi cells are (x_{j-1/2}, x_{j+1/2}] with x_{1/2} = -inf and
  x_{N+1/2} = +inf; cdf/pdf at the infinite ends are the constants 0/1 and 0.
- A component with zero stdev is a Dirac mass at its mean: it contributes
  p (m - x_j*)^2 to the distortion, p (x_j* - m) to the gradient and p to the
  Hessian diagonal of its owning cell j*.
"""

import logging
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy import linalg

from .exceptions import OrderingError, SingularHessianError
from .gaussian_kernel import std_normal_cdf, std_normal_pdf

logger = logging.getLogger(__name__)

MAX_HALVINGS = 30
PROBABILITY_TOLERANCE = 1e-12
# Relative slack when comparing distortions that differ only by rounding
DISTORTION_SLACK = 1e-13


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Grid:
    """Strictly increasing finite point set x_1 < ... < x_N"""

    points: np.ndarray

    def __post_init__(self):
        points = np.array(self.points, dtype=float).reshape(-1)
        if points.size == 0:
            raise ValueError("A grid needs at least one point")
        if not np.all(np.isfinite(points)):
            raise ValueError("Grid points must be finite")
        if np.any(np.diff(points) <= 0):
            raise ValueError("Grid points must be strictly increasing")
        points.setflags(write=False)
        object.__setattr__(self, "points", points)

    @property
    def size(self) -> int:
        return int(self.points.size)

    def __len__(self) -> int:
        return self.size

    def interior_midpoints(self) -> np.ndarray:
        """(x_j + x_{j+1}) / 2 for j = 1..N-1"""
        return 0.5 * (self.points[:-1] + self.points[1:])


@dataclass(frozen=True, eq=False)
class GaussianMixture:
    """
    Finite mixture sum_i p_i N(m_i, v_i^2).

    Attributes:
        means: m_i
        stdevs: v_i >= 0 (zero means a Dirac mass at m_i)
        probs: p_i, summing to 1
    """

    means: np.ndarray
    stdevs: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        means = np.array(self.means, dtype=float).reshape(-1)
        stdevs = np.array(self.stdevs, dtype=float).reshape(-1)
        probs = np.array(self.probs, dtype=float).reshape(-1)
        if not (means.size == stdevs.size == probs.size) or means.size == 0:
            raise ValueError("Mixture needs matching, nonempty means/stdevs/probs")
        if not (np.all(np.isfinite(means)) and np.all(np.isfinite(stdevs)) and np.all(np.isfinite(probs))):
            raise ValueError("Mixture parameters must be finite")
        if np.any(stdevs < 0):
            raise ValueError("Mixture stdevs must be nonnegative")
        if np.any(probs < 0):
            raise ValueError("Mixture probabilities must be nonnegative")
        if abs(probs.sum() - 1.0) > PROBABILITY_TOLERANCE:
            raise ValueError(f"Mixture probabilities sum to {probs.sum():.15f}, expected 1")
        for label, arr in (("means", means), ("stdevs", stdevs), ("probs", probs)):
            arr.setflags(write=False)
            object.__setattr__(self, label, arr)

    @classmethod
    def single(cls, mean: float, stdev: float) -> "GaussianMixture":
        return cls(means=[mean], stdevs=[stdev], probs=[1.0])

    @property
    def size(self) -> int:
        return int(self.means.size)

    def mean(self) -> float:
        return float(self.probs @ self.means)

    def variance(self) -> float:
        m = self.mean()
        return float(self.probs @ (self.stdevs ** 2 + (self.means - m) ** 2))


@dataclass(frozen=True, eq=False)
class Tridiagonal:
    """
    Tridiagonal matrix stored by diagonals.

    Attributes:
        sub: Entries (j+1, j), length N-1
        diag: Entries (j, j), length N
        sup: Entries (j, j+1), length N-1
    """

    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray

    def __post_init__(self):
        sub = np.asarray(self.sub, dtype=float).reshape(-1)
        diag = np.asarray(self.diag, dtype=float).reshape(-1)
        sup = np.asarray(self.sup, dtype=float).reshape(-1)
        if diag.size == 0 or sub.size != diag.size - 1 or sup.size != diag.size - 1:
            raise ValueError(
                f"Inconsistent tridiagonal dimensions: sub {sub.size}, diag {diag.size}, sup {sup.size}"
            )
        object.__setattr__(self, "sub", sub)
        object.__setattr__(self, "diag", diag)
        object.__setattr__(self, "sup", sup)

    @property
    def size(self) -> int:
        return int(self.diag.size)

    def matvec(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = self.diag * x
        out[:-1] += self.sup * x[1:]
        out[1:] += self.sub * x[:-1]
        return out

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.sup, 1) + np.diag(self.sub, -1)


class NewtonResult(NamedTuple):
    """Outcome of `newton_solve`"""

    grid: Grid
    iterations: int
    residual: float
    distortion: float
    engine_calls: int


# ---------------------------------------------------------------------------
# Cell kernel tables
# ---------------------------------------------------------------------------

class _Kernel(NamedTuple):
    """Per-component cell quantities for the Gaussian part of a mixture"""

    m: np.ndarray
    v: np.ndarray
    p: np.ndarray
    cdf: np.ndarray   # (G, N+1) cdf at standardized boundaries
    pdf: np.ndarray   # (G, N+1) pdf at standardized boundaries
    zpdf: np.ndarray  # (G, N+1) z * pdf(z), zero at the infinite ends
    dirac_m: np.ndarray
    dirac_p: np.ndarray
    dirac_owner: np.ndarray


def midpoints(grid: Grid) -> np.ndarray:
    """
    Voronoi boundaries of a grid.

    Returns:
        (-inf, (x_1+x_2)/2, ..., (x_{N-1}+x_N)/2, +inf), length N+1
    """
    return np.concatenate(([-np.inf], grid.interior_midpoints(), [np.inf]))


def _owner(values: np.ndarray, grid: Grid) -> np.ndarray:
    # Cells are right-closed, so a value on a boundary belongs to the lower cell
    return np.searchsorted(grid.interior_midpoints(), values, side="left")


def _kernel(law: GaussianMixture, grid: Grid) -> _Kernel:
    gaussian = law.stdevs > 0
    m, v, p = law.means[gaussian], law.stdevs[gaussian], law.probs[gaussian]

    n_cells = grid.size
    z = (grid.interior_midpoints()[None, :] - m[:, None]) / v[:, None]

    cdf = np.empty((m.size, n_cells + 1))
    cdf[:, 0] = 0.0
    cdf[:, -1] = 1.0
    cdf[:, 1:-1] = std_normal_cdf(z)

    pdf = np.zeros((m.size, n_cells + 1))
    pdf[:, 1:-1] = std_normal_pdf(z)

    zpdf = np.zeros((m.size, n_cells + 1))
    zpdf[:, 1:-1] = z * pdf[:, 1:-1]

    dirac_m = law.means[~gaussian]
    return _Kernel(
        m=m, v=v, p=p, cdf=cdf, pdf=pdf, zpdf=zpdf,
        dirac_m=dirac_m,
        dirac_p=law.probs[~gaussian],
        dirac_owner=_owner(dirac_m, grid),
    )


def _distortion(k: _Kernel, x: np.ndarray) -> float:
    dcdf = np.diff(k.cdf, axis=1)
    dpdf = np.diff(k.pdf, axis=1)
    dzpdf = np.diff(k.zpdf, axis=1)
    gap = k.m[:, None] - x[None, :]
    v = k.v[:, None]
    # int_a^b (u - x)^2 dN(m, v^2)(u), cell by cell
    cells = (gap ** 2 + v ** 2) * dcdf - v ** 2 * dzpdf - 2.0 * v * gap * dpdf
    total = float(k.p @ cells.sum(axis=1))
    if k.dirac_m.size:
        total += float(k.dirac_p @ (k.dirac_m - x[k.dirac_owner]) ** 2)
    return max(total, 0.0)


def _gradient(k: _Kernel, x: np.ndarray) -> np.ndarray:
    dcdf = np.diff(k.cdf, axis=1)
    dpdf = np.diff(k.pdf, axis=1)
    terms = (x[None, :] - k.m[:, None]) * dcdf + k.v[:, None] * dpdf
    grad = k.p @ terms if k.m.size else np.zeros(x.size)
    if k.dirac_m.size:
        np.add.at(grad, k.dirac_owner, k.dirac_p * (x[k.dirac_owner] - k.dirac_m))
    return grad


def _hessian(k: _Kernel, x: np.ndarray) -> Tridiagonal:
    n = x.size
    spacing = np.diff(x)
    weight = k.p / k.v if k.m.size else np.zeros(0)

    diag = k.p @ np.diff(k.cdf, axis=1) if k.m.size else np.zeros(n)
    # Entries (j, j+1) and (j+1, j) share the interior boundary x_{j+1/2}
    boundary = weight @ k.pdf[:, 1:-1] if k.m.size else np.zeros(n - 1)
    sup = -0.25 * spacing * boundary
    sub = sup.copy()

    diag = diag.copy()
    diag[:-1] += sup
    diag[1:] += sub
    if k.dirac_m.size:
        np.add.at(diag, k.dirac_owner, k.dirac_p)
    return Tridiagonal(sub=sub, diag=diag, sup=sup)


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------

def distortion(law: GaussianMixture, grid: Grid) -> float:
    """
    Quadratic distortion E d(X, grid)^2 of the mixture law.

    Each cell integral is evaluated in closed form:
    ((m-x)^2 + v^2)(cdf(b) - cdf(a)) + v^2 (a pdf(a) - b pdf(b)) + 2 v (m-x)(pdf(a) - pdf(b)).
    """
    return _distortion(_kernel(law, grid), grid.points)


def gradient(law: GaussianMixture, grid: Grid) -> np.ndarray:
    """
    Gradient of D/2.

    Component j: sum_i p_i [(x_j - m_i)(cdf(b_ij) - cdf(a_ij)) + v_i (pdf(b_ij) - pdf(a_ij))]
    with a_ij, b_ij the standardized cell boundaries.
    """
    return _gradient(_kernel(law, grid), grid.points)


def hessian(law: GaussianMixture, grid: Grid) -> Tridiagonal:
    """
    Tridiagonal Hessian of D/2.

    Diagonal: mixture mass of the cell minus the boundary terms
    pdf(b)(x_{j+1} - x_j) / 4v and pdf(a)(x_j - x_{j-1}) / 4v;
    off-diagonals: -(x_{j+1} - x_j) pdf(x_{j+1/2}) / 4v, mixture-weighted.
    """
    return _hessian(_kernel(law, grid), grid.points)


def cell_probabilities(means: np.ndarray, stdevs: np.ndarray, grid: Grid) -> np.ndarray:
    """
    Mass each one-step Gaussian law N(m_i, v_i^2) assigns to each cell.

    Returns:
        Row-stochastic matrix of shape (len(means), grid.size); a zero stdev
        puts the whole row mass on the owning cell.
    """
    means = np.asarray(means, dtype=float).reshape(-1)
    stdevs = np.asarray(stdevs, dtype=float).reshape(-1)
    out = np.zeros((means.size, grid.size))
    gaussian = stdevs > 0
    if np.any(gaussian):
        z = (grid.interior_midpoints()[None, :] - means[gaussian, None]) / stdevs[gaussian, None]
        cdf = np.empty((z.shape[0], grid.size + 1))
        cdf[:, 0] = 0.0
        cdf[:, -1] = 1.0
        cdf[:, 1:-1] = std_normal_cdf(z)
        out[gaussian] = np.diff(cdf, axis=1)
    if np.any(~gaussian):
        rows = np.flatnonzero(~gaussian)
        out[rows, _owner(means[~gaussian], grid)] = 1.0
    return out


def cell_masses(law: GaussianMixture, grid: Grid) -> np.ndarray:
    """Mixture mass of each Voronoi cell"""
    return law.probs @ cell_probabilities(law.means, law.stdevs, grid)


def solve_tridiagonal(matrix: Tridiagonal, rhs: np.ndarray, iteration: Optional[int] = None) -> np.ndarray:
    """
    Solve T y = rhs using the banded structure.

    Raises:
        ValueError: If dimensions do not match
        SingularHessianError: On a zero pivot or a non-finite/inaccurate solution
    """
    rhs = np.asarray(rhs, dtype=float).reshape(-1)
    n = matrix.size
    if rhs.size != n:
        raise ValueError(f"Right-hand side has length {rhs.size}, expected {n}")

    if n == 1:
        if matrix.diag[0] == 0.0:
            raise SingularHessianError("Zero pivot in tridiagonal solve", iteration)
        solution = rhs / matrix.diag
    else:
        banded = np.zeros((3, n))
        banded[0, 1:] = matrix.sup
        banded[1] = matrix.diag
        banded[2, :-1] = matrix.sub
        try:
            solution = linalg.solve_banded((1, 1), banded, rhs)
        except (linalg.LinAlgError, ValueError) as e:
            raise SingularHessianError(f"Tridiagonal solve failed: {e}", iteration) from e

    if not np.all(np.isfinite(solution)):
        raise SingularHessianError("Near-zero pivot in tridiagonal solve", iteration)
    scale = np.max(np.abs(rhs)) or 1.0
    if np.max(np.abs(matrix.matvec(solution) - rhs)) > 1e-8 * scale:
        raise SingularHessianError("Tridiagonal solve is numerically singular", iteration)
    return solution


def _ordered(points: np.ndarray) -> bool:
    return bool(np.all(np.isfinite(points)) and np.all(np.diff(points) > 0))


def newton_step(law: GaussianMixture, grid: Grid, iteration: Optional[int] = None) -> Grid:
    """
    One Newton-Raphson step grid - H^{-1} g.

    The step is halved (at most 30 times) until the new grid is strictly
    increasing.

    Raises:
        SingularHessianError: If the Hessian cannot be inverted
        OrderingError: If ordering cannot be restored
    """
    k = _kernel(law, grid)
    direction = solve_tridiagonal(_hessian(k, grid.points), _gradient(k, grid.points), iteration)
    step = 1.0
    for _ in range(MAX_HALVINGS + 1):
        candidate = grid.points - step * direction
        if _ordered(candidate):
            return Grid(candidate)
        step *= 0.5
    raise OrderingError(f"Grid ordering lost after {MAX_HALVINGS} step halvings", iteration)


def lloyd_step(law: GaussianMixture, grid: Grid) -> Grid:
    """
    Fixed-point update moving every point to the conditional mean of its cell.

    Points whose cell carries no mass are left in place.

    Raises:
        OrderingError: If the update collapses two points
    """
    k = _kernel(law, grid)
    x = grid.points
    dcdf = np.diff(k.cdf, axis=1)
    dpdf = np.diff(k.pdf, axis=1)
    mass = k.p @ dcdf if k.m.size else np.zeros(x.size)
    first_moment = k.p @ (k.m[:, None] * dcdf - k.v[:, None] * dpdf) if k.m.size else np.zeros(x.size)
    if k.dirac_m.size:
        np.add.at(mass, k.dirac_owner, k.dirac_p)
        np.add.at(first_moment, k.dirac_owner, k.dirac_p * k.dirac_m)

    occupied = mass > np.finfo(float).tiny
    updated = x.copy()
    updated[occupied] = first_moment[occupied] / mass[occupied]
    if not _ordered(updated):
        raise OrderingError("Lloyd update collapsed grid points")
    return Grid(updated)


def newton_solve(
    law: GaussianMixture,
    grid: Grid,
    nr_iters: int = 5,
    tol: float = 1e-10,
) -> NewtonResult:
    """
    Safeguarded Newton-Raphson search for a stationary grid.

    Each iteration takes the Newton step, halving it until the grid stays
    strictly increasing and the distortion does not increase. When the
    Hessian is singular or the Newton direction is not a descent direction,
    a Lloyd step is taken instead. Stops early once the gradient sup-norm is
    at most `tol`, or when no step makes progress.

    Args:
        law: Mixture to quantize
        grid: Starting grid
        nr_iters: Maximal number of iterations
        tol: Gradient sup-norm target

    Returns:
        NewtonResult (grid, iterations performed, residual, distortion, engine calls)
    """
    if nr_iters < 1:
        raise ValueError(f"nr_iters must be >= 1, got {nr_iters}")

    k = _kernel(law, grid)
    calls = 1
    x = grid.points
    value = _distortion(k, x)
    grad = _gradient(k, x)
    residual = float(np.max(np.abs(grad)))
    iterations = 0

    for iteration in range(1, nr_iters + 1):
        if residual <= tol:
            break
        ceiling = value + DISTORTION_SLACK * max(value, np.finfo(float).tiny)
        accepted = None

        try:
            direction = solve_tridiagonal(_hessian(k, x), grad, iteration)
        except SingularHessianError as e:
            logger.debug(f"Newton iteration {iteration}: {e}; falling back to a Lloyd step")
            direction = None

        if direction is not None and float(grad @ direction) > 0:
            step = 1.0
            for _ in range(MAX_HALVINGS + 1):
                candidate = x - step * direction
                if _ordered(candidate):
                    cand_kernel = _kernel(law, Grid(candidate))
                    calls += 1
                    cand_value = _distortion(cand_kernel, candidate)
                    if cand_value <= ceiling:
                        accepted = (candidate, cand_kernel, cand_value)
                        break
                step *= 0.5

        if accepted is None:
            try:
                candidate = lloyd_step(law, Grid(x)).points
            except OrderingError:
                calls += 1
                break
            cand_kernel = _kernel(law, Grid(candidate))
            calls += 2
            cand_value = _distortion(cand_kernel, candidate)
            if cand_value > ceiling:
                break
            accepted = (candidate, cand_kernel, cand_value)

        x, k, value = accepted
        grad = _gradient(k, x)
        residual = float(np.max(np.abs(grad)))
        iterations = iteration
        logger.debug(f"Newton iteration {iteration}: distortion {value:.12e}, residual {residual:.3e}")

    return NewtonResult(grid=Grid(x), iterations=iterations, residual=residual, distortion=value, engine_calls=calls)
