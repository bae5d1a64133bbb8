"""Boundary-quadrature engine for L^2(C^d) inner products and projections.

This is the independent witness for the realization-based core: inner
products are uniform trapezoid sums over the unit circle, and projections
onto K_Theta are computed from a Gram system over the raw spanning set
{z^k Theta e_j}, evaluating Theta only through its factor product.  Nothing
here touches state-space coordinates.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import GridMismatchError, IllConditionedError
from .inner_function import MatrixInnerFunction

GRID_ENV_VAR = "MVCROFOOT_GRID"
DEFAULT_GRID_SIZE = 1024
MIN_GRID_SIZE = 64
GRAM_COND_LIMIT = 1e10


def _next_power_of_two(m: int) -> int:
    p = 1
    while p < m:
        p *= 2
    return p


def required_grid_size(rho: float, target: float = 1e-15, cap: int = 32768) -> int:
    """Grid size at which trapezoid aliasing ~ rho^M drops below ``target``
    for integrands whose poles have modulus 1/rho."""
    if rho <= 0.0:
        return MIN_GRID_SIZE
    rho = min(float(rho), 0.9999)
    needed = int(np.ceil(np.log(target) / np.log(rho)))
    return min(cap, max(MIN_GRID_SIZE, _next_power_of_two(needed)))


@dataclass(frozen=True)
class BoundaryGrid:
    """Uniform nodes e^{2 pi i j / size} on the unit circle; size a power of two."""

    size: int

    def __post_init__(self):
        if self.size < MIN_GRID_SIZE or self.size & (self.size - 1):
            raise ValueError(f"grid size must be a power of two >= {MIN_GRID_SIZE}, got {self.size}")

    @cached_property
    def nodes(self) -> np.ndarray:
        nodes = np.exp(2j * np.pi * np.arange(self.size) / self.size)
        nodes.setflags(write=False)
        return nodes

    def double(self) -> "BoundaryGrid":
        return BoundaryGrid(self.size * 2)

    @classmethod
    def of_size(cls, m: int) -> "BoundaryGrid":
        return cls(max(MIN_GRID_SIZE, _next_power_of_two(m)))

    @classmethod
    def default(cls) -> "BoundaryGrid":
        return cls.of_size(int(os.environ.get(GRID_ENV_VAR, DEFAULT_GRID_SIZE)))


def boundary_inner_product(f_samples: np.ndarray, g_samples: np.ndarray) -> complex:
    """Trapezoid value of (1/2pi) int <f(e^{it}), g(e^{it})> dt.

    Samples have shape (M,) or (M, d) on matching grids.  Exact for
    integrands that are trigonometric polynomials of degree < M.
    """
    f = np.asarray(f_samples)
    g = np.asarray(g_samples)
    if f.shape != g.shape:
        raise GridMismatchError(f"sample shapes differ: {f.shape} vs {g.shape}")
    if f.ndim == 1:
        return complex(np.mean(np.conj(g) * f))
    return complex(np.mean(np.sum(np.conj(g) * f, axis=1)))


def boundary_norm(samples: np.ndarray) -> float:
    return float(np.sqrt(max(boundary_inner_product(samples, samples).real, 0.0)))


def sample_polynomial(coeffs: np.ndarray, grid: BoundaryGrid) -> np.ndarray:
    """Evaluate sum_k coeffs[k] z^k on the grid; coeffs (N+1, d) -> (M, d)."""
    coeffs = _as_poly(coeffs)
    powers = grid.nodes[:, None] ** np.arange(coeffs.shape[0])[None, :]
    return powers @ coeffs


def _as_poly(coeffs) -> np.ndarray:
    coeffs = np.asarray(coeffs, dtype=complex)
    if coeffs.ndim == 1:
        coeffs = coeffs[:, None]
    return coeffs


def _shifted_theta_columns(theta_samples: np.ndarray, nodes: np.ndarray, span_degree: int) -> np.ndarray:
    """Columns z^k Theta e_j for 0 <= k <= span_degree, shape (M, d, (span+1) d)."""
    m, d, _ = theta_samples.shape
    powers = nodes[:, None] ** np.arange(span_degree + 1)[None, :]
    cols = powers[:, None, :, None] * theta_samples[:, :, None, :]
    return cols.reshape(m, d, (span_degree + 1) * d)


@dataclass(frozen=True)
class OracleProjection:
    """Boundary samples of P_Theta h plus diagnostics of the Gram solve."""

    samples: np.ndarray
    grid: BoundaryGrid
    gram_condition: float

    def norm(self) -> float:
        return boundary_norm(self.samples)


def oracle_project(
    theta: MatrixInnerFunction,
    coeffs,
    grid: BoundaryGrid | None = None,
    span_degree: int | None = None,
    cond_limit: float = GRAM_COND_LIMIT,
) -> OracleProjection:
    """Project the analytic polynomial h onto K_Theta via the Gram-system path.

    h is given by coefficients (N+1, d); its projection onto Theta H^2 equals
    its projection onto span{z^k Theta e_j : 0 <= k <= N}, assembled and
    solved entirely from boundary samples.
    """
    coeffs = _as_poly(coeffs)
    deg = coeffs.shape[0] - 1
    if span_degree is None:
        span_degree = deg
    if span_degree < deg:
        raise ValueError("span degree must cover the polynomial degree")
    if grid is None:
        grid = BoundaryGrid.default()
    if span_degree >= grid.size // 2:
        raise ValueError(f"span degree {span_degree} too large for grid size {grid.size}")
    theta_samples = theta.evaluate_factors(grid.nodes)
    h = sample_polynomial(coeffs, grid)
    cols = _shifted_theta_columns(theta_samples, grid.nodes, span_degree)
    gram = np.einsum("mdi,mdj->ij", np.conj(cols), cols) / grid.size
    cond = float(np.linalg.cond(gram))
    if cond > cond_limit:
        raise IllConditionedError(f"Gram condition number {cond:.3e} exceeds {cond_limit:.1e}")
    rhs = np.einsum("mdi,md->i", np.conj(cols), h) / grid.size
    weights = np.linalg.solve(gram, rhs)
    return OracleProjection(samples=h - cols @ weights, grid=grid, gram_condition=cond)


def model_space_rank(
    theta: MatrixInnerFunction,
    grid: BoundaryGrid | None = None,
    max_degree: int | None = None,
    rel_tol: float = 1e-8,
    cond_limit: float = GRAM_COND_LIMIT,
) -> int:
    """Dimension of K_Theta measured without the realization.

    Projects the monomials z^j e_i (j <= max_degree, default the factor
    count) through the Gram-system path and counts the numerical rank of
    their Gram matrix.
    """
    if grid is None:
        grid = BoundaryGrid.default()
    if max_degree is None:
        max_degree = len(theta.factors) if theta.factors is not None else theta.degree
    theta_samples = theta.evaluate_factors(grid.nodes)
    cols = _shifted_theta_columns(theta_samples, grid.nodes, max_degree)
    gram = np.einsum("mdi,mdj->ij", np.conj(cols), cols) / grid.size
    cond = float(np.linalg.cond(gram))
    if cond > cond_limit:
        raise IllConditionedError(f"Gram condition number {cond:.3e} exceeds {cond_limit:.1e}")
    monomials = []
    powers = grid.nodes[:, None] ** np.arange(max_degree + 1)[None, :]
    d = theta.dim
    for j in range(max_degree + 1):
        for i in range(d):
            h = np.zeros((grid.size, d), dtype=complex)
            h[:, i] = powers[:, j]
            monomials.append(h)
    stacked = np.stack(monomials, axis=2)
    rhs = np.einsum("mdi,mdk->ik", np.conj(cols), stacked) / grid.size
    projections = stacked - np.einsum("mdi,ik->mdk", cols, np.linalg.solve(gram, rhs))
    proj_gram = np.einsum("mdi,mdj->ij", np.conj(projections), projections) / grid.size
    singvals = np.linalg.svd(proj_gram, compute_uv=False)
    if singvals[0] <= 0:
        return 0
    return int(np.sum(singvals > rel_tol * singvals[0]))
