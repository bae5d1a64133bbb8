"""Matrix-valued truncated Toeplitz operators and the shift-invariance test.

A TTO is the compression of multiplication by a matrix symbol to K_Theta.
In coordinates its matrix has entries <Phi f_j, f_i> computed by boundary
quadrature, which is geometrically accurate for banded symbols.  The
membership test is the compression criterion ||P (S* A S - A) P|| over the
subspace of functions f with zf still in the model space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .crofoot import CrofootPair
from .errors import DimensionMismatchError, GridTooCoarseError
from .inner_function import MatrixInnerFunction, _frozen_array
from .model_space import defect_bases
from .oracle import BoundaryGrid, required_grid_size
from .serialize import matrix_to_pairs, pairs_to_matrix

STABILITY_TOL = 1e-8


@dataclass(frozen=True)
class SymbolPolynomial:
    """Matrix trigonometric polynomial Phi(e^{it}) = sum_{k=-m}^{m} Phi_k e^{ikt},
    stored as an array of shape (2m + 1, d, d) indexed by k + m."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 3 or c.shape[1] != c.shape[2] or c.shape[0] % 2 == 0:
            raise ValueError("coefficients must have shape (2m + 1, d, d)")
        _frozen_array(self, "coeffs", c)

    @property
    def half_width(self) -> int:
        return (self.coeffs.shape[0] - 1) // 2

    @property
    def dim(self) -> int:
        return self.coeffs.shape[1]

    def term(self, k: int) -> np.ndarray:
        m = self.half_width
        if abs(k) > m:
            return np.zeros((self.dim, self.dim), dtype=complex)
        return self.coeffs[k + m].copy()

    def sample(self, zs) -> np.ndarray:
        """Values on |z| = 1, shape (M, d, d)."""
        zs = np.asarray(zs, dtype=complex).ravel()
        m = self.half_width
        powers = zs[:, None] ** np.arange(-m, m + 1)[None, :]
        return np.einsum("mk,kde->mde", powers, self.coeffs)

    def adjoint(self) -> "SymbolPolynomial":
        """Symbol of the adjoint operator: Phi*(e^{it}) = Phi(e^{it})*, with
        coefficients (Phi_{-k})*."""
        flipped = self.coeffs[::-1].conj().transpose(0, 2, 1)
        return SymbolPolynomial(flipped)

    def __add__(self, other: "SymbolPolynomial") -> "SymbolPolynomial":
        if other.dim != self.dim:
            raise DimensionMismatchError("symbol dimensions differ")
        m = max(self.half_width, other.half_width)
        out = np.zeros((2 * m + 1, self.dim, self.dim), dtype=complex)
        out[m - self.half_width : m + self.half_width + 1] += self.coeffs
        out[m - other.half_width : m + other.half_width + 1] += other.coeffs
        return SymbolPolynomial(out)

    def __mul__(self, scalar) -> "SymbolPolynomial":
        return SymbolPolynomial(complex(scalar) * self.coeffs)

    __rmul__ = __mul__

    @classmethod
    def from_terms(cls, terms: dict[int, np.ndarray], dim: int | None = None) -> "SymbolPolynomial":
        if not terms and dim is None:
            raise ValueError("empty symbol needs an explicit dimension")
        m = max((abs(k) for k in terms), default=0)
        if dim is None:
            dim = np.atleast_2d(next(iter(terms.values()))).shape[0]
        out = np.zeros((2 * m + 1, dim, dim), dtype=complex)
        for k, mat in terms.items():
            out[k + m] += np.atleast_2d(np.asarray(mat, dtype=complex))
        return cls(out)

    @classmethod
    def constant(cls, matrix) -> "SymbolPolynomial":
        return cls.from_terms({0: np.atleast_2d(np.asarray(matrix, dtype=complex))})

    @classmethod
    def random_band(cls, dim: int, half_width: int, rng: np.random.Generator) -> "SymbolPolynomial":
        shape = (2 * half_width + 1, dim, dim)
        return cls(rng.standard_normal(shape) + 1j * rng.standard_normal(shape))

    def to_payload(self) -> list:
        m = self.half_width
        return [{"k": k - m, "matrix": matrix_to_pairs(self.coeffs[k])} for k in range(2 * m + 1)]

    @classmethod
    def from_payload(cls, payload: list) -> "SymbolPolynomial":
        return cls.from_terms({int(t["k"]): pairs_to_matrix(t["matrix"]) for t in payload})


@dataclass(frozen=True)
class TruncatedToeplitzOperator:
    """Coordinate matrix of a TTO on K_Theta, with optional symbol provenance."""

    theta: MatrixInnerFunction
    matrix: np.ndarray
    symbol: SymbolPolynomial | None
    doubling_residual: float

    def __post_init__(self):
        _frozen_array(self, "matrix", np.atleast_2d(self.matrix))


def _quadrature_matrix(theta: MatrixInnerFunction, phi: SymbolPolynomial, grid: BoundaryGrid) -> np.ndarray:
    basis = theta.basis_samples(grid.nodes)
    integrand = phi.sample(grid.nodes) @ basis
    return np.einsum("mdi,mdj->ij", np.conj(basis), integrand) / grid.size


def build_tto(
    theta: MatrixInnerFunction,
    phi: SymbolPolynomial,
    grid: BoundaryGrid | None = None,
    stability_tol: float = STABILITY_TOL,
) -> TruncatedToeplitzOperator:
    """Compression of multiplication by phi to K_Theta.

    Entries are trapezoid values of <Phi f_j, f_i>; the grid must satisfy
    M >= 4 (m + n + 1) and the value is accepted only if doubling the grid
    moves no entry by more than ``stability_tol``.
    """
    if phi.dim != theta.dim:
        raise DimensionMismatchError(f"symbol acts on C^{phi.dim}, Theta on C^{theta.dim}")
    minimum = 4 * (phi.half_width + theta.degree + 1)
    if grid is None:
        floor = max(minimum, required_grid_size(theta.realization.spectral_radius()))
        grid = BoundaryGrid.of_size(max(BoundaryGrid.default().size, floor))
    elif grid.size < minimum:
        raise GridTooCoarseError(
            f"grid size {grid.size} below the bandwidth-aware minimum {minimum}"
        )
    coarse = _quadrature_matrix(theta, phi, grid)
    fine = _quadrature_matrix(theta, phi, grid.double())
    residual = float(np.max(np.abs(fine - coarse)))
    if residual > stability_tol:
        raise GridTooCoarseError(
            f"doubling the grid moved an entry by {residual:.3e} (> {stability_tol:.1e})"
        )
    return TruncatedToeplitzOperator(theta=theta, matrix=fine, symbol=phi, doubling_residual=residual)


def _as_matrix(op, degree: int) -> np.ndarray:
    m = op.matrix if isinstance(op, TruncatedToeplitzOperator) else np.atleast_2d(np.asarray(op, dtype=complex))
    if m.shape != (degree, degree):
        raise DimensionMismatchError(f"operator matrix is {m.shape}, expected {(degree, degree)}")
    return m


def shift_invariance_residual(theta: MatrixInnerFunction, op) -> float:
    """||P (S* A S - A) P|| where P projects onto the coordinates of functions
    f with zf still in K_Theta (x orthogonal to range(B)).

    Zero exactly for the compressions of multiplication operators; any
    nonzero value certifies the operator is not a TTO.
    """
    m = _as_matrix(op, theta.degree)
    a = theta.realization.A
    perp = defect_bases(theta).defect_star_perp
    if perp.shape[1] == 0:
        return 0.0
    compressed = perp.conj().T @ (a @ m @ a.conj().T - m) @ perp
    return float(np.linalg.norm(compressed, 2))


def crofoot_conjugate(pair: CrofootPair, op, direction: str = "to_base") -> np.ndarray:
    """Conjugate an operator matrix by the verified coordinate matrix of J_W.

    ``to_base`` maps an operator on K_Theta' to J_W* A J_W on K_Theta;
    ``to_transformed`` maps an operator on K_Theta to J_W B J_W*.
    """
    if direction not in ("to_base", "to_transformed"):
        raise ValueError(f"direction must be 'to_base' or 'to_transformed', got {direction!r}")
    m = _as_matrix(op, pair.degree)
    j = pair.jw_matrix
    if direction == "to_base":
        return j.conj().T @ m @ j
    return j @ m @ j.conj().T
