"""The model space K_Theta = H^2(C^d) - Theta H^2(C^d) in realization coordinates.

With a unitary realization (A, B, C, D) the map x -> C(I - zA)^{-1} x is an
isometry from C^n onto K_Theta, so every element is a coordinate vector,
the reproducing kernels have closed-form coordinates, the compressed shift
has matrix A* and its adjoint A, and the defect spaces are the column
spaces of C* and B.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, OutOfDiskError, SingularResolventError
from .inner_function import MatrixInnerFunction, _frozen_array
from .oracle import BoundaryGrid, sample_polynomial

DEFECT_RANK_RTOL = 1e-10
PROJECT_MAX_DEGREE = 64


@dataclass(frozen=True)
class ModelVector:
    """Element of K_Theta, stored as coordinates x; the function it represents
    is f(z) = C (I - zA)^{-1} x."""

    theta: MatrixInnerFunction
    x: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=complex).ravel()
        if x.shape[0] != self.theta.degree:
            raise DimensionMismatchError(
                f"coordinate length {x.shape[0]} != model space dimension {self.theta.degree}"
            )
        _frozen_array(self, "x", x)

    def evaluate(self, z):
        """Value in C^d; z scalar -> (d,), array (M,) -> (M, d)."""
        zs = np.asarray(z, dtype=complex)
        if zs.ndim == 0:
            real = self.theta.realization
            try:
                resolved = np.linalg.solve(np.eye(real.state_dim) - complex(z) * real.A, self.x)
            except np.linalg.LinAlgError as exc:
                raise SingularResolventError(f"I - zA singular at z = {z}") from exc
            return real.C @ resolved
        return self.theta.basis_samples(zs) @ self.x

    def norm(self) -> float:
        return float(np.linalg.norm(self.x))

    def inner(self, other: "ModelVector") -> complex:
        """<self, other>, conjugate-linear in ``other``."""
        if other.x.shape != self.x.shape:
            raise DimensionMismatchError("model vectors live on different spaces")
        return complex(np.vdot(other.x, self.x))

    def __add__(self, other: "ModelVector") -> "ModelVector":
        return ModelVector(self.theta, self.x + other.x)

    def __sub__(self, other: "ModelVector") -> "ModelVector":
        return ModelVector(self.theta, self.x - other.x)

    def __mul__(self, scalar) -> "ModelVector":
        return ModelVector(self.theta, complex(scalar) * self.x)

    __rmul__ = __mul__

    def to_payload(self) -> dict:
        from .serialize import vector_to_pairs

        return {"theta_hash": self.theta.content_hash(), "x": vector_to_pairs(self.x)}


def kernel_vectors(theta: MatrixInnerFunction, lam: complex, y) -> tuple[ModelVector, ModelVector]:
    """Coordinates of the two kernel families at lam applied to y.

    The evaluation kernel k_lam(z) y = (I - Theta(z) Theta(lam)*) y / (1 - conj(lam) z)
    has coordinates (I - conj(lam) A*)^{-1} C* y, and the difference-quotient
    kernel ktilde_lam(z) y = (Theta(z) - Theta(lam)) y / (z - lam) has
    coordinates (I - lam A)^{-1} B y.
    """
    lam = complex(lam)
    if abs(lam) >= 1.0:
        raise OutOfDiskError(f"kernel point must lie in the open disk, got |lam| = {abs(lam)}")
    y = np.asarray(y, dtype=complex).ravel()
    real = theta.realization
    if y.shape[0] != real.dim:
        raise DimensionMismatchError(f"direction has length {y.shape[0]}, expected {real.dim}")
    n = real.state_dim
    eye = np.eye(n)
    x_kernel = np.linalg.solve(eye - np.conj(lam) * real.A.conj().T, real.C.conj().T @ y)
    x_tilde = np.linalg.solve(eye - lam * real.A, real.B @ y)
    return ModelVector(theta, x_kernel), ModelVector(theta, x_tilde)


def model_operator_matrices(theta: MatrixInnerFunction) -> tuple[np.ndarray, np.ndarray]:
    """Coordinate matrices (S_Theta, S_Theta*) of the compressed shift and the
    backward shift: S_Theta* = A because ((f(z) - f(0))/z has coordinates Ax,
    and S_Theta = A* by adjointness in the orthonormal coordinates."""
    a = theta.realization.A
    return a.conj().T.copy(), a.copy()


@dataclass(frozen=True)
class DefectBases:
    """Orthonormal coordinate bases of the defect spaces and their complements.

    defect = column space of C* (functions (I - Theta(z) Theta(0)*) x);
    defect_star = column space of B (functions (Theta(z) - Theta(0)) x / z).
    """

    defect: np.ndarray
    defect_star: np.ndarray
    defect_perp: np.ndarray
    defect_star_perp: np.ndarray


def _range_and_complement(m: np.ndarray, rel_tol: float) -> tuple[np.ndarray, np.ndarray]:
    u, s, _ = np.linalg.svd(m, full_matrices=True)
    if s.size == 0 or s[0] == 0.0:
        rank = 0
    else:
        rank = int(np.sum(s > rel_tol * s[0]))
    return u[:, :rank], u[:, rank:]


def defect_bases(theta: MatrixInnerFunction, rel_tol: float = DEFECT_RANK_RTOL) -> DefectBases:
    real = theta.realization
    d_basis, d_perp = _range_and_complement(real.C.conj().T, rel_tol)
    dstar_basis, dstar_perp = _range_and_complement(real.B, rel_tol)
    return DefectBases(
        defect=d_basis,
        defect_star=dstar_basis,
        defect_perp=d_perp,
        defect_star_perp=dstar_perp,
    )


def piecewise_action_residuals(
    theta: MatrixInnerFunction,
    n_points: int = 24,
    seed: int = 0,
) -> dict[str, float]:
    """Pointwise verification of the piecewise shift action on the defect
    splitting, sampled on the boundary.

    * on defect_star^perp the compressed shift multiplies by z;
    * on defect_star, S(ktilde_0 x) = -(I - Theta(z) Theta(0)*) Theta(0) x;
    * on defect^perp the backward shift divides by z;
    * on defect, S*(k_0 y) = -(Theta(z) - Theta(0)) Theta(0)* y / z.
    """
    real = theta.realization
    bases = defect_bases(theta)
    rng = np.random.default_rng(seed)
    nodes = np.exp(2j * np.pi * rng.uniform(size=n_points))
    basis_samples = theta.basis_samples(nodes)
    theta_samples = theta.transfer_samples(nodes)
    theta0 = real.evaluate(0.0)
    s_mat, s_star_mat = model_operator_matrices(theta)

    def max_err(coords_out, target_samples):
        actual = basis_samples @ coords_out
        return float(np.max(np.linalg.norm(actual - target_samples, axis=1))) if actual.size else 0.0

    out: dict[str, float] = {}

    err = 0.0
    for j in range(bases.defect_star_perp.shape[1]):
        x = bases.defect_star_perp[:, j]
        fz = basis_samples @ x
        err = max(err, max_err(s_mat @ x, nodes[:, None] * fz))
    out["shift_on_defect_star_perp"] = err

    err = 0.0
    for j in range(real.dim):
        x = real.B[:, j]  # coordinates of ktilde_0 e_j
        t0e = theta0[:, j]
        target = -(t0e[None, :] - np.einsum("mde,e->md", theta_samples, theta0.conj().T @ t0e))
        err = max(err, max_err(s_mat @ x, target))
    out["shift_on_defect_star"] = err

    err = 0.0
    for j in range(bases.defect_perp.shape[1]):
        x = bases.defect_perp[:, j]
        fz = basis_samples @ x
        err = max(err, max_err(s_star_mat @ x, fz / nodes[:, None]))
    out["backward_shift_on_defect_perp"] = err

    err = 0.0
    for j in range(real.dim):
        x = real.C.conj().T[:, j]  # coordinates of k_0 e_j
        t0y = theta0.conj().T[:, j]
        target = -(np.einsum("mde,e->md", theta_samples, t0y) - (theta0 @ t0y)[None, :]) / nodes[:, None]
        err = max(err, max_err(s_star_mat @ x, target))
    out["backward_shift_on_defect"] = err
    return out


def project(
    theta: MatrixInnerFunction,
    coeffs,
    grid: BoundaryGrid | None = None,
    max_degree: int = PROJECT_MAX_DEGREE,
) -> ModelVector:
    """P_Theta h for an analytic vector polynomial h given by coefficients
    (N+1, d): coordinates are the quadrature inner products of h against the
    orthonormal coordinate basis."""
    coeffs = np.asarray(coeffs, dtype=complex)
    if coeffs.ndim == 1:
        coeffs = coeffs[:, None]
    deg = coeffs.shape[0] - 1
    if deg > max_degree:
        raise ValueError(f"polynomial degree {deg} exceeds cap {max_degree}")
    if coeffs.shape[1] != theta.dim:
        raise DimensionMismatchError(
            f"polynomial has {coeffs.shape[1]} components, expected {theta.dim}"
        )
    if grid is None:
        grid = BoundaryGrid.default()
    if deg >= grid.size // 2:
        raise ValueError(f"degree {deg} too large for grid size {grid.size}")
    h = sample_polynomial(coeffs, grid)
    basis = theta.basis_samples(grid.nodes)
    x = np.einsum("mdi,md->i", np.conj(basis), h) / grid.size
    return ModelVector(theta, x)


def random_model_vector(
    theta: MatrixInnerFunction,
    rng: np.random.Generator,
    normalize: bool = False,
) -> ModelVector:
    x = rng.standard_normal(theta.degree) + 1j * rng.standard_normal(theta.degree)
    if normalize:
        x = x / np.linalg.norm(x)
    return ModelVector(theta, x)
