"""The generalized Crofoot transform between model spaces.

Given a pure inner Theta and a strict contraction W, the transformed
function is

    Theta'(z) = -W + D_{W*} (I - Theta(z) W*)^{-1} Theta(z) D_W,

and J_W f = D_{W*} (I - Theta(z) W*)^{-1} f is unitary from K_Theta onto
K_Theta'.  Theta' is realized in closed form by a feedback interconnection
of Theta's realization with the constant W*; with that choice the two
coordinate systems line up so that J_W is the identity on coordinates.
The coordinate matrix of J_W is nevertheless computed honestly by boundary
quadrature at construction time and stored, so the identity is verified,
never assumed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import subspace_angles

from .errors import (
    DimensionMismatchError,
    FeedbackSingularError,
    NotPureError,
    NotStrictError,
    PurityViolationError,
)
from .inner_function import (
    MatrixInnerFunction,
    UnitaryRealization,
    _frozen_array,
    inner_from_realization,
)
from .model_space import ModelVector, defect_bases
from .oracle import BoundaryGrid, required_grid_size

STRICTNESS_MIN = 1e-6
FORMULA_TOL = 1e-10
IDENTITY_TOL = 1e-10
FORMULA_SAMPLES = 32


def disk_samples(count: int, radius: float = 0.9) -> np.ndarray:
    """Deterministic low-discrepancy points in the disk of the given radius."""
    k = np.arange(count)
    r = radius * np.sqrt((k + 0.5) / count)
    golden = np.pi * (3.0 - np.sqrt(5.0))
    return r * np.exp(1j * golden * k)


@dataclass(frozen=True)
class StrictContraction:
    """A d x d matrix with operator norm at most 1 - 1e-6."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.atleast_2d(np.asarray(self.matrix, dtype=complex))
        if m.shape[0] != m.shape[1]:
            raise DimensionMismatchError("contraction must be square")
        norm = float(np.linalg.norm(m, 2))
        if norm > 1.0 - STRICTNESS_MIN:
            raise NotStrictError(
                f"||W|| = {norm:.8f} is not strictly below 1 (margin {STRICTNESS_MIN:.0e})"
            )
        _frozen_array(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix, 2))

    @property
    def strictness(self) -> float:
        return 1.0 - self.norm


@dataclass(frozen=True)
class DefectPair:
    """Hermitian square roots D_W = (I - W*W)^{1/2} and D_{W*} = (I - WW*)^{1/2}."""

    dw: np.ndarray
    dwstar: np.ndarray

    def residuals(self, w: np.ndarray) -> dict[str, float]:
        d = w.shape[0]
        eye = np.eye(d)
        return {
            "dw_square": float(np.linalg.norm(self.dw @ self.dw - (eye - w.conj().T @ w), 2)),
            "dwstar_square": float(np.linalg.norm(self.dwstar @ self.dwstar - (eye - w @ w.conj().T), 2)),
            "intertwining": float(np.linalg.norm(w @ self.dw - self.dwstar @ w, 2)),
        }


def _hermitian_sqrt(m: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(m)
    return vecs @ np.diag(np.sqrt(np.clip(vals, 0.0, None))) @ vecs.conj().T


def defect_operators(w) -> DefectPair:
    if not isinstance(w, StrictContraction):
        w = StrictContraction(w)
    m = w.matrix
    eye = np.eye(w.dim)
    return DefectPair(
        dw=_hermitian_sqrt(eye - m.conj().T @ m),
        dwstar=_hermitian_sqrt(eye - m @ m.conj().T),
    )


@dataclass(frozen=True)
class CrofootPair:
    """(Theta, W, Theta') with the coordinate-level transform data of J_W."""

    theta: MatrixInnerFunction
    contraction: StrictContraction
    defects: DefectPair
    theta_prime: MatrixInnerFunction
    jw_matrix: np.ndarray
    jw_identity_residual: float
    formula_residual: float
    grid_size: int

    @property
    def dim(self) -> int:
        return self.theta.dim

    @property
    def degree(self) -> int:
        return self.theta.degree

    def recommended_grid(self, base: BoundaryGrid | None = None) -> BoundaryGrid:
        """Quadrature grid large enough for both Theta and Theta': the poles of
        Theta' are not bounded by Theta's radius cap, so grid sizing follows
        the spectral radii of the two state matrices."""
        size = base.size if base is not None else BoundaryGrid.default().size
        return BoundaryGrid.of_size(max(size, self.grid_size))

    def transform_evaluator(self, z):
        """Theta'(z) through the defining formula, bypassing the feedback
        realization; z scalar -> (d, d), array (M,) -> (M, d, d)."""
        w = self.contraction.matrix
        theta_z = self.theta.transfer_samples(np.atleast_1d(np.asarray(z, dtype=complex)))
        eye = np.eye(self.dim)
        core = np.linalg.solve(eye[None, :, :] - theta_z @ w.conj().T, theta_z)
        out = -w + self.defects.dwstar @ core @ self.defects.dw
        return out[0] if np.asarray(z).ndim == 0 else out

    def forward_multiplier(self, zs) -> np.ndarray:
        """Samples of D_{W*} (I - Theta(z) W*)^{-1}, shape (M, d, d)."""
        zs = np.atleast_1d(np.asarray(zs, dtype=complex))
        theta_z = self.theta.transfer_samples(zs)
        eye = np.eye(self.dim)
        return self.defects.dwstar @ np.linalg.inv(eye[None, :, :] - theta_z @ self.contraction.matrix.conj().T)

    def inverse_multiplier(self, zs) -> np.ndarray:
        """Samples of D_{W*} (I + Theta'(z) W*)^{-1}, shape (M, d, d)."""
        zs = np.atleast_1d(np.asarray(zs, dtype=complex))
        prime_z = self.theta_prime.transfer_samples(zs)
        eye = np.eye(self.dim)
        return self.defects.dwstar @ np.linalg.inv(eye[None, :, :] + prime_z @ self.contraction.matrix.conj().T)


def _feedback_realization(real: UnitaryRealization, w: np.ndarray, defects: DefectPair) -> UnitaryRealization:
    """Realization of Theta' obtained by closing the constant feedback W*
    around Theta; preserves block unitarity and the coordinate space."""
    d = real.dim
    eye = np.eye(d)
    wst = w.conj().T
    coupling = eye - real.D @ wst
    if np.linalg.cond(coupling) > 1e12:
        raise FeedbackSingularError("I - Theta(0) W* numerically singular")
    x = np.linalg.inv(coupling)
    y = np.linalg.inv(eye - wst @ real.D)
    return UnitaryRealization(
        A=real.A + real.B @ wst @ x @ real.C,
        B=real.B @ y @ defects.dw,
        C=defects.dwstar @ x @ real.C,
        D=-w + defects.dwstar @ x @ real.D @ defects.dw,
    )


def _jw_coordinate_matrix(
    theta: MatrixInnerFunction,
    theta_prime: MatrixInnerFunction,
    defects: DefectPair,
    w: np.ndarray,
    grid: BoundaryGrid,
) -> np.ndarray:
    """Matrix of J_W between the two coordinate systems, by quadrature:
    entry (i, j) = <J_W f_j, f'_i> over the boundary grid."""
    nodes = grid.nodes
    basis = theta.basis_samples(nodes)
    basis_prime = theta_prime.basis_samples(nodes)
    theta_z = theta.transfer_samples(nodes)
    eye = np.eye(theta.dim)
    multiplier = defects.dwstar @ np.linalg.inv(eye[None, :, :] - theta_z @ w.conj().T)
    mapped = multiplier @ basis
    return np.einsum("mdi,mdj->ij", np.conj(basis_prime), mapped) / grid.size


def crofoot_theta(
    theta: MatrixInnerFunction,
    w,
    grid: BoundaryGrid | None = None,
    formula_tol: float = FORMULA_TOL,
    identity_tol: float = IDENTITY_TOL,
    purity_margin: float = 1e-8,
) -> CrofootPair:
    """Build Theta' and the verified transform data for (Theta, W).

    Construction validates, in order: strictness of W and its defect
    operators, unitarity and purity of the Theta' realization, pointwise
    agreement of the realization with the defining formula at 32 disk
    points, and the coordinate matrix of J_W against the identity.
    """
    if not isinstance(w, StrictContraction):
        w = StrictContraction(w)
    if w.dim != theta.dim:
        raise DimensionMismatchError(f"W is {w.dim} x {w.dim} but Theta acts on C^{theta.dim}")
    if grid is None:
        grid = BoundaryGrid.default()
    defects = defect_operators(w)
    realization = _feedback_realization(theta.realization, w.matrix, defects)
    try:
        theta_prime = inner_from_realization(realization, purity_margin=purity_margin)
    except NotPureError as exc:
        raise PurityViolationError(f"transformed function failed the purity check: {exc}") from exc

    # Theta' can have poles much closer to the circle than Theta's zeros
    # (a Moebius level-set effect), so the validation grid adapts to both.
    rho = max(theta.realization.spectral_radius(), realization.spectral_radius())
    work_grid = BoundaryGrid.of_size(max(grid.size, required_grid_size(rho)))

    pair = CrofootPair(
        theta=theta,
        contraction=w,
        defects=defects,
        theta_prime=theta_prime,
        jw_matrix=np.eye(theta.degree),
        jw_identity_residual=0.0,
        formula_residual=0.0,
        grid_size=work_grid.size,
    )
    zs = disk_samples(FORMULA_SAMPLES)
    formula = pair.transform_evaluator(zs)
    realized = theta_prime.transfer_samples(zs)
    formula_residual = float(np.max(np.abs(formula - realized)))
    if formula_residual > formula_tol:
        raise PurityViolationError(
            f"feedback realization disagrees with the defining formula: {formula_residual:.3e}"
        )
    jw = _jw_coordinate_matrix(theta, theta_prime, defects, w.matrix, work_grid)
    identity_residual = float(np.linalg.norm(jw - np.eye(theta.degree), 2))
    if identity_residual > identity_tol:
        raise PurityViolationError(
            f"transform coordinate matrix deviates from the identity by {identity_residual:.3e}"
        )
    return CrofootPair(
        theta=theta,
        contraction=w,
        defects=defects,
        theta_prime=theta_prime,
        jw_matrix=jw,
        jw_identity_residual=identity_residual,
        formula_residual=formula_residual,
        grid_size=work_grid.size,
    )


def crofoot_map(pair: CrofootPair, f: ModelVector, direction: str = "forward") -> ModelVector:
    """Apply J_W (forward, K_Theta -> K_Theta') or its inverse.

    In the aligned coordinate systems the map is the identity on
    coordinates; membership on the correct side is enforced.
    """
    if direction not in ("forward", "inverse"):
        raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")
    source = pair.theta if direction == "forward" else pair.theta_prime
    target = pair.theta_prime if direction == "forward" else pair.theta
    if f.theta is not source:
        if f.theta.degree != source.degree or f.theta.dim != source.dim:
            raise DimensionMismatchError("model vector does not live on the expected side")
        if not np.allclose(f.theta.realization.A, source.realization.A, atol=1e-12):
            raise DimensionMismatchError("model vector belongs to a different inner function")
    return ModelVector(target, f.x.copy())


def recover_theta(theta_prime: MatrixInnerFunction, w):
    """Pointwise evaluator of the inverse transform
    z -> W + D_{W*} (I + Theta'(z) W*)^{-1} Theta'(z) D_W, which reproduces
    the original Theta."""
    if not isinstance(w, StrictContraction):
        w = StrictContraction(w)
    defects = defect_operators(w)
    eye = np.eye(w.dim)

    def evaluator(z):
        zs = np.atleast_1d(np.asarray(z, dtype=complex))
        prime = theta_prime.transfer_samples(zs)
        core = np.linalg.solve(eye[None, :, :] + prime @ w.matrix.conj().T, prime)
        out = w.matrix + defects.dwstar @ core @ defects.dw
        return out[0] if np.asarray(z).ndim == 0 else out

    return evaluator


@dataclass(frozen=True)
class KernelMappingReport:
    """Residuals of the kernel transport identities, one per kernel family."""

    reproducing: float
    difference: float

    @property
    def max_residual(self) -> float:
        return max(self.reproducing, self.difference)


def kernel_mapping_residual(pair: CrofootPair, n_samples: int = 16, seed: int = 0) -> KernelMappingReport:
    """Check J_W(k_lam (I - W Theta(lam)*)^{-1} D_{W*} y) = k'_lam y and the
    difference-kernel analogue with (I - W* Theta(lam))^{-1} D_W y, in
    coordinates, over random (lam, y)."""
    rng = np.random.default_rng(seed)
    real = pair.theta.realization
    real_p = pair.theta_prime.realization
    w = pair.contraction.matrix
    n, d = real.state_dim, real.dim
    eye_n, eye_d = np.eye(n), np.eye(d)
    res_k = 0.0
    res_t = 0.0
    for _ in range(n_samples):
        lam = 0.9 * np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())
        y = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        y /= np.linalg.norm(y)
        theta_lam = real.evaluate(lam)

        v = np.linalg.solve(eye_d - w @ theta_lam.conj().T, pair.defects.dwstar @ y)
        lhs = np.linalg.solve(eye_n - np.conj(lam) * real.A.conj().T, real.C.conj().T @ v)
        rhs = np.linalg.solve(eye_n - np.conj(lam) * real_p.A.conj().T, real_p.C.conj().T @ y)
        res_k = max(res_k, float(np.linalg.norm(pair.jw_matrix @ lhs - rhs)))

        v = np.linalg.solve(eye_d - w.conj().T @ theta_lam, pair.defects.dw @ y)
        lhs = np.linalg.solve(eye_n - lam * real.A, real.B @ v)
        rhs = np.linalg.solve(eye_n - lam * real_p.A, real_p.B @ y)
        res_t = max(res_t, float(np.linalg.norm(pair.jw_matrix @ lhs - rhs)))
    return KernelMappingReport(reproducing=res_k, difference=res_t)


@dataclass(frozen=True)
class IntertwiningReport:
    """Residuals of the shift-intertwining identities for J_W.

    backward_shift:  S'* J_W f = J_W S* f + S'* J_W f(0), pointwise;
    forward_shift:   S' J_W f = J_W S f on defect_star^perp, in coordinates
                     and pointwise;
    defect_range_angle: largest principal angle between range(B) and
                     range(B'), which must vanish.
    """

    backward_shift: float
    forward_shift: float
    defect_range_angle: float

    @property
    def max_residual(self) -> float:
        return max(self.backward_shift, self.forward_shift, self.defect_range_angle)


def intertwining_residuals(
    pair: CrofootPair,
    n_functions: int = 6,
    n_points: int = 8,
    seed: int = 0,
) -> IntertwiningReport:
    rng = np.random.default_rng(seed)
    real = pair.theta.realization
    real_p = pair.theta_prime.realization
    w = pair.contraction.matrix
    n, d = real.state_dim, real.dim
    eye_n, eye_d = np.eye(n), np.eye(d)
    # annulus 0.3 <= |z| <= 0.9: the backward-shift check divides by z
    k = np.arange(n_points)
    zs = (0.3 + 0.6 * (k + 0.5) / n_points) * np.exp(1j * np.pi * (3.0 - np.sqrt(5.0)) * k)

    backward = 0.0
    for _ in range(n_functions):
        x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        f0 = real.C @ x
        h0 = pair.defects.dwstar @ np.linalg.solve(eye_d - real.D @ w.conj().T, f0)
        for z in zs:
            resolvent_p = np.linalg.inv(eye_n - z * real_p.A)
            lhs = real_p.C @ resolvent_p @ (real_p.A @ x)
            first = real_p.C @ resolvent_p @ (real.A @ x)
            hz = pair.defects.dwstar @ np.linalg.solve(eye_d - real.evaluate(z) @ w.conj().T, f0)
            backward = max(backward, float(np.linalg.norm(lhs - first - (hz - h0) / z)))

    bases = defect_bases(pair.theta)
    forward = 0.0
    perp = bases.defect_star_perp
    if perp.shape[1]:
        coeff = rng.standard_normal((perp.shape[1], n_functions)) + 1j * rng.standard_normal(
            (perp.shape[1], n_functions)
        )
        for j in range(n_functions):
            x = perp @ coeff[:, j]
            x /= np.linalg.norm(x)
            forward = max(
                forward,
                float(np.linalg.norm(real_p.A.conj().T @ x - real.A.conj().T @ x)),
            )
            shifted = real.A.conj().T @ x
            for z in zs:
                g = real_p.C @ np.linalg.solve(eye_n - z * real_p.A, x)
                target = real_p.C @ np.linalg.solve(eye_n - z * real_p.A, shifted)
                forward = max(forward, float(np.linalg.norm(z * g - target)))

    if min(real.B.shape) and np.linalg.norm(real.B) > 0:
        angles = subspace_angles(real.B, real_p.B)
        angle = float(np.max(angles)) if angles.size else 0.0
    else:
        angle = 0.0
    return IntertwiningReport(
        backward_shift=backward,
        forward_shift=forward,
        defect_range_angle=angle,
    )
