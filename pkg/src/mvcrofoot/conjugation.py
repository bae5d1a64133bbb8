"""Conjugations on C^d and the induced conjugation C_Gamma on K_Theta.

A conjugation Gamma x = U conj(x) with U symmetric unitary is conjugate-
linear, isometric and involutive.  When Gamma Theta Gamma = Theta* on the
circle, C_Gamma f = Theta(e^{it}) e^{-it} Gamma f maps K_Theta onto itself;
the generalized Crofoot transform intertwines C_Gamma with its counterpart
on the transformed space.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .crofoot import CrofootPair, crofoot_theta
from .errors import (
    DimensionMismatchError,
    IncompatibleInputsError,
    NotInKThetaError,
    NotInvolutiveError,
    NotUnitaryError,
)
from .inner_function import MatrixInnerFunction, _frozen_array, unitarity_residual
from .model_space import ModelVector
from .oracle import BoundaryGrid

SYMMETRY_TOL = 1e-10
IN_SPACE_TOL = 1e-9
COMPAT_TOL = 1e-8


@dataclass(frozen=True)
class ConjugationSpec:
    """Gamma x = usym conj(x) with usym a symmetric unitary matrix."""

    usym: np.ndarray

    def __post_init__(self):
        _frozen_array(self, "usym", np.atleast_2d(self.usym))

    @property
    def dim(self) -> int:
        return self.usym.shape[0]

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Gamma acting on vectors; accepts (d,) or batched (..., d)."""
        return np.conj(np.asarray(x)) @ self.usym.T

    def conjugate_operator(self, m: np.ndarray) -> np.ndarray:
        """Matrix of Gamma M Gamma; accepts (d, d) or batched (..., d, d)."""
        return self.usym @ np.conj(m) @ np.conj(self.usym)

    def involution_residual(self) -> float:
        return float(np.linalg.norm(self.usym @ np.conj(self.usym) - np.eye(self.dim), 2))


def make_conjugation(usym, atol: float = SYMMETRY_TOL) -> ConjugationSpec:
    usym = np.atleast_2d(np.asarray(usym, dtype=complex))
    res = unitarity_residual(usym)
    if res > atol:
        raise NotUnitaryError(f"conjugation matrix unitarity residual {res:.3e}")
    asym = float(np.linalg.norm(usym - usym.T, 2))
    if asym > atol:
        raise NotInvolutiveError(
            f"matrix is not symmetric (||U - U^T|| = {asym:.3e}); Gamma^2 != id"
        )
    return ConjugationSpec(usym=usym)


def entrywise_conjugation(dim: int) -> ConjugationSpec:
    return ConjugationSpec(usym=np.eye(dim))


@dataclass(frozen=True)
class CompatibilityReport:
    """Residuals of the symmetry hypotheses linking Gamma, Theta and W.

    function_symmetry:     Gamma Theta(e^{it}) Gamma = Theta(e^{it})*
    contraction_symmetry:  Gamma W* = W Gamma
    defect_intertwining:   Gamma D_{W*} = D_W Gamma
    transformed_symmetry:  Gamma Theta'(e^{it}) Gamma = Theta'(e^{it})*

    The last two are consequences of the first two.
    """

    function_symmetry: float
    contraction_symmetry: float
    defect_intertwining: float
    transformed_symmetry: float

    @property
    def hypotheses_residual(self) -> float:
        return max(self.function_symmetry, self.contraction_symmetry)

    @property
    def max_residual(self) -> float:
        return max(
            self.function_symmetry,
            self.contraction_symmetry,
            self.defect_intertwining,
            self.transformed_symmetry,
        )


def _samples_symmetry_residual(gamma: ConjugationSpec, samples: np.ndarray) -> float:
    lhs = gamma.conjugate_operator(samples)
    rhs = samples.conj().transpose(0, 2, 1)
    return float(np.max(np.linalg.norm(lhs - rhs, ord=2, axis=(1, 2))))


def compatibility_residuals(
    theta: MatrixInnerFunction,
    w,
    gamma: ConjugationSpec,
    grid: BoundaryGrid | None = None,
    pair: CrofootPair | None = None,
) -> CompatibilityReport:
    if grid is None:
        grid = BoundaryGrid.default()
    if pair is None:
        pair = crofoot_theta(theta, w, grid=grid)
    if gamma.dim != theta.dim:
        raise DimensionMismatchError("conjugation dimension does not match Theta")
    w_mat = pair.contraction.matrix
    res_a = _samples_symmetry_residual(gamma, theta.transfer_samples(grid.nodes))
    # Gamma W* = W Gamma in matrix form: usym conj(W*) = W usym, conj(W*) = W^T
    res_b = float(np.linalg.norm(gamma.usym @ w_mat.T - w_mat @ gamma.usym, 2))
    res_c = float(
        np.linalg.norm(gamma.usym @ np.conj(pair.defects.dwstar) - pair.defects.dw @ gamma.usym, 2)
    )
    res_d = _samples_symmetry_residual(gamma, pair.theta_prime.transfer_samples(grid.nodes))
    return CompatibilityReport(
        function_symmetry=res_a,
        contraction_symmetry=res_b,
        defect_intertwining=res_c,
        transformed_symmetry=res_d,
    )


def _cgamma_samples(
    theta: MatrixInnerFunction, gamma: ConjugationSpec, f_samples: np.ndarray, grid: BoundaryGrid
) -> np.ndarray:
    theta_samples = theta.transfer_samples(grid.nodes)
    rotated = gamma.apply(f_samples) * np.conj(grid.nodes)[:, None]
    return np.einsum("mde,me->md", theta_samples, rotated)


def cgamma_map(
    theta: MatrixInnerFunction,
    gamma: ConjugationSpec,
    f: ModelVector,
    grid: BoundaryGrid | None = None,
    in_space_tol: float = IN_SPACE_TOL,
) -> ModelVector:
    """C_Gamma f = Theta e^{-it} Gamma f, projected back to coordinates.

    The projection residual (L^2 distance of the conjugated samples from the
    model space) must stay below ``in_space_tol``; a large residual signals a
    Gamma incompatible with Theta and raises NotInKThetaError.
    """
    if grid is None:
        grid = BoundaryGrid.default()
    if gamma.dim != theta.dim:
        raise DimensionMismatchError("conjugation dimension does not match Theta")
    basis = theta.basis_samples(grid.nodes)
    g = _cgamma_samples(theta, gamma, basis @ f.x, grid)
    coords = np.einsum("mdi,md->i", np.conj(basis), g) / grid.size
    residual_samples = g - basis @ coords
    residual = float(np.sqrt(np.mean(np.sum(np.abs(residual_samples) ** 2, axis=1)).real))
    if residual > in_space_tol:
        raise NotInKThetaError(
            f"conjugated function is {residual:.3e} away from the model space; "
            "Gamma Theta Gamma = Theta* likely fails"
        )
    return ModelVector(theta, coords)


def cgamma_property_residuals(
    theta: MatrixInnerFunction,
    gamma: ConjugationSpec,
    grid: BoundaryGrid | None = None,
    n_samples: int = 10,
    seed: int = 0,
    in_space_tol: float = IN_SPACE_TOL,
) -> dict[str, float]:
    """Isometry, conjugate-linearity, involutivity and in-space residuals of
    C_Gamma over random model vectors."""
    if grid is None:
        grid = BoundaryGrid.default()
    rng = np.random.default_rng(seed)
    n = theta.degree
    out = {"isometry": 0.0, "antilinearity": 0.0, "involution": 0.0, "in_space": 0.0}

    def conjugate(vec: ModelVector) -> ModelVector:
        return cgamma_map(theta, gamma, vec, grid=grid, in_space_tol=np.inf)

    basis = theta.basis_samples(grid.nodes)
    for _ in range(n_samples):
        x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        y = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        alpha = complex(rng.standard_normal(), rng.standard_normal())
        fx, fy = ModelVector(theta, x), ModelVector(theta, y)
        cx = conjugate(fx)
        out["isometry"] = max(out["isometry"], abs(cx.norm() - fx.norm()))
        combo = conjugate(ModelVector(theta, alpha * x + y))
        expected = np.conj(alpha) * cx.x + conjugate(fy).x
        out["antilinearity"] = max(out["antilinearity"], float(np.linalg.norm(combo.x - expected)))
        out["involution"] = max(out["involution"], float(np.linalg.norm(conjugate(cx).x - x)))
        g = _cgamma_samples(theta, gamma, basis @ x, grid)
        residual_samples = g - basis @ cx.x
        in_space = float(np.sqrt(np.mean(np.sum(np.abs(residual_samples) ** 2, axis=1)).real))
        out["in_space"] = max(out["in_space"], in_space / max(fx.norm(), 1e-300))
    return out


def crofoot_conjugation_residual(
    pair: CrofootPair,
    gamma: ConjugationSpec,
    n_samples: int = 20,
    seed: int = 0,
    grid: BoundaryGrid | None = None,
    compat_tol: float = COMPAT_TOL,
) -> float:
    """Max over random f in K_Theta of || J_W(C_Gamma f) - C'_Gamma(J_W f) ||.

    Requires the symmetry hypotheses on (Theta, W, Gamma); raises
    IncompatibleInputsError when they fail.
    """
    if grid is None:
        grid = BoundaryGrid.default()
    compat = compatibility_residuals(pair.theta, pair.contraction, gamma, grid=grid, pair=pair)
    if compat.hypotheses_residual > compat_tol:
        raise IncompatibleInputsError(
            "symmetry hypotheses fail: "
            f"function residual {compat.function_symmetry:.3e}, "
            f"contraction residual {compat.contraction_symmetry:.3e}"
        )
    rng = np.random.default_rng(seed)
    n = pair.degree
    worst = 0.0
    for _ in range(n_samples):
        x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        f = ModelVector(pair.theta, x)
        lhs = pair.jw_matrix @ cgamma_map(pair.theta, gamma, f, grid=grid).x
        g = ModelVector(pair.theta_prime, pair.jw_matrix @ x)
        rhs = cgamma_map(pair.theta_prime, gamma, g, grid=grid).x
        worst = max(worst, float(np.linalg.norm(lhs - rhs)))
    return worst
