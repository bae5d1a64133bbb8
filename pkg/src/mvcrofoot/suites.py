"""Residual check suites over a (Theta, W, Gamma, symbols) instance.

Each check computes one residual against a stated operator identity and is
reported as a CheckRecord.  Randomized checks derive their RNG stream from
the instance seed and the check name, so reports are reproducible and
independent of execution order.
"""

from __future__ import annotations

import zlib

import numpy as np

from .conjugation import (
    ConjugationSpec,
    cgamma_property_residuals,
    compatibility_residuals,
    crofoot_conjugation_residual,
)
from .crofoot import (
    CrofootPair,
    disk_samples,
    intertwining_residuals,
    kernel_mapping_residual,
    recover_theta,
)
from .inner_function import MatrixInnerFunction, scalar_inner
from .model_space import (
    kernel_vectors,
    model_operator_matrices,
    piecewise_action_residuals,
    project,
    random_model_vector,
)
from .oracle import (
    BoundaryGrid,
    boundary_inner_product,
    model_space_rank,
    oracle_project,
    required_grid_size,
    sample_polynomial,
)
from .report import CheckRecord
from .tto import SymbolPolynomial, build_tto, crofoot_conjugate, shift_invariance_residual

COUNTEREXAMPLE_TOL = 1e-12
SCALAR_CLASSICAL_TOL = 1e-12


def _rng(seed: int, name: str) -> np.random.Generator:
    return np.random.default_rng([seed, zlib.crc32(name.encode())])


def _random_coords(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


# ---------------------------------------------------------------------------
# model suite


def model_checks(
    theta: MatrixInnerFunction,
    grid: BoundaryGrid,
    tol: float,
    seed: int = 0,
) -> list[CheckRecord]:
    checks: list[CheckRecord] = []
    real = theta.realization
    grid = BoundaryGrid.of_size(max(grid.size, required_grid_size(real.spectral_radius())))
    n, d = real.state_dim, real.dim
    nodes = grid.nodes
    basis = theta.basis_samples(nodes)

    checks.append(
        CheckRecord(
            "realization_block_unitary",
            "[[A,B],[C,D]] [[A,B],[C,D]]* = I",
            real.unitarity_residual(),
            tol,
        )
    )
    checks.append(
        CheckRecord(
            "boundary_unitarity",
            "Theta(e^{it}) Theta(e^{it})* = I",
            theta.boundary_unitarity_residual(grid.size),
            tol,
        )
    )

    if theta.factors is not None:
        zs = disk_samples(32, radius=0.99)
        res = float(np.max(np.abs(theta.transfer_samples(zs) - theta.evaluate_factors(zs))))
        checks.append(
            CheckRecord(
                "evaluation_consistency",
                "factor product = D + zC(I - zA)^{-1}B",
                res,
                tol,
            )
        )

    rng = _rng(seed, "coordinate_isometry")
    worst = 0.0
    for _ in range(50):
        x, y = _random_coords(rng, n), _random_coords(rng, n)
        quad = boundary_inner_product(basis @ x, basis @ y)
        worst = max(worst, abs(quad - complex(np.vdot(y, x))))
    checks.append(
        CheckRecord(
            "coordinate_isometry",
            "<f_x, f_y>_{L^2} = <x, y>_{C^n}",
            worst,
            tol,
        )
    )

    rng = _rng(seed, "reproducing_property")
    worst = 0.0
    for _ in range(20):
        lam = 0.9 * np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())
        y = rng.standard_normal(d) + 1j * rng.standard_normal(d)
        f = random_model_vector(theta, rng)
        kernel, _ = kernel_vectors(theta, lam, y)
        lhs = f.inner(kernel)
        rhs = complex(np.vdot(y, f.evaluate(lam)))
        worst = max(worst, abs(lhs - rhs))
    checks.append(
        CheckRecord(
            "reproducing_property",
            "<f, k_lam y> = <f(lam), y>",
            worst,
            tol,
        )
    )

    rng = _rng(seed, "model_space_membership")
    theta_nodes = theta.transfer_samples(nodes)
    worst = 0.0
    for _ in range(20):
        f = random_model_vector(theta, rng, normalize=True)
        g_coeffs = _random_coords(rng, 9 * d).reshape(9, d)
        g = np.einsum("mde,me->md", theta_nodes, sample_polynomial(g_coeffs, grid))
        worst = max(worst, abs(boundary_inner_product(basis @ f.x, g)))
    checks.append(
        CheckRecord(
            "model_space_membership",
            "K_Theta is orthogonal to Theta H^2",
            worst,
            tol,
        )
    )

    rng = _rng(seed, "shift_adjointness")
    s_mat, s_star_mat = model_operator_matrices(theta)
    worst = 0.0
    for _ in range(10):
        x, y = _random_coords(rng, n), _random_coords(rng, n)
        worst = max(worst, abs(np.vdot(y, s_mat @ x) - np.vdot(s_star_mat @ y, x)))
    checks.append(
        CheckRecord(
            "shift_adjointness",
            "<S f, g> = <f, S* g>",
            worst,
            tol,
        )
    )

    piecewise = piecewise_action_residuals(theta, seed=seed)
    checks.append(
        CheckRecord(
            "defect_piecewise_action",
            "S f = zf on D_*^perp; S(ktilde_0 x) = -(I - Theta Theta(0)*) Theta(0) x",
            max(piecewise.values()),
            tol,
        )
    )

    if theta.factors is not None:
        rng = _rng(seed, "projection_cross_validation")
        h = _random_coords(rng, 7 * d).reshape(7, d)
        via_coords = project(theta, h, grid=grid)
        via_oracle = oracle_project(theta, h, grid=grid)
        diff = via_oracle.samples - basis @ via_coords.x
        res = float(np.sqrt(np.mean(np.sum(np.abs(diff) ** 2, axis=1)).real))
        checks.append(
            CheckRecord(
                "projection_cross_validation",
                "Gram-system projection = coordinate-basis projection",
                res,
                tol,
            )
        )
        residual_fn = sample_polynomial(h, grid) - basis @ via_coords.x
        ortho = float(np.max(np.abs(np.einsum("mdi,md->i", np.conj(basis), residual_fn) / grid.size)))
        checks.append(
            CheckRecord(
                "projection_residual_orthogonal",
                "h - P_Theta h is orthogonal to K_Theta",
                ortho,
                tol,
            )
        )
        rank = model_space_rank(theta, grid=grid)
        checks.append(
            CheckRecord(
                "model_space_dimension",
                "dim K_Theta = number of factors",
                float(abs(rank - n)),
                0.5,
            )
        )
    return checks


# ---------------------------------------------------------------------------
# crofoot suite


def _quadrature_unitarity(pair: CrofootPair, grid: BoundaryGrid, rng: np.random.Generator, trials: int) -> float:
    basis = pair.theta.basis_samples(grid.nodes)
    mapped_basis = pair.forward_multiplier(grid.nodes) @ basis
    n = pair.degree
    worst = 0.0
    for _ in range(trials):
        x, y = _random_coords(rng, n), _random_coords(rng, n)
        lhs = boundary_inner_product(mapped_basis @ x, mapped_basis @ y)
        worst = max(worst, abs(lhs - complex(np.vdot(y, x))))
    return worst


def _round_trip_residual(pair: CrofootPair, grid: BoundaryGrid, rng: np.random.Generator, trials: int) -> float:
    """Pointwise forward map, quadrature projection onto K_Theta', pointwise
    inverse map, projection back: compares with the original coordinates."""
    nodes = grid.nodes
    basis = pair.theta.basis_samples(nodes)
    basis_p = pair.theta_prime.basis_samples(nodes)
    forward = pair.forward_multiplier(nodes)
    inverse = pair.inverse_multiplier(nodes)
    n = pair.degree
    worst = 0.0
    for _ in range(trials):
        x = _random_coords(rng, n)
        g = np.einsum("mde,me->md", forward, basis @ x)
        g_coords = np.einsum("mdi,md->i", np.conj(basis_p), g) / grid.size
        back = np.einsum("mde,me->md", inverse, basis_p @ g_coords)
        x_back = np.einsum("mdi,md->i", np.conj(basis), back) / grid.size
        worst = max(worst, float(np.linalg.norm(x_back - x)))
    return worst


def _scalar_classical_residual(pair: CrofootPair, grid: BoundaryGrid) -> float:
    """d = 1: transformed function matches the Moebius form
    (Theta - w)/(1 - conj(w) Theta) and the transform acts as
    sqrt(1 - |w|^2) f / (1 - conj(w) Theta), both through the factor route."""
    w = complex(pair.contraction.matrix[0, 0])
    zs = np.concatenate([disk_samples(16, radius=0.9), grid.nodes[:: grid.size // 16]])
    theta_z = pair.theta.evaluate_factors(zs)[:, 0, 0]
    prime_z = pair.theta_prime.transfer_samples(zs)[:, 0, 0]
    moebius = (theta_z - w) / (1.0 - np.conj(w) * theta_z)
    res = float(np.max(np.abs(prime_z - moebius)))
    basis = pair.theta.basis_samples(zs)
    basis_p = pair.theta_prime.basis_samples(zs)
    for j in range(pair.degree):
        f = basis[:, 0, j]
        classical = np.sqrt(1.0 - abs(w) ** 2) * f / (1.0 - np.conj(w) * theta_z)
        res = max(res, float(np.max(np.abs(basis_p[:, 0, j] - classical))))
    return res


def crofoot_checks(
    pair: CrofootPair,
    grid: BoundaryGrid,
    tol: float,
    seed: int = 0,
) -> list[CheckRecord]:
    checks: list[CheckRecord] = []
    grid = pair.recommended_grid(grid)
    checks.append(
        CheckRecord(
            "transformed_pure",
            "||Theta'(0)|| < 1",
            pair.theta_prime.purity_norm(),
            1.0,
        )
    )
    checks.append(
        CheckRecord(
            "transformed_boundary_unitary",
            "Theta'(e^{it}) Theta'(e^{it})* = I",
            pair.theta_prime.boundary_unitarity_residual(grid.size),
            tol,
        )
    )
    checks.append(
        CheckRecord(
            "transform_formula_agreement",
            "Theta' = -W + D_{W*}(I - Theta W*)^{-1} Theta D_W",
            pair.formula_residual,
            tol,
        )
    )
    checks.append(
        CheckRecord(
            "transform_unitary",
            "<J_W f, J_W g> = <f, g>",
            _quadrature_unitarity(pair, grid, _rng(seed, "transform_unitary"), 50),
            tol,
        )
    )
    checks.append(
        CheckRecord(
            "transform_round_trip",
            "J_W' J_W = id with J_W' g = D_{W*}(I + Theta' W*)^{-1} g",
            _round_trip_residual(pair, grid, _rng(seed, "transform_round_trip"), 6),
            tol,
        )
    )
    kernels = kernel_mapping_residual(pair, seed=seed)
    checks.append(
        CheckRecord(
            "reproducing_kernel_transport",
            "J_W(k_lam (I - W Theta(lam)*)^{-1} D_{W*} y) = k'_lam y",
            kernels.reproducing,
            tol,
        )
    )
    checks.append(
        CheckRecord(
            "difference_kernel_transport",
            "J_W(ktilde_lam (I - W* Theta(lam))^{-1} D_W y) = ktilde'_lam y",
            kernels.difference,
            tol,
        )
    )
    intertwine = intertwining_residuals(pair, seed=seed)
    checks.append(
        CheckRecord(
            "defect_star_range_match",
            "range(B') = range(B)",
            intertwine.defect_range_angle,
            tol,
        )
    )
    checks.append(
        CheckRecord(
            "backward_shift_intertwining",
            "S'* J_W f = J_W S* f + S'* J_W f(0)",
            intertwine.backward_shift,
            tol,
        )
    )
    checks.append(
        CheckRecord(
            "forward_shift_commutation",
            "S' J_W f = J_W S f on D_*^perp",
            intertwine.forward_shift,
            tol,
        )
    )
    checks.append(
        CheckRecord(
            "coordinate_identity",
            "matrix of J_W in aligned coordinates = I",
            pair.jw_identity_residual,
            tol,
        )
    )
    evaluator = recover_theta(pair.theta_prime, pair.contraction)
    zs = disk_samples(32)
    res = float(np.max(np.abs(evaluator(zs) - pair.theta.transfer_samples(zs))))
    checks.append(
        CheckRecord(
            "theta_recovery",
            "Theta = W + D_{W*}(I + Theta' W*)^{-1} Theta' D_W",
            res,
            tol,
        )
    )
    if pair.dim == 1 and pair.theta.factors is not None:
        checks.append(
            CheckRecord(
                "scalar_classical_form",
                "d=1: Theta' = (Theta - w)/(1 - conj(w) Theta)",
                _scalar_classical_residual(pair, grid),
                SCALAR_CLASSICAL_TOL,
            )
        )
    return checks


# ---------------------------------------------------------------------------
# tto suite


def tto_checks(
    pair: CrofootPair,
    symbols: list[SymbolPolynomial],
    grid: BoundaryGrid,
    tol: float,
    seed: int = 0,
) -> list[CheckRecord]:
    checks: list[CheckRecord] = []
    grid = pair.recommended_grid(grid)
    theta, theta_p = pair.theta, pair.theta_prime
    if not symbols:
        symbols = [SymbolPolynomial.random_band(theta.dim, 1, _rng(seed, "tto_default_symbol"))]

    doubling = 0.0
    invariance = 0.0
    invariance_p = 0.0
    to_base = 0.0
    to_transformed = 0.0
    for phi in symbols:
        op = build_tto(theta, phi, grid=grid)
        op_p = build_tto(theta_p, phi, grid=grid)
        doubling = max(doubling, op.doubling_residual, op_p.doubling_residual)
        invariance = max(invariance, shift_invariance_residual(theta, op))
        invariance_p = max(invariance_p, shift_invariance_residual(theta_p, op_p))
        to_base = max(
            to_base,
            shift_invariance_residual(theta, crofoot_conjugate(pair, op_p, "to_base")),
        )
        to_transformed = max(
            to_transformed,
            shift_invariance_residual(theta_p, crofoot_conjugate(pair, op, "to_transformed")),
        )

    checks.append(
        CheckRecord(
            "tto_grid_stability",
            "quadrature entries stable under grid doubling",
            doubling,
            tol,
        )
    )
    checks.append(
        CheckRecord(
            "tto_shift_invariance",
            "Q_A(zf) = Q_A(f) for compressions of multiplication operators",
            invariance,
            tol,
        )
    )
    checks.append(
        CheckRecord(
            "tto_shift_invariance_transformed",
            "same invariance on the transformed side",
            invariance_p,
            tol,
        )
    )
    checks.append(
        CheckRecord(
            "conjugate_to_base_invariance",
            "J_W* A J_W is a TTO on K_Theta for A a TTO on K_Theta'",
            to_base,
            tol,
        )
    )
    checks.append(
        CheckRecord(
            "conjugate_to_transformed_invariance",
            "J_W B J_W* is a TTO on K_Theta' for B a TTO on K_Theta",
            to_transformed,
            tol,
        )
    )

    analytic = build_tto(theta, SymbolPolynomial.from_terms({1: np.eye(theta.dim)}), grid=grid)
    res = float(np.linalg.norm(analytic.matrix - theta.realization.A.conj().T, 2))
    checks.append(
        CheckRecord(
            "analytic_symbol_is_shift",
            "symbol e^{it} I compresses to S_Theta = A*",
            res,
            tol,
        )
    )

    rng = _rng(seed, "tto_linearity")
    phi1 = SymbolPolynomial.random_band(theta.dim, 1, rng)
    phi2 = SymbolPolynomial.random_band(theta.dim, 1, rng)
    alpha = complex(rng.standard_normal(), rng.standard_normal())
    combined = build_tto(theta, alpha * phi1 + phi2, grid=grid).matrix
    separate = alpha * build_tto(theta, phi1, grid=grid).matrix + build_tto(theta, phi2, grid=grid).matrix
    checks.append(
        CheckRecord(
            "tto_linearity",
            "A_{alpha Phi + Psi} = alpha A_Phi + A_Psi",
            float(np.max(np.abs(combined - separate))),
            tol,
        )
    )
    adjoint = build_tto(theta, phi1.adjoint(), grid=grid).matrix
    checks.append(
        CheckRecord(
            "tto_adjoint",
            "A_{Phi*} = A_Phi*",
            float(np.max(np.abs(adjoint - build_tto(theta, phi1, grid=grid).matrix.conj().T))),
            tol,
        )
    )

    z2 = scalar_inner([0.0, 0.0])
    res = abs(shift_invariance_residual(z2, np.diag([1.0, 2.0])) - 1.0)
    checks.append(
        CheckRecord(
            "invariance_rejects_perturbation",
            "diag(1,2) on K_{z^2} has compression residual exactly 1",
            res,
            COUNTEREXAMPLE_TOL,
        )
    )
    return checks


# ---------------------------------------------------------------------------
# conjugation suite


def conjugation_checks(
    pair: CrofootPair,
    gamma: ConjugationSpec,
    grid: BoundaryGrid,
    tol: float,
    seed: int = 0,
) -> list[CheckRecord]:
    checks: list[CheckRecord] = []
    grid = pair.recommended_grid(grid)
    compat = compatibility_residuals(pair.theta, pair.contraction, gamma, grid=grid, pair=pair)
    checks.append(
        CheckRecord(
            "symmetry_of_function",
            "Gamma Theta(e^{it}) Gamma = Theta(e^{it})*",
            compat.function_symmetry,
            tol,
        )
    )
    checks.append(
        CheckRecord(
            "symmetry_of_contraction",
            "Gamma W* = W Gamma",
            compat.contraction_symmetry,
            tol,
        )
    )
    checks.append(
        CheckRecord(
            "defect_conjugation_intertwining",
            "Gamma D_{W*} = D_W Gamma",
            compat.defect_intertwining,
            tol,
        )
    )
    checks.append(
        CheckRecord(
            "symmetry_of_transformed",
            "Gamma Theta'(e^{it}) Gamma = Theta'(e^{it})*",
            compat.transformed_symmetry,
            tol,
        )
    )
    if compat.hypotheses_residual >= tol:
        return checks

    props = cgamma_property_residuals(pair.theta, gamma, grid=grid, seed=seed)
    checks.append(
        CheckRecord(
            "model_conjugation_in_space",
            "C_Gamma K_Theta = K_Theta",
            props["in_space"],
            tol,
        )
    )
    checks.append(
        CheckRecord(
            "model_conjugation_isometry",
            "||C_Gamma f|| = ||f||",
            props["isometry"],
            tol,
        )
    )
    checks.append(
        CheckRecord(
            "model_conjugation_involution",
            "C_Gamma^2 = id",
            props["involution"],
            tol,
        )
    )
    checks.append(
        CheckRecord(
            "model_conjugation_antilinearity",
            "C_Gamma(alpha f + g) = conj(alpha) C_Gamma f + C_Gamma g",
            props["antilinearity"],
            tol,
        )
    )
    checks.append(
        CheckRecord(
            "transform_intertwines_conjugation",
            "J_W C_Gamma = C'_Gamma J_W",
            crofoot_conjugation_residual(pair, gamma, seed=seed, grid=grid),
            tol,
        )
    )
    return checks


SUITE_NAMES = ("model", "crofoot", "tto", "conjugation")
