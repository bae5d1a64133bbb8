import numpy as np
import pytest

from mvcrofoot import (
    BoundaryGrid,
    DimensionMismatchError,
    ModelVector,
    NotStrictError,
    PurityViolationError,
    StrictContraction,
    crofoot_map,
    crofoot_theta,
    defect_operators,
    disk_samples,
    intertwining_residuals,
    kernel_mapping_residual,
    kernel_vectors,
    random_inner,
    random_model_vector,
    recover_theta,
    scalar_inner,
)
from tests_common import shift_matrix_function, worked_pair_w

GRID = BoundaryGrid(256)
ROOT3_OVER_2 = np.sqrt(3.0) / 2.0


def random_contraction(d, seed, norm=0.6):
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return norm * g / np.linalg.norm(g, 2)


# ---------------------------------------------------------------------------
# defect operators


def test_defects_of_zero():
    pair = defect_operators(np.zeros((2, 2)))
    assert np.allclose(pair.dw, np.eye(2), atol=1e-15)
    assert np.allclose(pair.dwstar, np.eye(2), atol=1e-15)


def test_defects_of_nilpotent_half():
    # I - W*W = diag(1, 3/4), I - WW* = diag(3/4, 1)
    pair = defect_operators(worked_pair_w())
    assert np.allclose(pair.dw, np.diag([1.0, ROOT3_OVER_2]), atol=1e-15)
    assert np.allclose(pair.dwstar, np.diag([ROOT3_OVER_2, 1.0]), atol=1e-15)


def test_defects_of_scalar_multiple():
    pair = defect_operators(0.5 * np.eye(2))
    assert np.allclose(pair.dw, ROOT3_OVER_2 * np.eye(2), atol=1e-15)
    assert np.allclose(pair.dwstar, ROOT3_OVER_2 * np.eye(2), atol=1e-15)


def test_defect_residuals_random():
    w = StrictContraction(random_contraction(3, 5))
    pair = defect_operators(w)
    res = pair.residuals(w.matrix)
    assert max(res.values()) < 1e-12


def test_not_strict_rejected():
    with pytest.raises(NotStrictError):
        StrictContraction(np.eye(2))
    w = StrictContraction(0.4 * np.eye(2))
    assert w.norm == pytest.approx(0.4)
    assert w.strictness == pytest.approx(0.6)


# ---------------------------------------------------------------------------
# the transformed function


def test_zero_contraction_is_identity_transform():
    theta = random_inner(2, 3, seed=7)
    pair = crofoot_theta(theta, np.zeros((2, 2)), grid=GRID)
    assert np.allclose(pair.theta_prime.realization.block(), theta.realization.block(), atol=1e-14)
    f = random_model_vector(theta, np.random.default_rng(0))
    g = crofoot_map(pair, f)
    assert np.allclose(g.x, f.x, atol=0)


def test_scalar_transform_is_moebius():
    theta = scalar_inner([0.3 + 0.2j, -0.5j, 0.1])
    w = 0.4 - 0.3j
    pair = crofoot_theta(theta, np.array([[w]]), grid=GRID)
    zs = disk_samples(24, radius=0.95)
    th = theta.evaluate_factors(zs)[:, 0, 0]
    expected = (th - w) / (1.0 - np.conj(w) * th)
    got = pair.theta_prime.transfer_samples(zs)[:, 0, 0]
    assert float(np.max(np.abs(got - expected))) < 1e-12


def test_worked_pair_closed_form():
    # Theta = z I_2, W = [[0, 1/2], [0, 0]]:
    # Theta'(z) = [[sqrt(3) z / 2, -1/2], [z^2 / 2, sqrt(3) z / 2]]
    theta = shift_matrix_function(2)
    pair = crofoot_theta(theta, worked_pair_w(), grid=GRID)
    for z in (0.0, 0.5, -0.3 + 0.4j, 1j):
        expected = np.array(
            [[ROOT3_OVER_2 * z, -0.5], [z**2 / 2.0, ROOT3_OVER_2 * z]], dtype=complex
        )
        assert np.linalg.norm(pair.theta_prime.evaluate(z) - expected) < 1e-14
    # columns orthonormal on the circle
    for z in np.exp(2j * np.pi * np.arange(5) / 5):
        u = pair.theta_prime.evaluate(z)
        assert np.linalg.norm(u.conj().T @ u - np.eye(2), 2) < 1e-12


def test_transformed_function_is_inner_and_pure():
    theta = random_inner(2, 4, seed=19)
    pair = crofoot_theta(theta, random_contraction(2, 3), grid=GRID)
    prime = pair.theta_prime
    assert prime.purity_norm() < 1.0
    assert prime.realization.unitarity_residual() < 1e-12
    assert prime.boundary_unitarity_residual(GRID.size) < 1e-10
    # boundary values have orthonormal columns
    u = prime.evaluate(np.exp(0.7j))
    assert np.linalg.norm(u.conj().T @ u - np.eye(2), 2) < 1e-12


def test_construction_validation_can_trip():
    theta = random_inner(2, 3, seed=7)
    with pytest.raises(PurityViolationError):
        crofoot_theta(theta, random_contraction(2, 0), grid=GRID, formula_tol=0.0)


def test_dimension_mismatch():
    theta = scalar_inner([0.0])
    with pytest.raises(DimensionMismatchError):
        crofoot_theta(theta, np.zeros((2, 2)), grid=GRID)


# ---------------------------------------------------------------------------
# the transform as a map


def test_worked_pair_forward_map_of_constant():
    theta = shift_matrix_function(2)
    pair = crofoot_theta(theta, worked_pair_w(), grid=GRID)
    f = ModelVector(theta, [1.0, 0.0])  # the constant e1
    g = crofoot_map(pair, f)
    zs = np.array([0.0, 0.4, -0.2 + 0.3j])
    values = g.evaluate(zs)
    expected = np.stack([np.full_like(zs, ROOT3_OVER_2), zs / 2.0], axis=1)
    assert np.allclose(values, expected, atol=1e-14)
    assert g.norm() == pytest.approx(f.norm(), abs=1e-14)  # 3/4 + 1/4 = 1


def test_scalar_forward_map_closed_form():
    # Theta = z^2, w = 1/2, f = z: (J_w f)(z) = (sqrt(3)/2) z / (1 - z^2/2)
    theta = scalar_inner([0.0, 0.0])
    pair = crofoot_theta(theta, np.array([[0.5]]), grid=GRID)
    f = ModelVector(theta, [0.0, 1.0])  # the function z
    g = crofoot_map(pair, f)
    value = g.evaluate(0.5)[0]
    assert abs(value - ROOT3_OVER_2 * (4.0 / 7.0)) < 1e-14
    zs = disk_samples(16, radius=0.8)
    expected = ROOT3_OVER_2 * zs / (1.0 - zs**2 / 2.0)
    assert np.allclose(g.evaluate(zs)[:, 0], expected, atol=1e-13)


def test_forward_map_pointwise_formula():
    theta = random_inner(2, 5, seed=23)
    pair = crofoot_theta(theta, random_contraction(2, 11), grid=GRID)
    rng = np.random.default_rng(1)
    zs = disk_samples(16, radius=0.9)
    multiplier = pair.forward_multiplier(zs)
    for _ in range(5):
        f = random_model_vector(theta, rng)
        g = crofoot_map(pair, f)
        direct = np.einsum("mde,me->md", multiplier, f.evaluate(zs))
        assert float(np.max(np.abs(g.evaluate(zs) - direct))) < 1e-10


def test_round_trip_and_inverse_formula():
    theta = random_inner(2, 4, seed=29)
    pair = crofoot_theta(theta, random_contraction(2, 13), grid=GRID)
    rng = np.random.default_rng(2)
    grid = pair.recommended_grid(GRID)
    nodes = grid.nodes
    basis = theta.basis_samples(nodes)
    basis_p = pair.theta_prime.basis_samples(nodes)
    forward = pair.forward_multiplier(nodes)
    inverse = pair.inverse_multiplier(nodes)
    for _ in range(5):
        f = random_model_vector(theta, rng)
        g_samples = np.einsum("mde,me->md", forward, basis @ f.x)
        g_coords = np.einsum("mdi,md->i", np.conj(basis_p), g_samples) / grid.size
        back = np.einsum("mde,me->md", inverse, basis_p @ g_coords)
        x_back = np.einsum("mdi,md->i", np.conj(basis), back) / grid.size
        assert np.linalg.norm(x_back - f.x) < 1e-10
        # inverse direction through the map API
        h = crofoot_map(pair, crofoot_map(pair, f), direction="inverse")
        assert np.allclose(h.x, f.x, atol=0)


def test_map_unitary_against_quadrature():
    theta = random_inner(3, 6, seed=31)
    pair = crofoot_theta(theta, random_contraction(3, 17), grid=GRID)
    grid = pair.recommended_grid(GRID)
    basis = theta.basis_samples(grid.nodes)
    mapped = pair.forward_multiplier(grid.nodes) @ basis
    rng = np.random.default_rng(3)
    for _ in range(50):
        x = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        y = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        quad = np.mean(np.sum(np.conj(mapped @ y) * (mapped @ x), axis=1))
        assert abs(quad - np.vdot(y, x)) < 1e-10


def test_coordinate_identity_is_verified_not_assumed():
    theta = random_inner(2, 4, seed=37)
    pair = crofoot_theta(theta, random_contraction(2, 19), grid=GRID)
    assert pair.jw_identity_residual < 1e-10
    assert np.linalg.norm(pair.jw_matrix - np.eye(4), 2) < 1e-10


def test_map_rejects_wrong_side():
    theta = random_inner(2, 3, seed=7)
    pair = crofoot_theta(theta, random_contraction(2, 23), grid=GRID)
    g = ModelVector(pair.theta_prime, [1.0, 0.0, 0.0])
    with pytest.raises(DimensionMismatchError):
        crofoot_map(pair, g, direction="forward")
    with pytest.raises(ValueError):
        crofoot_map(pair, g, direction="sideways")


# ---------------------------------------------------------------------------
# recovery


def test_recover_zero_contraction():
    theta = random_inner(2, 3, seed=7)
    pair = crofoot_theta(theta, np.zeros((2, 2)), grid=GRID)
    evaluator = recover_theta(pair.theta_prime, np.zeros((2, 2)))
    zs = disk_samples(8)
    assert np.allclose(evaluator(zs), pair.theta_prime.transfer_samples(zs), atol=1e-14)


def test_recover_scalar_square():
    theta = scalar_inner([0.0, 0.0])
    pair = crofoot_theta(theta, np.array([[0.5]]), grid=GRID)
    evaluator = recover_theta(pair.theta_prime, np.array([[0.5]]))
    zs = disk_samples(16, radius=0.9)
    assert float(np.max(np.abs(evaluator(zs)[:, 0, 0] - zs**2))) < 1e-13


def test_recover_seeded():
    theta = random_inner(2, 3, seed=7)
    pair = crofoot_theta(theta, random_contraction(2, 7), grid=GRID)
    evaluator = recover_theta(pair.theta_prime, pair.contraction)
    zs = disk_samples(32)
    gap = np.abs(evaluator(zs) - theta.transfer_samples(zs))
    assert float(np.max(gap)) < 1e-10


# ---------------------------------------------------------------------------
# kernel transport


def test_kernel_mapping_zero_contraction():
    theta = random_inner(2, 3, seed=7)
    pair = crofoot_theta(theta, np.zeros((2, 2)), grid=GRID)
    report = kernel_mapping_residual(pair)
    assert report.max_residual < 1e-14


def test_kernel_mapping_worked_example():
    theta = shift_matrix_function(2)
    pair = crofoot_theta(theta, worked_pair_w(), grid=GRID)
    # lam = 0, y = e2: the pre-image is the constant e2 and so is k'_0 e2
    defects = pair.defects
    y = np.array([0.0, 1.0])
    v = np.linalg.solve(np.eye(2) - worked_pair_w() @ theta.evaluate(0.0).conj().T, defects.dwstar @ y)
    pre, _ = kernel_vectors(theta, 0.0, v)
    assert np.allclose(pre.x, [0.0, 1.0], atol=1e-15)
    target, _ = kernel_vectors(pair.theta_prime, 0.0, y)
    assert np.allclose(pair.jw_matrix @ pre.x, target.x, atol=1e-12)
    zs = np.array([0.1, 0.5j, -0.6])
    assert np.allclose(target.evaluate(zs), np.tile(y, (3, 1)), atol=1e-13)


def test_kernel_mapping_seeded():
    theta = random_inner(2, 4, seed=41)
    pair = crofoot_theta(theta, random_contraction(2, 29), grid=GRID)
    report = kernel_mapping_residual(pair, n_samples=16)
    assert report.reproducing < 1e-9
    assert report.difference < 1e-9


# ---------------------------------------------------------------------------
# shift intertwining


def test_intertwining_zero_contraction():
    theta = random_inner(2, 3, seed=7)
    pair = crofoot_theta(theta, np.zeros((2, 2)), grid=GRID)
    report = intertwining_residuals(pair)
    assert report.max_residual < 1e-12


def test_backward_shift_scalar_closed_form():
    # Theta = z^2, w = 1/2, f = z: both sides equal (sqrt(3)/2) / (1 - z^2/2)
    theta = scalar_inner([0.0, 0.0])
    pair = crofoot_theta(theta, np.array([[0.5]]), grid=GRID)
    real_p = pair.theta_prime.realization
    x = np.array([0.0, 1.0])  # coordinates of f = z
    for z in (0.3, -0.5, 0.2 + 0.4j):
        lhs = real_p.C @ np.linalg.solve(np.eye(2) - z * real_p.A, real_p.A @ x)
        expected = ROOT3_OVER_2 / (1.0 - z**2 / 2.0)
        assert abs(lhs[0] - expected) < 1e-14


def test_intertwining_seeded():
    theta = random_inner(2, 4, seed=43)
    pair = crofoot_theta(theta, random_contraction(2, 31), grid=GRID)
    report = intertwining_residuals(pair)
    assert report.backward_shift < 1e-9
    assert report.forward_shift < 1e-9
    assert report.defect_range_angle < 1e-8


def test_defect_transport_at_lambda_zero():
    # J_W maps defect_star onto defect_star' and defect onto defect'
    from scipy.linalg import subspace_angles

    theta = random_inner(3, 6, seed=47)
    pair = crofoot_theta(theta, random_contraction(3, 37), grid=GRID)
    b, b_p = theta.realization.B, pair.theta_prime.realization.B
    assert float(np.max(subspace_angles(b, b_p))) < 1e-8
    c, c_p = theta.realization.C.conj().T, pair.theta_prime.realization.C.conj().T
    assert float(np.max(subspace_angles(c, c_p))) < 1e-8
