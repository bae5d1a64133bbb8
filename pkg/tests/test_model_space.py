import numpy as np
import pytest

from mvcrofoot import (
    BoundaryGrid,
    DimensionMismatchError,
    ModelVector,
    OutOfDiskError,
    boundary_inner_product,
    defect_bases,
    kernel_vectors,
    model_operator_matrices,
    piecewise_action_residuals,
    project,
    random_inner,
    random_model_vector,
    scalar_inner,
)
from tests_common import shift_matrix_function


GRID = BoundaryGrid(256)


def test_z2_cascade_basis_is_one_and_z():
    # in cascade coordinates of K_{z^2}: e1 -> 1, e2 -> z
    theta = scalar_inner([0.0, 0.0])
    f1 = ModelVector(theta, [1.0, 0.0])
    f2 = ModelVector(theta, [0.0, 1.0])
    for z in (0.2, -0.5 + 0.4j, 0.9j):
        assert abs(f1.evaluate(z)[0] - 1.0) < 1e-15
        assert abs(f2.evaluate(z)[0] - z) < 1e-15


def test_kernel_at_zero_is_constant_one():
    theta = scalar_inner([0.0, 0.0])
    kernel, tilde = kernel_vectors(theta, 0.0, [1.0])
    assert np.allclose(kernel.x, [1.0, 0.0], atol=1e-15)  # the constant 1
    assert np.allclose(tilde.x, [0.0, 1.0], atol=1e-15)   # the function z
    assert abs(kernel.evaluate(0.77)[0] - 1.0) < 1e-15
    assert abs(tilde.evaluate(0.77)[0] - 0.77) < 1e-15


def test_kernel_at_half_is_one_plus_half_z():
    # (1 - z^2/4)/(1 - z/2) = 1 + z/2
    theta = scalar_inner([0.0, 0.0])
    kernel, _ = kernel_vectors(theta, 0.5, [1.0])
    assert abs(kernel.evaluate(0.5)[0] - 1.25) < 1e-15
    zs = np.array([0.1, -0.6, 0.3j])
    assert np.allclose(kernel.evaluate(zs)[:, 0], 1.0 + zs / 2.0, atol=1e-14)
    assert kernel.norm() ** 2 == pytest.approx(1.25, abs=1e-14)  # = k(1/2) by reproducing


def test_kernel_function_matches_closed_form():
    theta = random_inner(2, 4, seed=12)
    lam = 0.4 - 0.3j
    y = np.array([0.6, -0.8j])
    kernel, tilde = kernel_vectors(theta, lam, y)
    t_lam = theta.evaluate(lam)
    for z in (0.3, -0.2 + 0.6j):
        t_z = theta.evaluate(z)
        expect_k = (np.eye(2) - t_z @ t_lam.conj().T) @ y / (1.0 - np.conj(lam) * z)
        expect_t = (t_z - t_lam) @ y / (z - lam)
        assert np.linalg.norm(kernel.evaluate(z) - expect_k) < 1e-13
        assert np.linalg.norm(tilde.evaluate(z) - expect_t) < 1e-13


def test_reproducing_property_random():
    theta = random_inner(2, 5, seed=3)
    rng = np.random.default_rng(0)
    for _ in range(20):
        lam = 0.9 * np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())
        y = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        f = random_model_vector(theta, rng)
        kernel, _ = kernel_vectors(theta, lam, y)
        assert abs(f.inner(kernel) - np.vdot(y, f.evaluate(lam))) < 1e-10


def test_out_of_disk_rejected():
    theta = scalar_inner([0.0])
    with pytest.raises(OutOfDiskError):
        kernel_vectors(theta, 1.0, [1.0])


def test_coordinate_isometry_against_quadrature():
    theta = random_inner(3, 6, seed=8)
    basis = theta.basis_samples(GRID.nodes)
    rng = np.random.default_rng(5)
    for _ in range(100):
        x = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        y = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        quad = boundary_inner_product(basis @ x, basis @ y)
        assert abs(quad - np.vdot(y, x)) < 1e-9


def test_membership_orthogonal_to_theta_h2():
    theta = random_inner(2, 4, seed=21)
    nodes = GRID.nodes
    theta_samples = theta.transfer_samples(nodes)
    basis = theta.basis_samples(nodes)
    rng = np.random.default_rng(2)
    for _ in range(20):
        f = random_model_vector(theta, rng, normalize=True)
        coeffs = rng.standard_normal((9, 2)) + 1j * rng.standard_normal((9, 2))
        powers = nodes[:, None] ** np.arange(9)[None, :]
        g = np.einsum("mde,me->md", theta_samples, powers @ coeffs)
        assert abs(boundary_inner_product(basis @ f.x, g)) < 1e-9


def test_model_operator_matrices_z2():
    theta = scalar_inner([0.0, 0.0])
    s, s_star = model_operator_matrices(theta)
    # basis (1, z): S* sends z -> 1, 1 -> 0; S sends 1 -> z, z -> 0
    assert np.allclose(s_star, [[0.0, 1.0], [0.0, 0.0]], atol=1e-15)
    assert np.allclose(s, [[0.0, 0.0], [1.0, 0.0]], atol=1e-15)


def test_model_operator_zero_on_constants():
    theta = shift_matrix_function(2)  # K_Theta = constant C^2
    s, _ = model_operator_matrices(theta)
    assert np.linalg.norm(s, 2) < 1e-15


def test_backward_shift_kills_kernel_at_zero_when_theta0_zero():
    theta = scalar_inner([0.0, 0.0])  # Theta(0) = 0
    _, s_star = model_operator_matrices(theta)
    kernel, _ = kernel_vectors(theta, 0.0, [1.0])
    assert np.linalg.norm(s_star @ kernel.x) < 1e-15


def test_operator_norm_contractive_and_adjoint():
    theta = random_inner(2, 5, seed=17)
    s, s_star = model_operator_matrices(theta)
    assert np.linalg.norm(s, 2) <= 1.0 + 1e-12
    rng = np.random.default_rng(1)
    for _ in range(10):
        x = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        y = rng.standard_normal(5) + 1j * rng.standard_normal(5)
        assert abs(np.vdot(y, s @ x) - np.vdot(s_star @ y, x)) < 1e-12


def test_defect_bases_z2():
    theta = scalar_inner([0.0, 0.0])
    bases = defect_bases(theta)
    # defect_star = span{z} (coords e2), defect = span{1} (coords e1)
    assert bases.defect_star.shape == (2, 1)
    assert abs(abs(bases.defect_star[1, 0]) - 1.0) < 1e-15
    assert abs(abs(bases.defect[0, 0]) - 1.0) < 1e-15
    assert bases.defect_star_perp.shape == (2, 1)
    assert abs(abs(bases.defect_star_perp[0, 0]) - 1.0) < 1e-15


def test_defect_bases_full_space_cases():
    theta = shift_matrix_function(2)
    bases = defect_bases(theta)
    assert bases.defect_star.shape == (2, 2)
    assert bases.defect_star_perp.shape == (2, 0)

    scalar = scalar_inner([0.5])
    bases = defect_bases(scalar)
    assert bases.defect.shape == (1, 1) and bases.defect_star.shape == (1, 1)


def test_defect_bases_orthonormal_and_complementary():
    theta = random_inner(3, 7, seed=9)
    bases = defect_bases(theta)
    for basis, perp in ((bases.defect, bases.defect_perp), (bases.defect_star, bases.defect_star_perp)):
        both = np.hstack([basis, perp])
        assert both.shape == (7, 7)
        assert np.linalg.norm(both.conj().T @ both - np.eye(7), 2) < 1e-12
    # purity forces the defect ranks to equal d
    assert bases.defect.shape[1] == 3
    assert bases.defect_star.shape[1] == 3


@pytest.mark.parametrize("d,n,seed", [(1, 3, 0), (2, 4, 7), (3, 5, 11)])
def test_piecewise_action(d, n, seed):
    theta = random_inner(d, n, seed=seed)
    residuals = piecewise_action_residuals(theta)
    assert max(residuals.values()) < 1e-10


def test_project_annihilates_theta_h2():
    theta = scalar_inner([0.0, 0.0])
    result = project(theta, [0.0, 0.0, 0.0, 1.0], grid=GRID)  # h = z^3
    assert result.norm() < 1e-14


def test_project_extracts_model_component():
    theta = scalar_inner([0.0, 0.0])
    result = project(theta, [1.0, 0.0, 1.0], grid=GRID)  # h = 1 + z^2
    assert np.allclose(result.x, [1.0, 0.0], atol=1e-14)  # the constant 1


def test_project_vector_valued():
    theta = shift_matrix_function(2)
    result = project(theta, [[0.0, 1.0], [1.0, 0.0]], grid=GRID)  # h(z) = (z, 1)
    values = result.evaluate(np.array([0.3, -0.7j]))
    assert np.allclose(values, [[0.0, 1.0], [0.0, 1.0]], atol=1e-14)


def test_project_residual_orthogonal_to_model_space():
    theta = random_inner(2, 4, seed=30)
    rng = np.random.default_rng(4)
    coeffs = rng.standard_normal((7, 2)) + 1j * rng.standard_normal((7, 2))
    result = project(theta, coeffs, grid=GRID)
    powers = GRID.nodes[:, None] ** np.arange(7)[None, :]
    h = powers @ coeffs
    basis = theta.basis_samples(GRID.nodes)
    residual = h - basis @ result.x
    overlaps = np.einsum("mdi,md->i", np.conj(basis), residual) / GRID.size
    assert float(np.max(np.abs(overlaps))) < 1e-10


def test_project_degree_cap():
    theta = scalar_inner([0.0])
    with pytest.raises(ValueError):
        project(theta, np.zeros(70), grid=GRID)


def test_model_vector_dimension_check():
    theta = scalar_inner([0.0, 0.0])
    with pytest.raises(DimensionMismatchError):
        ModelVector(theta, [1.0, 2.0, 3.0])


def test_model_vector_singular_resolvent():
    from mvcrofoot import SingularResolventError

    theta = scalar_inner([0.5])
    f = ModelVector(theta, [1.0])
    with pytest.raises(SingularResolventError):
        f.evaluate(2.0)


def test_model_vector_arithmetic_and_norm():
    theta = scalar_inner([0.0, 0.0])
    f = ModelVector(theta, [1.0, 2.0])
    g = ModelVector(theta, [0.0, 1j])
    assert np.allclose((f + 2 * g).x, [1.0, 2.0 + 2j])
    assert np.allclose((f - g).x, [1.0, 2.0 - 1j])
    assert f.norm() == pytest.approx(np.sqrt(5.0))
    assert f.inner(g) == pytest.approx(complex(np.vdot(g.x, f.x)))


def test_model_vector_payload_carries_owner_hash():
    theta = scalar_inner([0.0, 0.0])
    payload = ModelVector(theta, [1.0, 2j]).to_payload()
    assert payload["theta_hash"] == theta.content_hash()
    assert payload["x"] == [[1.0, 0.0], [0.0, 2.0]]
