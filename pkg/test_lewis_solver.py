"""
Tests for the Lewis basis solvers and certificates
"""
import numpy as np
import pytest

from errors import DegenerateBasis, DimensionMismatch, InvalidExponent, NoConvergence, SingularCoefficient, UsageError
from lewis_solver import (
    LewisCertificate, SolverConfig, SubspaceBasis, certify_lewis, diagonal_subspace, grad_psi,
    lambda_of, lambda_squared, psi, random_subspace, solve_lewis,
)
from run_acceptance import lewis_grid
from spectral_core import random_orthogonal, schatten_norm, sym_power


def test_lambda_of_zero():
    basis = random_subspace(2, 3, 1.0, seed=1)
    np.testing.assert_array_equal(lambda_of(np.zeros((2, 2)), basis), np.zeros((3, 3)))
    assert psi(np.zeros((2, 2)), basis) == 0.0


def test_lambda_of_single_element():
    basis = SubspaceBasis([np.diag([3.0, 4.0])], 1.0)
    np.testing.assert_allclose(lambda_of(np.eye(1), basis), np.diag([3.0, 4.0]), atol=1e-12)


def test_lambda_squared_double_sum(rng):
    basis = random_subspace(3, 4, 1.5, seed=2)
    A = rng.standard_normal((3, 3))
    W = basis.elements
    expected = sum(A[j, a] * A[j, b] * W[a].T @ W[b] for j in range(3) for a in range(3) for b in range(3))
    np.testing.assert_allclose(lambda_squared(A, basis), expected, atol=1e-10)


def test_lambda_of_rejects_wrong_shape():
    with pytest.raises(DimensionMismatch):
        lambda_of(np.eye(3), random_subspace(2, 3, 1.0))


def test_psi_scalar_homogeneity(rng):
    W = rng.standard_normal((3, 3))
    basis = SubspaceBasis([W], 1.5)
    assert psi(np.array([[-2.0]]), basis) == pytest.approx(2.0 ** 1.5 * schatten_norm(W, 1.5) ** 1.5, rel=1e-10)


def test_psi_frobenius_at_p2(rng):
    basis = random_subspace(3, 4, 2.0, seed=4)
    A = rng.standard_normal((3, 3))
    expected = sum(np.linalg.norm(S) ** 2 for S in basis.combine(A))
    assert psi(A, basis) == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize('p', [1.0, 1.5, 3.0])
def test_psi_homogeneity(rng, p):
    basis = random_subspace(3, 4, p, seed=6)
    A = rng.standard_normal((3, 3))
    assert psi(-1.7 * A, basis) == pytest.approx(1.7 ** p * psi(A, basis), rel=1e-10)


@pytest.mark.parametrize('p', [1.0, 1.5, 3.0])
def test_grad_psi_finite_differences(rng, p):
    basis = random_subspace(3, 4, p, seed=8)
    B = rng.standard_normal((3, 3)) + 3 * np.eye(3)
    g = grad_psi(B, basis)
    h = 1e-5
    numeric = np.zeros((3, 3))
    for u in range(3):
        for t in range(3):
            E = np.zeros((3, 3))
            E[u, t] = h
            numeric[u, t] = (psi(B + E, basis) - psi(B - E, basis)) / (2 * h)
    assert np.max(np.abs(numeric - g)) <= 1e-4 * max(1.0, np.max(np.abs(g)))


@pytest.mark.parametrize('p', [1.0, 1.5, 3.0])
def test_grad_psi_euler_identity(rng, p):
    basis = random_subspace(3, 4, p, seed=9)
    B = rng.standard_normal((3, 3)) + 3 * np.eye(3)
    assert np.sum(B * grad_psi(B, basis)) == pytest.approx(p * psi(B, basis), rel=1e-8)


def test_grad_psi_single_element():
    W = np.diag([0.6, 0.8])
    basis = SubspaceBasis([W], 2.0)
    np.testing.assert_allclose(grad_psi(np.array([[1.5]]), basis), [[3.0]], rtol=1e-12)


def test_grad_psi_singular():
    with pytest.raises(SingularCoefficient):
        grad_psi(np.zeros((2, 2)), random_subspace(2, 3, 1.0))


def test_basis_rejects_bad_input():
    with pytest.raises(InvalidExponent):
        SubspaceBasis([np.eye(2)], 0)
    with pytest.raises(DegenerateBasis):
        SubspaceBasis([np.eye(2), 2 * np.eye(2)], 1.0)
    with pytest.raises(DegenerateBasis):
        random_subspace(5, 2, 1.0)
    with pytest.raises(DimensionMismatch):
        SubspaceBasis([np.eye(2), np.eye(3)], 1.0)


def test_basis_coordinates(rng):
    basis = random_subspace(3, 4, 1.0, seed=10)
    c = rng.standard_normal(3)
    coefficients, residual = basis.coordinates(np.tensordot(c, basis.elements, axes=1))
    np.testing.assert_allclose(coefficients, c, atol=1e-10)
    assert residual <= 1e-10


def test_solver_config_validation():
    with pytest.raises(UsageError):
        SolverConfig(tol=0)
    with pytest.raises(UsageError):
        SolverConfig(max_iters=0)
    with pytest.raises(UsageError):
        SolverConfig(mode='newton')


@pytest.mark.parametrize('p', [0.5, 1.0, 3.0])
def test_diagonal_subspace_gives_identity_m(p):
    cert = solve_lewis(diagonal_subspace(4, p), SolverConfig(tol=1e-11))
    np.testing.assert_allclose(cert.M, np.eye(4), atol=1e-8)
    residuals = certify_lewis(cert, p)
    assert residuals.gram_residual <= 1e-10
    assert residuals.trace_residual <= 1e-10


def test_single_element_is_normalised(rng):
    W = rng.standard_normal((3, 3))
    cert = solve_lewis(SubspaceBasis([W], 1.5))
    np.testing.assert_allclose(cert.basis[0], W / schatten_norm(W, 1.5), atol=1e-6)
    np.testing.assert_allclose(cert.M, cert.basis[0].T @ cert.basis[0], atol=1e-12)
    assert certify_lewis(cert, 1.5).trace_residual <= 1e-8


def test_random_subspace_certified(lewis_p1):
    residuals = certify_lewis(lewis_p1, 1.0)
    assert residuals.worst <= 1e-6
    w = np.clip(np.linalg.eigvalsh(lewis_p1.M), 0, None)
    assert np.sum(np.sqrt(w)) == pytest.approx(3.0, abs=1e-6)
    assert np.linalg.det(lewis_p1.coefficients) > 0


def test_corrupted_certificate_detected():
    T = np.stack([np.diag(row) for row in np.eye(3)])
    cert = LewisCertificate(p=2.0, basis=T, M=np.eye(3), gram_residual=0.0, trace_residual=0.0)
    assert certify_lewis(cert, 2.0).worst <= 1e-12
    corrupted = T.copy()
    corrupted[0] *= 2
    bad = LewisCertificate(p=2.0, basis=corrupted, M=np.eye(3), gram_residual=0.0, trace_residual=0.0)
    assert certify_lewis(bad, 2.0).gram_residual >= 1.0


@pytest.mark.parametrize('p', [1.0, 1.5])
def test_m_is_basis_independent(rng, p):
    basis = random_subspace(3, 4, p, seed=12)
    R = rng.standard_normal((3, 3)) + 2 * np.eye(3)
    config = SolverConfig(tol=1e-10)
    first = solve_lewis(basis, config)
    second = solve_lewis(basis.transformed(R), config)
    np.testing.assert_allclose(first.M, second.M, atol=1e-6)


def test_orthogonal_conjugation(rng):
    basis = random_subspace(2, 3, 1.0, seed=13)
    U, V = random_orthogonal(3, rng), random_orthogonal(3, rng)
    config = SolverConfig(tol=1e-10)
    plain = solve_lewis(basis, config)
    conjugated = solve_lewis(basis.conjugated(U, V), config)
    np.testing.assert_allclose(conjugated.M, V.T @ plain.M @ V, atol=1e-6)


def test_gradient_ascent_agrees_with_fixed_point():
    basis = random_subspace(2, 3, 2.0, seed=14)
    fixed = solve_lewis(basis, SolverConfig(tol=1e-9))
    ascent = solve_lewis(basis, SolverConfig(tol=1e-8, mode='gradient_ascent'))
    assert certify_lewis(ascent, 2.0).worst <= 1e-8
    np.testing.assert_allclose(ascent.M, fixed.M, atol=1e-5)


def test_iteration_cap_raises():
    with pytest.raises(NoConvergence) as excinfo:
        solve_lewis(random_subspace(3, 4, 1.0, seed=15), SolverConfig(max_iters=1))
    assert excinfo.value.iters == 1
    assert excinfo.value.best_residual > 0


def test_iteration_cap_defaults_by_mode():
    assert SolverConfig().max_iters == 10000
    assert SolverConfig(mode='gradient_ascent').max_iters == 50000
    assert SolverConfig(mode='gradient_ascent', max_iters=7).max_iters == 7


def test_gradient_ascent_converges_on_ill_conditioned_l1_subspace():
    basis = random_subspace(5, 5, 1.0, seed=44)
    cert = solve_lewis(basis, SolverConfig(seed=44, mode='gradient_ascent'))
    assert certify_lewis(cert, 1.0).worst <= 1e-8
    fixed = solve_lewis(basis, SolverConfig(seed=44))
    np.testing.assert_allclose(cert.M, fixed.M, atol=1e-5)


def test_solver_is_deterministic():
    basis = random_subspace(3, 4, 1.5, seed=16)
    first = solve_lewis(basis, SolverConfig(seed=7))
    second = solve_lewis(basis, SolverConfig(seed=7))
    np.testing.assert_array_equal(first.basis, second.basis)
    assert first.iters == second.iters


def test_certificate_serialisation(lewis_p15):
    restored = LewisCertificate.from_dict(lewis_p15.to_dict())
    np.testing.assert_array_equal(restored.basis, lewis_p15.basis)
    np.testing.assert_array_equal(restored.M, lewis_p15.M)
    assert restored.iters == lewis_p15.iters


def test_lewis_weight_power_of_m(lewis_p15):
    Z = sym_power(lewis_p15.M, 1.5 / 2)
    assert np.trace(Z) == pytest.approx(3.0, abs=1e-6)


def test_certification_grid_subspaces_fit_their_ambient_space():
    grid = lewis_grid()
    assert len(grid) == 50
    assert all(k <= m * m for _, k, m, _ in grid)
    for seed, k, m, p in (grid[14], grid[49]):
        cert = solve_lewis(random_subspace(k, m, p, seed), SolverConfig(seed=seed))
        assert certify_lewis(cert, p).worst <= 1e-6
