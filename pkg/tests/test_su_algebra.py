import math

import numpy as np
import pytest

from qufit.errors import ChartDomainError, DimensionMismatchError
from qufit.su_algebra import (
    PAULI,
    GeneratorBasis,
    ParamPoint,
    gellmann_basis,
    polar_axis,
    unitary_derivatives_exp,
    unitary_exp,
    unitary_su2,
)

from conftest import central_difference


@pytest.mark.parametrize("d", [2, 3, 4, 5, 6])
def test_basis_invariants(d):
    basis = gellmann_basis(d)
    T = basis.generators
    assert T.shape == (d * d - 1, d, d)
    assert np.max(np.abs(T - T.conj().transpose(0, 2, 1))) < 1e-12
    assert np.max(np.abs(np.trace(T, axis1=1, axis2=2))) < 1e-12
    gram = np.einsum("aij,bji->ab", T, T)
    assert np.max(np.abs(gram - np.eye(d * d - 1))) < 1e-12


@pytest.mark.parametrize("d", [2, 3, 4, 5, 6])
def test_diagonal_coefficient_relations(d):
    c = gellmann_basis(d).diagonal_coeffs
    assert np.max(np.abs(c.sum(axis=1))) < 1e-12
    assert np.max(np.abs(c @ c.T - np.eye(d - 1))) < 1e-12
    # the derived completeness relation sum_m c_mk c_ml = delta_kl - 1/d
    assert np.max(np.abs(c.T @ c - (np.eye(d) - 1.0 / d))) < 1e-12


def test_d2_basis_is_scaled_paulis():
    T = gellmann_basis(2).generators
    np.testing.assert_allclose(T, PAULI / math.sqrt(2), atol=1e-15)


def test_rejects_dimension_below_two():
    with pytest.raises(ValueError):
        gellmann_basis(1)


def test_unitary_exp_at_origin_is_identity():
    basis = gellmann_basis(3)
    np.testing.assert_allclose(unitary_exp(basis, np.zeros(8)), np.eye(3), atol=1e-14)


@pytest.mark.parametrize("d", [2, 3, 4, 5, 6])
def test_unitary_exp_is_unitary(d, rng):
    basis = gellmann_basis(d)
    for _ in range(5):
        theta = rng.uniform(-2, 2, d * d - 1)
        U = unitary_exp(basis, theta)
        assert np.max(np.abs(U.conj().T @ U - np.eye(d))) < 1e-10
        assert abs(abs(np.linalg.det(U)) - 1) < 1e-10


def test_unitary_exp_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        unitary_exp(gellmann_basis(2), np.zeros(8))


def test_exp_chart_matches_polar_chart_along_z():
    # theta along the diagonal generator with norm sqrt(2) * pi/2 lands on
    # the polar-chart value at alpha = pi/2, theta = 0
    basis = gellmann_basis(2)
    theta = np.array([0.0, 0.0, math.sqrt(2) * math.pi / 2])
    U_exp = unitary_exp(basis, theta)
    U_polar, _ = unitary_su2(math.pi / 2, 0.0, 0.0)
    np.testing.assert_allclose(U_exp, U_polar, atol=1e-10)


def test_exp_derivatives_at_origin():
    basis = gellmann_basis(3)
    dU = unitary_derivatives_exp(basis, np.zeros(8))
    np.testing.assert_allclose(dU, 1j * basis.generators, atol=1e-13)


def test_exp_derivatives_match_finite_differences(rng):
    basis = gellmann_basis(3)
    theta = rng.uniform(-1, 1, 8)
    dU = unitary_derivatives_exp(basis, theta)
    fd = central_difference(lambda t: unitary_exp(basis, t), theta)
    assert np.max(np.abs(dU - fd)) < 1e-7


def test_exp_derivatives_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        unitary_derivatives_exp(gellmann_basis(3), np.zeros(3))


def test_charts_agree_on_tangent_vectors():
    # the polar point maps to exp coordinates sqrt(2) * alpha * n(theta, phi);
    # pushing the exp-chart derivatives through the coordinate Jacobian must
    # reproduce the closed-form polar partials
    basis = gellmann_basis(2)
    alpha, theta, phi = 0.9, 1.2, 0.7
    n = polar_axis(theta, phi)
    coords = math.sqrt(2) * alpha * n
    U_exp = unitary_exp(basis, coords)
    dU_exp = unitary_derivatives_exp(basis, coords)
    U_polar, dU_polar = unitary_su2(alpha, theta, phi)
    np.testing.assert_allclose(U_exp, U_polar, atol=1e-12)
    dn_dtheta = np.array(
        [
            math.cos(theta) * math.cos(phi),
            math.cos(theta) * math.sin(phi),
            -math.sin(theta),
        ]
    )
    dn_dphi = np.array(
        [-math.sin(theta) * math.sin(phi), math.sin(theta) * math.cos(phi), 0.0]
    )
    jac = math.sqrt(2) * np.stack([n, alpha * dn_dtheta, alpha * dn_dphi], axis=1)
    for k, dU_k in enumerate(dU_polar):
        pushed = np.einsum("a,aij->ij", jac[:, k], dU_exp)
        np.testing.assert_allclose(pushed, dU_k, atol=1e-10)


def test_su2_closed_form_values():
    U0, _ = unitary_su2(0.0, 0.3, 0.4)
    np.testing.assert_allclose(U0, np.eye(2), atol=1e-15)
    U1, _ = unitary_su2(math.pi / 2, math.pi / 2, 0.0)
    np.testing.assert_allclose(U1, 1j * PAULI[0], atol=1e-15)


def test_su2_partials_match_finite_differences(rng):
    for _ in range(20):
        coords = rng.uniform(0.2, 2.9, 3)
        _, dU = unitary_su2(*coords)
        fd = central_difference(lambda c: unitary_su2(*c)[0], coords)
        assert np.max(np.abs(np.array(dU) - fd)) < 1e-8


def test_polar_point_domain():
    ParamPoint.su2(0.5, 0.5, -2.0)  # interior is fine, phi unconstrained
    for bad in [(1e-7, 0.5, 0.0), (0.5, 1e-7, 0.0), (math.pi - 1e-7, 0.5, 0.0),
                (0.5, math.pi - 1e-7, 0.0)]:
        with pytest.raises(ChartDomainError):
            ParamPoint.su2(*bad)


def test_exp_point_is_unconstrained():
    point = ParamPoint.exp(np.arange(8.0))
    assert point.n_params == 8
    with pytest.raises(ChartDomainError):
        ParamPoint(np.zeros((2, 2)), "exp")
    with pytest.raises(ChartDomainError):
        ParamPoint(np.zeros(3), "spherical")


def test_generator_basis_validate_rejects_corruption():
    basis = gellmann_basis(3)
    broken = np.array(basis.generators)
    broken[0] = broken[0] + 0.01
    with pytest.raises(ValueError):
        GeneratorBasis(3, broken, basis.diagonal_coeffs).validate()
