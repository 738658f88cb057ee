import math

import numpy as np
import pytest

from qufit.channel_model import (
    BipartiteState,
    exp_output_model,
    heisenberg_coefficients,
    max_entangled,
    outcome_probabilities,
    output_model,
    output_model_at,
    pauli_correlators,
    pauli_output_density,
    random_state,
    singlet,
    singlet_output_model,
)
from qufit.errors import ChartDomainError, DimensionMismatchError, PovmValidationError
from qufit.povm import Povm, bell_basis, random_product_povm
from qufit.su_algebra import PAULI, ParamPoint, gellmann_basis, unitary_su2

from conftest import partial_trace_first, random_su2_points


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_max_entangled(d):
    state = max_entangled(d)
    np.testing.assert_allclose(state.R, np.eye(d) / math.sqrt(d), atol=1e-15)
    np.testing.assert_allclose(state.reduced, np.eye(d) / d, atol=1e-14)
    assert state.maximally_entangled


def test_singlet_overlaps():
    ket = singlet().ket
    assert abs(ket[0 * 2 + 1] - (-1 / math.sqrt(2))) < 1e-15  # <01|psi>
    assert abs(ket[0]) < 1e-15  # <00|psi>
    np.testing.assert_allclose(singlet().reduced, np.eye(2) / 2, atol=1e-15)
    assert singlet().maximally_entangled


def test_random_state_normalised(rng):
    for d in (2, 3, 4):
        state = random_state(d, rng)
        assert abs(np.trace(state.reduced).real - 1) < 1e-12


def test_state_rejects_unnormalised():
    with pytest.raises(ValueError):
        BipartiteState(2, np.eye(2))


def test_entanglement_coords_vanish_iff_maximally_entangled(rng):
    basis = gellmann_basis(3)
    assert np.max(np.abs(max_entangled(3).entanglement_coords(basis))) < 1e-14
    state = random_state(3, rng)
    assert np.max(np.abs(state.entanglement_coords(basis))) > 1e-3


def test_output_model_invariants(rng):
    for coords in random_su2_points(10, rng):
        model = singlet_output_model(*coords)
        model.validate()
        assert abs(np.vdot(model.psi, model.psi).real - 1) < 1e-12
        # density forms rebuild from the kets
        np.testing.assert_allclose(
            model.rho, np.outer(model.psi, model.psi.conj()), atol=1e-12
        )
        for a in range(3):
            expected = np.outer(model.dpsi[a], model.psi.conj())
            expected += expected.conj().T
            np.testing.assert_allclose(model.rho_derivs[a], expected, atol=1e-12)


def test_derivative_kets_at_identity_match_generator_action():
    basis = gellmann_basis(3)
    state = max_entangled(3)
    model = exp_output_model(basis, np.zeros(8), state)
    for a in range(8):
        expected = (1j * basis.generators[a] @ state.R).reshape(-1)
        np.testing.assert_allclose(model.dpsi[a], expected, atol=1e-13)


def test_second_subsystem_untouched(rng):
    for coords in random_su2_points(5, rng):
        model = singlet_output_model(*coords)
        rho_b = partial_trace_first(model.rho, 2)
        np.testing.assert_allclose(rho_b, np.eye(2) / 2, atol=1e-12)


def test_output_model_dimension_errors():
    with pytest.raises(DimensionMismatchError):
        output_model(np.eye(3), np.zeros((8, 3, 3)), singlet())
    with pytest.raises(DimensionMismatchError):
        output_model(np.eye(2), np.zeros((3, 4, 4)), singlet())


def test_output_model_at_dispatch():
    point = ParamPoint.su2(0.8, 1.0, 0.5)
    model = output_model_at(point)
    np.testing.assert_allclose(
        model.psi, singlet_output_model(0.8, 1.0, 0.5).psi, atol=1e-15
    )
    exp_point = ParamPoint.exp(np.zeros(8))
    assert output_model_at(exp_point).d == 3


def test_heisenberg_closed_form_against_conjugation_oracle(rng):
    # direct conjugation at U = i sigma_1: sigma_1 sigma_i sigma_1
    K = heisenberg_coefficients(math.pi / 2, math.pi / 2, 0.0)
    np.testing.assert_allclose(K, np.diag([1.0, -1.0, -1.0]), atol=1e-12)
    for coords in random_su2_points(50, rng):
        K = heisenberg_coefficients(*coords)
        assert np.max(np.abs(K @ K.T - np.eye(3))) < 1e-10
        assert abs(np.linalg.det(K) - 1) < 1e-10
        U, _ = unitary_su2(*coords)
        brute = np.array(
            [
                [0.5 * np.trace(U @ PAULI[i] @ U.conj().T @ PAULI[j]).real
                 for j in range(3)]
                for i in range(3)
            ]
        )
        assert np.max(np.abs(K - brute)) < 1e-12


def test_pauli_density_matches_projector_form(rng):
    for coords in random_su2_points(20, rng):
        rho, drho = pauli_output_density(*coords)
        model = singlet_output_model(*coords)
        assert np.max(np.abs(rho - model.rho)) < 1e-10
        assert np.max(np.abs(drho - model.rho_derivs)) < 1e-10
        assert abs(np.trace(rho).real - 1) < 1e-10
        assert np.max(np.abs(rho @ rho - rho)) < 1e-10


def test_pauli_density_near_identity_is_singlet_projector():
    alpha = 1e-3
    rho, _ = pauli_output_density(alpha, 1.0, 0.5)
    projector = np.outer(singlet().ket, singlet().ket.conj())
    assert np.max(np.abs(rho - projector)) < 5 * alpha


def test_pauli_density_domain_check():
    with pytest.raises(ChartDomainError):
        pauli_output_density(1e-9, 1.0, 0.0)


def test_outcome_probabilities_identity_povm():
    model = singlet_output_model(0.7, 0.9, 1.3)
    trivial = Povm(np.eye(4)[None, :, :])
    np.testing.assert_allclose(
        outcome_probabilities(model.rho, trivial), [1.0], atol=1e-14
    )


def test_outcome_probabilities_continuity_at_identity():
    model = singlet_output_model(1e-4, 1.0, 0.5)
    probs = outcome_probabilities(model.rho, bell_basis())
    assert probs[3] > 0.9999
    assert abs(probs.sum() - 1) < 1e-12


def test_probabilities_normalised_at_many_points(rng):
    povm = bell_basis()
    for coords in random_su2_points(50, rng):
        probs = outcome_probabilities(singlet_output_model(*coords).rho, povm)
        assert probs.min() > -1e-12
        assert abs(probs.sum() - 1) < 1e-10


def test_product_probability_closed_form(rng):
    # Bloch-vector form for rank-one product measurements on the qubit model
    povm = random_product_povm(2, 2, seed=31)
    from qufit.su_algebra import polar_axis

    for coords in random_su2_points(5, rng):
        alpha = coords[0]
        n = polar_axis(coords[1], coords[2])
        probs = outcome_probabilities(singlet_output_model(*coords).rho, povm)
        for p_xi, (term,) in zip(probs, povm.structure):
            a = np.array([np.vdot(term.a, s @ term.a).real for s in PAULI])
            b = np.array([np.vdot(term.b, s @ term.b).real for s in PAULI])
            closed = (term.c / 4) * (
                1
                - math.cos(2 * alpha) * (a @ b)
                + math.sin(2 * alpha) * (np.cross(b, a) @ n)
                - 2 * math.sin(alpha) ** 2 * (n @ a) * (n @ b)
            )
            assert abs(p_xi - closed) < 1e-12


def test_outcome_probability_errors():
    model = singlet_output_model(0.7, 0.9, 1.3)
    with pytest.raises(DimensionMismatchError):
        outcome_probabilities(np.eye(2) / 2, bell_basis())
    half = Povm(0.5 * bell_basis().elements, check=False)
    with pytest.raises(PovmValidationError):
        outcome_probabilities(model.rho, half)


def test_pauli_correlators_shape_and_singlet_values():
    projector = np.outer(singlet().ket, singlet().ket.conj())
    t, G = pauli_correlators(projector)
    assert abs(t - 1) < 1e-14
    np.testing.assert_allclose(G, -np.eye(3), atol=1e-14)
    with pytest.raises(DimensionMismatchError):
        pauli_correlators(np.eye(3))
