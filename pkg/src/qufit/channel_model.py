"""Bipartite probe states and the output model of the one-sided channel.

A probe on C^d x C^d is stored by its coefficient matrix R (state vector
sum_kl R_kl |kl>), which makes the reduced matrix R R^dag a one-line
diagnostic and the maximal-entanglement test exact. Applying U to the first
subsystem maps the coefficient matrix to U R, so output kets and their
parameter derivatives are plain matrix products.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .config import TOL, Tolerances
from .errors import DimensionMismatchError, PovmValidationError
from .su_algebra import (
    CHART_SU2,
    PAULI,
    GeneratorBasis,
    ParamPoint,
    gellmann_basis,
    unitary_derivatives_exp,
    unitary_exp,
    unitary_su2,
)

MAX_ENT_FLAG_TOL = 1e-10


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class BipartiteState:
    """Pure probe state on C^d x C^d held as its coefficient matrix."""

    d: int
    R: np.ndarray

    def __post_init__(self):
        R = np.asarray(self.R, dtype=complex)
        if R.shape != (self.d, self.d):
            raise DimensionMismatchError(f"coefficient matrix must be {self.d}x{self.d}")
        norm = np.trace(R @ R.conj().T).real
        if abs(norm - 1.0) > TOL.algebra:
            raise ValueError(f"state not normalised: tr RR^dag = {norm!r}")
        object.__setattr__(self, "R", _readonly(R))

    @property
    def reduced(self) -> np.ndarray:
        """Reduced density matrix of the first subsystem, R R^dag."""
        return self.R @ self.R.conj().T

    @property
    def maximally_entangled(self) -> bool:
        return bool(
            np.max(np.abs(self.reduced - np.eye(self.d) / self.d)) < MAX_ENT_FLAG_TOL
        )

    @property
    def ket(self) -> np.ndarray:
        return self.R.reshape(-1)

    def entanglement_coords(self, basis: GeneratorBasis) -> np.ndarray:
        """Expansion coefficients of RR^dag - 1/d over the generator basis;
        all zero exactly for a maximally entangled state."""
        w = self.reduced - np.eye(self.d) / self.d
        return np.einsum("aij,ji->a", basis.generators, w).real


def max_entangled(d: int) -> BipartiteState:
    """The probe sum_k |kk> / sqrt(d)."""
    if d < 2:
        raise ValueError(f"need dimension d >= 2, got {d}")
    return BipartiteState(d, np.eye(d, dtype=complex) / math.sqrt(d))


def singlet() -> BipartiteState:
    """The two-qubit state (|10> - |01>) / sqrt(2)."""
    R = np.array([[0.0, -1.0], [1.0, 0.0]], dtype=complex) / math.sqrt(2)
    return BipartiteState(2, R)


def random_state(d: int, rng: np.random.Generator) -> BipartiteState:
    """Probe with i.i.d. standard complex Gaussian coefficients, normalised."""
    R = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    R /= math.sqrt(np.trace(R @ R.conj().T).real)
    return BipartiteState(d, R)


@dataclass(frozen=True)
class OutputModel:
    """Output ket, its parameter derivatives and derived density forms.

    ``lvecs`` are the vectors 2(|psi_,a> + <psi_,a|psi> |psi>) whose real
    Gram matrix is the quantum Fisher information of the pure output state.
    """

    d: int
    psi: np.ndarray
    dpsi: np.ndarray
    lvecs: np.ndarray
    point: ParamPoint | None = None

    @property
    def n_params(self) -> int:
        return self.dpsi.shape[0]

    @property
    def rho(self) -> np.ndarray:
        return np.outer(self.psi, self.psi.conj())

    @property
    def rho_derivs(self) -> np.ndarray:
        return np.einsum("ai,j->aij", self.dpsi, self.psi.conj()) + np.einsum(
            "i,aj->aij", self.psi, self.dpsi.conj()
        )

    def validate(self, tol: Tolerances = TOL) -> None:
        if abs(np.vdot(self.psi, self.psi).real - 1.0) > tol.symmetry:
            raise ValueError("output ket not normalised")
        overlaps = self.dpsi.conj() @ self.psi
        if np.max(np.abs(overlaps.real)) > tol.symmetry:
            raise ValueError("derivative kets violate the normalisation constraint")
        l_overlaps = self.lvecs.conj() @ self.psi
        if np.max(np.abs(l_overlaps.real)) > tol.symmetry:
            raise ValueError("l-vectors have non-imaginary overlap with the output ket")


def output_model(
    U: np.ndarray,
    dU: np.ndarray,
    state: BipartiteState,
    point: ParamPoint | None = None,
) -> OutputModel:
    """Push a probe through U x 1 and package kets, derivatives and l-vectors."""
    U = np.asarray(U, dtype=complex)
    dU = np.asarray(dU, dtype=complex)
    d = state.d
    if U.shape != (d, d):
        raise DimensionMismatchError(f"unitary must be {d}x{d}, got {U.shape}")
    if dU.ndim != 3 or dU.shape[1:] != (d, d):
        raise DimensionMismatchError("derivative stack must have shape (p, d, d)")
    psi = (U @ state.R).reshape(-1)
    dpsi = np.einsum("aij,jk->aik", dU, state.R).reshape(len(dU), -1)
    overlaps = dpsi.conj() @ psi  # <psi_,a | psi>, purely imaginary
    lvecs = 2.0 * (dpsi + overlaps[:, None] * psi[None, :])
    return OutputModel(
        d=d,
        psi=_readonly(psi),
        dpsi=_readonly(dpsi),
        lvecs=_readonly(lvecs),
        point=point,
    )


def singlet_output_model(alpha: float, theta: float, phi: float) -> OutputModel:
    """Qubit model: singlet probe, closed-form polar-chart unitary."""
    point = ParamPoint.su2(alpha, theta, phi)
    U, dU = unitary_su2(alpha, theta, phi)
    return output_model(U, np.array(dU), singlet(), point=point)


def exp_output_model(
    basis: GeneratorBasis, theta, state: BipartiteState | None = None
) -> OutputModel:
    """General-d model on the exponential chart; defaults to the maximally
    entangled probe."""
    if state is None:
        state = max_entangled(basis.d)
    if state.d != basis.d:
        raise DimensionMismatchError("probe and generator basis disagree on d")
    point = ParamPoint.exp(theta)
    U = unitary_exp(basis, point.coords)
    dU = unitary_derivatives_exp(basis, point.coords)
    return output_model(U, dU, state, point=point)


def output_model_at(
    point: ParamPoint,
    state: BipartiteState | None = None,
    basis: GeneratorBasis | None = None,
) -> OutputModel:
    """Dispatch on the chart tag of ``point``."""
    if point.chart == CHART_SU2:
        if state is None:
            return singlet_output_model(point.alpha, point.theta, point.phi)
        if state.d != 2:
            raise DimensionMismatchError("polar chart is for d = 2")
        U, dU = unitary_su2(point.alpha, point.theta, point.phi)
        return output_model(U, np.array(dU), state, point=point)
    if basis is None:
        d = int(round(math.sqrt(point.n_params + 1)))
        basis = gellmann_basis(d)
    return exp_output_model(basis, point.coords, state)


def heisenberg_coefficients(alpha: float, theta: float, phi: float) -> np.ndarray:
    """The 3x3 table (1/2) tr(U sigma_i U^dag sigma_j): a rotation matrix."""
    ParamPoint.su2(alpha, theta, phi)  # domain check
    return _kernels.heisenberg_rotation_batch(np.array([[alpha, theta, phi]]))[0]


def pauli_output_density(alpha: float, theta: float, phi: float):
    """Density matrix of the qubit model in its Pauli form, with derivatives.

    rho = (1x1 - sum_i U sigma_i U^dag x sigma_i) / 4, differentiated through
    the closed-form unitary. Agrees with the projector form from
    ``singlet_output_model`` wherever both apply.

    Returns:
        (rho, drho) with shapes (4, 4) and (3, 4, 4).
    """
    ParamPoint.su2(alpha, theta, phi)  # domain check
    U, dU = unitary_su2(alpha, theta, phi)
    rho = np.eye(4, dtype=complex)
    for sigma in PAULI:
        rho -= np.kron(U @ sigma @ U.conj().T, sigma)
    rho /= 4.0
    drho = np.zeros((3, 4, 4), dtype=complex)
    for a in range(3):
        dUa = dU[a]
        for sigma in PAULI:
            inner = dUa @ sigma @ U.conj().T + U @ sigma @ dUa.conj().T
            drho[a] -= np.kron(inner, sigma) / 4.0
    return rho, drho


def pauli_correlators(element: np.ndarray):
    """Trace and correlator table of a two-qubit operator.

    Returns (t, G) with t = tr M and G[j, i] = tr[(sigma_j x sigma_i) M],
    the representation consumed by the evaluation kernels.
    """
    element = np.asarray(element, dtype=complex)
    if element.shape != (4, 4):
        raise DimensionMismatchError("correlator table is defined for 4x4 operators")
    t = np.trace(element).real
    G = np.empty((3, 3))
    for j in range(3):
        for i in range(3):
            G[j, i] = np.trace(np.kron(PAULI[j], PAULI[i]) @ element).real
    return t, G


def outcome_probabilities(rho: np.ndarray, povm, check: bool = True) -> np.ndarray:
    """Born-rule probabilities tr(rho M_xi) for every POVM element."""
    rho = np.asarray(rho, dtype=complex)
    elements = np.asarray(povm.elements, dtype=complex)
    if elements.shape[1:] != rho.shape:
        raise DimensionMismatchError(
            f"POVM dimension {elements.shape[1]} does not match state {rho.shape[0]}"
        )
    if check:
        residual = np.max(np.abs(elements.sum(axis=0) - np.eye(rho.shape[0])))
        if residual > TOL.povm_completeness:
            raise PovmValidationError(f"elements do not sum to identity ({residual:.3e})")
    probs = np.einsum("ij,nji->n", rho, elements).real
    if check:
        if probs.min() < TOL.probability_floor:
            raise PovmValidationError(f"negative outcome probability {probs.min():.3e}")
        if abs(probs.sum() - 1.0) > TOL.probability_sum:
            raise PovmValidationError(f"probabilities sum to {probs.sum()!r}")
    return probs
