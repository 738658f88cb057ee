"""Quantum and classical Fisher information, the quantum Cramér-Rao bound,
attainability diagnostics, and the tr(H^-1 I) figure of merit.

For a pure output model the quantum Fisher matrix is the real Gram matrix of
the l-vectors; the classical Fisher matrix of a POVM is assembled from the
Born-rule probabilities and their parameter derivatives. Measurements are
compared by tr(H^-1 I), which never exceeds the parameter count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import TOL, Tolerances
from .errors import (
    DimensionMismatchError,
    IllPosedSldError,
    SingularFisherError,
    SingularOutcomeError,
)

KIND_QUANTUM = "quantum"
KIND_CLASSICAL = "classical"


@dataclass(frozen=True)
class FisherMatrix:
    """Real symmetric PSD information matrix with a quantum/classical tag."""

    matrix: np.ndarray
    kind: str

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatchError("information matrix must be square")
        if np.max(np.abs(m - m.T)) > TOL.symmetry:
            raise ValueError("information matrix is not symmetric")
        if np.linalg.eigvalsh(m).min() < TOL.psd:
            raise ValueError("information matrix is not positive semidefinite")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def n_params(self) -> int:
        return self.matrix.shape[0]

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix).min())

    def rank(self, rel_tol: float = 1e-8) -> int:
        eigs = np.linalg.eigvalsh(self.matrix)
        scale = max(eigs.max(), 1e-300)
        return int(np.sum(eigs > rel_tol * scale))


def _as_matrix(m) -> np.ndarray:
    return np.asarray(m.matrix if isinstance(m, FisherMatrix) else m, dtype=float)


def qfi_pure(model) -> FisherMatrix:
    """Quantum Fisher matrix Re <l_i|l_j> of a pure output model."""
    gram = model.lvecs.conj() @ model.lvecs.T
    return FisherMatrix(gram.real.copy(), KIND_QUANTUM)


def achievability_gap(model):
    """The matrix Im <l_i|l_j> and its largest absolute entry.

    The Cramér-Rao bound of the model is attainable by a measurement exactly
    when this matrix vanishes.
    """
    gap = (model.lvecs.conj() @ model.lvecs.T).imag
    return gap, float(np.max(np.abs(gap)))


def gap_identity_formula(state, basis) -> np.ndarray:
    """Closed form of the gap matrix at the identity: (2/i) tr(RR^dag [T_a, T_b]).

    Independent of the output-model construction; used to cross-check
    ``achievability_gap`` on the exponential chart at the origin.
    """
    products = np.einsum(
        "aij,bjk,ki->ab", basis.generators, basis.generators, state.reduced
    )
    return 4.0 * products.imag


def sld_mixed(rho: np.ndarray, drho: np.ndarray, tol: Tolerances = TOL) -> np.ndarray:
    """Symmetric logarithmic derivatives of a (possibly mixed) state.

    Solves drho_i = (rho lam_i + lam_i rho) / 2 in the eigenbasis of rho,
    restricted to eigenvalue pairs with r_a + r_b above the support cutoff.

    Raises:
        IllPosedSldError: if a derivative has weight on the kernel-kernel
            block of rho, where the equation has no solution.
    """
    rho = np.asarray(rho, dtype=complex)
    drho = np.asarray(drho, dtype=complex)
    if drho.ndim == 2:
        drho = drho[None]
    r, V = np.linalg.eigh(rho)
    slds = np.empty_like(drho)
    denom = r[:, None] + r[None, :]
    solvable = denom > tol.sld_support
    for i, d_i in enumerate(drho):
        in_basis = V.conj().T @ d_i @ V
        if np.any(np.abs(in_basis[~solvable]) > tol.sld_ill_posed):
            worst = np.max(np.abs(in_basis[~solvable]))
            raise IllPosedSldError(
                f"derivative {i} has weight {worst:.3e} outside the state's support"
            )
        lam = np.where(solvable, 2.0 * in_basis / np.where(solvable, denom, 1.0), 0.0)
        slds[i] = V @ lam @ V.conj().T
    return slds


def qfi_mixed(rho: np.ndarray, slds: np.ndarray) -> FisherMatrix:
    """Quantum Fisher matrix Re tr[rho lam_i lam_j] from logarithmic derivatives."""
    rho = np.asarray(rho, dtype=complex)
    slds = np.asarray(slds, dtype=complex)
    h = np.einsum("ij,ajk,bki->ab", rho, slds, slds).real
    return FisherMatrix(0.5 * (h + h.T), KIND_QUANTUM)


def fi_from_probabilities(
    probs: np.ndarray, dprobs: np.ndarray, tol: Tolerances = TOL
) -> np.ndarray:
    """Fisher matrix sum_xi dp_i dp_j / p of a finite outcome distribution.

    Outcomes of vanishing probability contribute zero when all their
    derivatives vanish too; otherwise the information diverges and a
    SingularOutcomeError is raised.
    """
    probs = np.asarray(probs, dtype=float)
    dprobs = np.asarray(dprobs, dtype=float)
    if dprobs.shape[1] != probs.shape[0]:
        raise DimensionMismatchError("derivative table does not match outcome count")
    alive = probs >= tol.zero_probability
    dead = ~alive
    if np.any(np.abs(dprobs[:, dead]) > tol.zero_probability_derivative):
        xi = int(np.argmax(np.max(np.abs(dprobs[:, dead]), axis=0)))
        raise SingularOutcomeError(
            "an outcome has vanishing probability but non-vanishing derivative; "
            f"the Fisher information diverges (dead outcome index {np.where(dead)[0][xi]})"
        )
    scaled = dprobs[:, alive] / probs[alive]
    return scaled @ dprobs[:, alive].T


def classical_fi(rho: np.ndarray, drho: np.ndarray, povm) -> FisherMatrix:
    """Classical Fisher matrix of a POVM measured on the state family."""
    rho = np.asarray(rho, dtype=complex)
    drho = np.asarray(drho, dtype=complex)
    elements = np.asarray(povm.elements, dtype=complex)
    if elements.shape[1:] != rho.shape:
        raise DimensionMismatchError("POVM dimension does not match the state")
    probs = np.einsum("ij,nji->n", rho, elements).real
    dprobs = np.einsum("aij,nji->an", drho, elements).real
    fi = fi_from_probabilities(probs, dprobs)
    return FisherMatrix(0.5 * (fi + fi.T), KIND_CLASSICAL)


@dataclass(frozen=True)
class QcrbCheck:
    """Verdict on I <= H in the positive-semidefinite order."""

    satisfied: bool
    min_eigenvalue: float


def qcrb_check(H, I, tol: Tolerances = TOL) -> QcrbCheck:
    """Check the quantum Cramér-Rao bound: H - I is PSD up to tolerance."""
    diff = _as_matrix(H) - _as_matrix(I)
    if diff.shape[0] != diff.shape[1]:
        raise DimensionMismatchError("information matrices differ in size")
    min_eig = float(np.linalg.eigvalsh(0.5 * (diff + diff.T)).min())
    return QcrbCheck(satisfied=min_eig >= tol.psd, min_eigenvalue=min_eig)


WEIGHT_H_INVERSE = "H-inverse"
WEIGHT_GENERAL = "general"


@dataclass(frozen=True)
class MeritReport:
    """Scalar figure of merit together with bound diagnostics."""

    value: float
    weight: str
    n_params: int
    qcrb_min_eig: float
    achievability_gap: float | None = None


def merit(H, I, G=None, gap: float | None = None, tol: Tolerances = TOL) -> MeritReport:
    """tr(H^-1 I), or tr(G I) for an explicit PSD weight matrix.

    Raises:
        SingularFisherError: when G is omitted and H is not safely positive
            definite (solving against a nearly singular quantum Fisher matrix
            happens at polar-chart boundaries and is a chart artifact).
        ValueError: when the H-inverse merit exceeds the parameter count
            beyond tolerance, which would contradict the Cramér-Rao bound.
    """
    Hm, Im = _as_matrix(H), _as_matrix(I)
    if Hm.shape != Im.shape:
        raise DimensionMismatchError("information matrices differ in size")
    p = Hm.shape[0]
    qcrb_min = qcrb_check(Hm, Im, tol).min_eigenvalue
    if G is None:
        eigs = np.linalg.eigvalsh(Hm)
        if eigs.min() <= tol.positive_definite:
            raise SingularFisherError(
                f"quantum Fisher matrix nearly singular (min eigenvalue {eigs.min():.3e})"
            )
        value = float(np.trace(np.linalg.solve(Hm, Im)))
        if value > p + tol.merit_bound:
            raise ValueError(f"merit {value!r} exceeds the parameter count {p}")
        weight = WEIGHT_H_INVERSE
    else:
        Gm = _as_matrix(G)
        if np.linalg.eigvalsh(0.5 * (Gm + Gm.T)).min() < tol.psd:
            raise ValueError("weight matrix must be positive semidefinite")
        value = float(np.trace(Gm @ Im))
        weight = WEIGHT_GENERAL
    return MeritReport(
        value=value,
        weight=weight,
        n_params=p,
        qcrb_min_eig=qcrb_min,
        achievability_gap=gap,
    )


def fidelity_pure(psi: np.ndarray, phi: np.ndarray) -> float:
    """|<psi|phi>|^2 for unit kets."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    phi = np.asarray(phi, dtype=complex).reshape(-1)
    if psi.shape != phi.shape:
        raise DimensionMismatchError("kets differ in dimension")
    for name, v in (("psi", psi), ("phi", phi)):
        if abs(np.vdot(v, v).real - 1.0) > 1e-8:
            raise ValueError(f"{name} is not a unit vector")
    return float(abs(np.vdot(psi, phi)) ** 2)
