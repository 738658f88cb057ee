"""Generators of su(d), the exponential chart, and the qubit polar chart.

The generator convention is the generalized Gell-Mann family normalised so
that tr(T_a T_b) = delta_ab: off-diagonal pairs

    T_{kls} = i^s (|k><l| + (-1)^s |l><k|) / sqrt(2),   k > l, s in {0, 1},

followed by d-1 diagonal matrices built from real coefficient rows c_m
satisfying sum_k c_mk = 0 and sum_k c_mk c_nk = delta_mn. For d = 2 this
reduces to the Pauli matrices divided by sqrt(2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .config import TOL, Tolerances
from .errors import ChartDomainError, DimensionMismatchError

CHART_EXP = "exp"
CHART_SU2 = "su2-polar"

PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class GeneratorBasis:
    """Orthonormal traceless Hermitian basis of su(d).

    Attributes:
        d: Hilbert-space dimension.
        generators: array of shape (d**2 - 1, d, d).
        diagonal_coeffs: the (d-1, d) real coefficient rows of the diagonal
            generators.
    """

    d: int
    generators: np.ndarray
    diagonal_coeffs: np.ndarray

    @property
    def n_params(self) -> int:
        return self.d * self.d - 1

    def validate(self, tol: Tolerances = TOL) -> None:
        """Check hermiticity, tracelessness, orthonormality and the
        coefficient-row identities; raises on violation."""
        T = self.generators
        if np.max(np.abs(T - T.conj().transpose(0, 2, 1))) > tol.algebra:
            raise ValueError("generators are not Hermitian")
        if np.max(np.abs(np.trace(T, axis1=1, axis2=2))) > tol.algebra:
            raise ValueError("generators are not traceless")
        gram = np.einsum("aij,bji->ab", T, T)
        if np.max(np.abs(gram - np.eye(self.n_params))) > tol.algebra:
            raise ValueError("generators are not orthonormal under the trace form")
        c = self.diagonal_coeffs
        if np.max(np.abs(c.sum(axis=1))) > tol.algebra:
            raise ValueError("diagonal coefficient rows do not sum to zero")
        if np.max(np.abs(c @ c.T - np.eye(self.d - 1))) > tol.algebra:
            raise ValueError("diagonal coefficient rows are not orthonormal")
        colgram = c.T @ c - (np.eye(self.d) - 1.0 / self.d)
        if np.max(np.abs(colgram)) > tol.algebra:
            raise ValueError("diagonal coefficient completeness relation fails")


def gellmann_basis(d: int) -> GeneratorBasis:
    """Build the generalized Gell-Mann basis of su(d).

    The diagonal rows use the conventional choice
    c_m = (1, ..., 1, -m, 0, ..., 0) / sqrt(m (m + 1)) with m leading ones.

    Raises:
        ValueError: if d < 2.
    """
    if d < 2:
        raise ValueError(f"need dimension d >= 2, got {d}")
    mats = []
    for k in range(1, d):
        for l in range(k):
            for s in (0, 1):
                T = np.zeros((d, d), dtype=complex)
                T[k, l] = 1j**s / math.sqrt(2)
                T[l, k] = 1j**s * (-1) ** s / math.sqrt(2)
                mats.append(T)
    coeffs = np.zeros((d - 1, d))
    for m in range(1, d):
        row = np.zeros(d)
        row[:m] = 1.0
        row[m] = -m
        coeffs[m - 1] = row / math.sqrt(m * (m + 1))
        mats.append(np.diag(coeffs[m - 1]).astype(complex))
    basis = GeneratorBasis(
        d=d,
        generators=_readonly(np.array(mats)),
        diagonal_coeffs=_readonly(coeffs),
    )
    basis.validate()
    return basis


@dataclass(frozen=True)
class ParamPoint:
    """A parameter point together with its chart tag.

    The exp chart takes d**2 - 1 unconstrained coordinates. The qubit polar
    chart takes (alpha, theta, phi) and requires alpha and theta strictly
    inside (0, pi): on the boundary the parametrisation degenerates and the
    quantum Fisher matrix is singular, so points within ``margin`` of it are
    rejected.
    """

    coords: np.ndarray
    chart: str
    margin: float = field(default=TOL.chart_margin, compare=False)

    def __post_init__(self):
        coords = np.atleast_1d(np.asarray(self.coords, dtype=float))
        object.__setattr__(self, "coords", _readonly(coords))
        if self.chart == CHART_SU2:
            if coords.shape != (3,):
                raise ChartDomainError("polar chart takes exactly (alpha, theta, phi)")
            alpha, theta = coords[0], coords[1]
            for name, value in (("alpha", alpha), ("theta", theta)):
                if not (self.margin < value < math.pi - self.margin):
                    raise ChartDomainError(
                        f"{name}={value!r} is within {self.margin} of the polar-chart "
                        f"boundary {{0, pi}} where the chart degenerates"
                    )
        elif self.chart == CHART_EXP:
            if coords.ndim != 1:
                raise ChartDomainError("exp chart takes a flat coordinate vector")
        else:
            raise ChartDomainError(f"unknown chart {self.chart!r}")

    @classmethod
    def su2(cls, alpha: float, theta: float, phi: float) -> "ParamPoint":
        return cls(np.array([alpha, theta, phi]), CHART_SU2)

    @classmethod
    def exp(cls, coords) -> "ParamPoint":
        return cls(np.asarray(coords, dtype=float), CHART_EXP)

    @property
    def n_params(self) -> int:
        return self.coords.shape[0]

    @property
    def alpha(self) -> float:
        return float(self.coords[0])

    @property
    def theta(self) -> float:
        return float(self.coords[1])

    @property
    def phi(self) -> float:
        return float(self.coords[2])


def _check_coords(basis: GeneratorBasis, theta: np.ndarray) -> np.ndarray:
    theta = np.asarray(theta, dtype=float).reshape(-1)
    if theta.shape[0] != basis.n_params:
        raise DimensionMismatchError(
            f"chart has {basis.n_params} coordinates, got {theta.shape[0]}"
        )
    return theta


def unitary_exp(basis: GeneratorBasis, theta) -> np.ndarray:
    """exp(i sum_a theta_a T_a) for the given generator basis."""
    theta = _check_coords(basis, theta)
    A = 1j * np.einsum("a,aij->ij", theta, basis.generators)
    return expm(A)


def unitary_derivatives_exp(basis: GeneratorBasis, theta) -> np.ndarray:
    """All partial derivatives dU/dtheta_a of the exponential chart.

    Each derivative is the top-right block of exp([[A, E_a], [0, A]]) with
    A = i sum theta T and E_a = i T_a, which is exact up to the accuracy of
    the matrix exponential itself.

    Returns:
        array of shape (d**2 - 1, d, d).
    """
    theta = _check_coords(basis, theta)
    d = basis.d
    A = 1j * np.einsum("a,aij->ij", theta, basis.generators)
    block = np.zeros((2 * d, 2 * d), dtype=complex)
    block[:d, :d] = A
    block[d:, d:] = A
    out = np.empty_like(basis.generators)
    for a in range(basis.n_params):
        block[:d, d:] = 1j * basis.generators[a]
        out[a] = expm(block)[:d, d:]
    return out


def polar_axis(theta: float, phi: float) -> np.ndarray:
    """Unit vector (sin t cos p, sin t sin p, cos t)."""
    st = math.sin(theta)
    return np.array([st * math.cos(phi), st * math.sin(phi), math.cos(theta)])


def unitary_su2(alpha: float, theta: float, phi: float):
    """Closed-form qubit unitary cos(a) 1 + i sin(a) n(t, p) . sigma.

    Evaluates the formula and its three analytic partial derivatives at any
    real arguments; chart-domain enforcement happens where polar points are
    constructed, not here.

    Returns:
        (U, (dU/dalpha, dU/dtheta, dU/dphi)) as 2x2 complex arrays.
    """
    n = polar_axis(theta, phi)
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
    eye = np.eye(2, dtype=complex)
    n_sigma = np.einsum("k,kij->ij", n, PAULI)
    ca, sa = math.cos(alpha), math.sin(alpha)
    U = ca * eye + 1j * sa * n_sigma
    dU_alpha = -sa * eye + 1j * ca * n_sigma
    dU_theta = 1j * sa * np.einsum("k,kij->ij", dn_dtheta, PAULI)
    dU_phi = 1j * sa * np.einsum("k,kij->ij", dn_dphi, PAULI)
    return U, (dU_alpha, dU_theta, dU_phi)
