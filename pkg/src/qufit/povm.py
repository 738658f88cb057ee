"""Measurement families: Bell-type, separable/product, bound-attaining, and
their validation, refinement, time-sharing and file round-trip.

A POVM is a finite list of PSD operators summing to the identity. Elements
may carry a product decomposition c |a><a| x |b><b| (one or more terms);
rank-one single-term elements are what the separable-measurement identities
are stated for, and refinement splits multi-term elements down to that form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import unitary_group

from . import _serialize
from .config import TOL, Tolerances
from .errors import (
    AchievabilityError,
    DimensionMismatchError,
    PovmValidationError,
    SingularFisherError,
)
from .fisher import FisherMatrix, achievability_gap

_BELL_KETS = (
    np.array([1, 0, 0, -1], dtype=complex) / math.sqrt(2),
    np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2),
    np.array([0, 1, 1, 0], dtype=complex) / math.sqrt(2),
    np.array([0, 1, -1, 0], dtype=complex) / math.sqrt(2),
)


@dataclass(frozen=True)
class ProductTerm:
    """One term c |a><a| x |b><b| of a product decomposition."""

    c: float
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        if self.c <= 0:
            raise PovmValidationError("product weight must be positive")
        for name in ("a", "b"):
            ket = np.asarray(getattr(self, name), dtype=complex).reshape(-1)
            norm = np.linalg.norm(ket)
            if abs(norm - 1.0) > 1e-12:
                ket = ket / norm
            ket.setflags(write=False)
            object.__setattr__(self, name, ket)

    def matrix(self) -> np.ndarray:
        return self.c * np.kron(
            np.outer(self.a, self.a.conj()), np.outer(self.b, self.b.conj())
        )

    def scaled(self, factor: float) -> "ProductTerm":
        return ProductTerm(self.c * factor, self.a, self.b)


class Povm:
    """Immutable list of POVM elements with optional product metadata.

    ``structure[i]`` is either None (generic element) or a tuple of
    ProductTerm summing to ``elements[i]``.
    """

    def __init__(self, elements, structure=None, check: bool = True):
        elements = np.asarray(elements, dtype=complex)
        if elements.ndim != 3 or elements.shape[1] != elements.shape[2]:
            raise PovmValidationError("elements must be a stack of square matrices")
        elements.setflags(write=False)
        self.elements = elements
        self.dim = elements.shape[1]
        if structure is None:
            structure = (None,) * len(elements)
        structure = tuple(
            None if s is None else tuple(s) for s in structure
        )
        if len(structure) != len(elements):
            raise PovmValidationError("structure metadata count mismatch")
        self.structure = structure
        if check:
            diag = self.validate()
            if diag.completeness_residual > TOL.povm_completeness:
                raise PovmValidationError(
                    f"elements sum residual {diag.completeness_residual:.3e}"
                )
            if diag.hermiticity_residual > TOL.povm_completeness:
                raise PovmValidationError(
                    f"element hermiticity residual {diag.hermiticity_residual:.3e}"
                )
            if diag.min_eigenvalue < TOL.povm_psd:
                raise PovmValidationError(
                    f"element eigenvalue {diag.min_eigenvalue:.3e} below zero"
                )
            if diag.product_residual > 1e-12:
                raise PovmValidationError(
                    f"product decomposition residual {diag.product_residual:.3e}"
                )

    def __len__(self) -> int:
        return len(self.elements)

    @property
    def n_outcomes(self) -> int:
        return len(self.elements)

    def is_product(self) -> bool:
        """True when every element is a single product projector term."""
        return all(s is not None and len(s) == 1 for s in self.structure)

    def has_decomposition(self) -> bool:
        return all(s is not None for s in self.structure)

    def validate(self) -> "PovmDiagnostics":
        completeness = float(
            np.max(np.abs(self.elements.sum(axis=0) - np.eye(self.dim)))
        )
        herm = float(
            np.max(np.abs(self.elements - self.elements.conj().transpose(0, 2, 1)))
        )
        min_eig = min(
            float(np.linalg.eigvalsh(0.5 * (m + m.conj().T)).min())
            for m in self.elements
        )
        product_residual = 0.0
        for element, terms in zip(self.elements, self.structure):
            if terms is None:
                continue
            rebuilt = sum(t.matrix() for t in terms)
            product_residual = max(
                product_residual, float(np.max(np.abs(rebuilt - element)))
            )
        return PovmDiagnostics(
            completeness_residual=completeness,
            hermiticity_residual=herm,
            min_eigenvalue=min_eig,
            product_residual=product_residual,
        )

    def conjugated(self, V: np.ndarray) -> "Povm":
        """The POVM (V x 1) M (V x 1)^dag applied to the first subsystem."""
        V = np.asarray(V, dtype=complex)
        d = V.shape[0]
        if d * d != self.dim:
            raise DimensionMismatchError("conjugation unitary has wrong dimension")
        W = np.kron(V, np.eye(d))
        elements = np.einsum("ij,njk,lk->nil", W, self.elements, W.conj())
        structure = tuple(
            None
            if terms is None
            else tuple(ProductTerm(t.c, V @ t.a, t.b) for t in terms)
            for terms in self.structure
        )
        return Povm(elements, structure)


@dataclass(frozen=True)
class PovmDiagnostics:
    completeness_residual: float
    hermiticity_residual: float
    min_eigenvalue: float
    product_residual: float


def validate(povm: Povm) -> PovmDiagnostics:
    """Residual diagnostics of an operator list; reports, never raises."""
    return povm.validate()


def bell_basis() -> Povm:
    """The four Bell projectors on two qubits, in the conventional order
    (|00>-|11>, |00>+|11>, |01>+|10>, |01>-|10>, each over sqrt(2))."""
    elements = [np.outer(k, k.conj()) for k in _BELL_KETS]
    return Povm(np.array(elements))


def reduced_bell(k: int) -> Povm:
    """Two-outcome POVM {M_k, 1 - M_k} from the k-th Bell projector, k in 1..4."""
    if not 1 <= k <= 4:
        raise ValueError("Bell projector index must be in 1..4")
    ket = _BELL_KETS[k - 1]
    M = np.outer(ket, ket.conj())
    return Povm(np.array([M, np.eye(4) - M]))


def linear_optics_bell(k: int, l: int) -> Povm:
    """Three-outcome POVM {M_k, M_l, 1 - M_k - M_l}, k != l in 1..4."""
    if not (1 <= k <= 4 and 1 <= l <= 4):
        raise ValueError("Bell projector indices must be in 1..4")
    if k == l:
        raise ValueError("the two resolved Bell projectors must differ")
    Mk = np.outer(_BELL_KETS[k - 1], _BELL_KETS[k - 1].conj())
    Ml = np.outer(_BELL_KETS[l - 1], _BELL_KETS[l - 1].conj())
    return Povm(np.array([Mk, Ml, np.eye(4) - Mk - Ml]))


def time_shared(povms, weights) -> Povm:
    """Measure povms[k] on a fraction weights[k] of the copies.

    The union of all elements scaled by their weights is again a POVM, and
    its Fisher information is the weighted sum of the component ones.
    """
    weights = np.asarray(weights, dtype=float)
    if len(weights) != len(povms) or len(povms) == 0:
        raise ValueError("need one weight per POVM")
    if np.any(weights <= 0) or abs(weights.sum() - 1.0) > 1e-12:
        raise ValueError("weights must be positive and sum to one")
    dim = povms[0].dim
    if any(p.dim != dim for p in povms):
        raise DimensionMismatchError("time-shared POVMs must share a dimension")
    elements = np.concatenate(
        [w * p.elements for w, p in zip(weights, povms)], axis=0
    )
    structure = []
    for w, p in zip(weights, povms):
        for terms in p.structure:
            structure.append(
                None if terms is None else tuple(t.scaled(w) for t in terms)
            )
    return Povm(elements, structure)


def _pauli_eigenbases():
    s2 = 1 / math.sqrt(2)
    return (
        (np.array([s2, s2]), np.array([s2, -s2])),
        (np.array([s2, 1j * s2]), np.array([s2, -1j * s2])),
        (np.array([1.0, 0.0]), np.array([0.0, 1.0])),
    )


def local_spin_povm() -> Povm:
    """Uniform time-share over the nine product spin-component bases.

    Models measuring all three spin components on both output qubits: each of
    the 9 basis pairs is used on one ninth of the copies, giving 36 rank-one
    product elements.
    """
    bases = _pauli_eigenbases()
    terms = []
    for a_basis in bases:
        for b_basis in bases:
            for a in a_basis:
                for b in b_basis:
                    terms.append(ProductTerm(1.0 / 9.0, a, b))
    elements = np.array([t.matrix() for t in terms])
    return Povm(elements, tuple((t,) for t in terms))


def random_product_povm(d: int, n_bases: int, seed: int) -> Povm:
    """Uniform time-share over ``n_bases`` Haar-random product bases of
    C^d x C^d; every element is rank-one product with weight 1/n_bases."""
    if n_bases < 1:
        raise ValueError("need at least one basis")
    rng = np.random.default_rng(seed)
    terms = []
    for _ in range(n_bases):
        VA = unitary_group.rvs(d, random_state=rng)
        VB = unitary_group.rvs(d, random_state=rng)
        for k in range(d):
            for l in range(d):
                terms.append(ProductTerm(1.0 / n_bases, VA[:, k], VB[:, l]))
    elements = np.array([t.matrix() for t in terms])
    return Povm(elements, tuple((t,) for t in terms))


def product_completeness_residuals(povm: Povm) -> dict:
    """Bloch-vector form of the completeness conditions of a qubit product
    POVM: sum c = 4, sum c a = 0, sum c b = 0, sum c a_k b_l = 0."""
    if povm.dim != 4 or not povm.is_product():
        raise PovmValidationError("defined for rank-one product POVMs on two qubits")
    from .su_algebra import PAULI

    cs, avecs, bvecs = [], [], []
    for (term,) in povm.structure:
        cs.append(term.c)
        avecs.append([np.vdot(term.a, s @ term.a).real for s in PAULI])
        bvecs.append([np.vdot(term.b, s @ term.b).real for s in PAULI])
    cs = np.asarray(cs)
    avecs = np.asarray(avecs)
    bvecs = np.asarray(bvecs)
    return {
        "weight_sum": float(abs(cs.sum() - 4.0)),
        "a_sum": float(np.max(np.abs(np.einsum("x,xk->k", cs, avecs)))),
        "b_sum": float(np.max(np.abs(np.einsum("x,xk->k", cs, bvecs)))),
        "ab_sum": float(np.max(np.abs(np.einsum("x,xk,xl->kl", cs, avecs, bvecs)))),
    }


def coarse_grain(povm: Povm, groups) -> Povm:
    """Merge elements by outcome groups (a partition of range(n_outcomes)),
    pooling their product decompositions."""
    seen = sorted(i for group in groups for i in group)
    if seen != list(range(len(povm))):
        raise ValueError("groups must partition the outcome indices")
    elements, structure = [], []
    for group in groups:
        elements.append(povm.elements[list(group)].sum(axis=0))
        terms = []
        for i in group:
            if povm.structure[i] is None:
                terms = None
                break
            terms.extend(povm.structure[i])
        structure.append(None if terms is None else tuple(terms))
    return Povm(np.array(elements), structure)


def refine_separable(povm: Povm) -> Povm:
    """Split every element into its product-projector terms.

    The refined POVM is rank-one product and carries at least as much Fisher
    information as the original.
    """
    if not povm.has_decomposition():
        raise PovmValidationError("an element lacks a product decomposition")
    terms = [t for element_terms in povm.structure for t in element_terms]
    elements = np.array([t.matrix() for t in terms])
    return Povm(elements, tuple((t,) for t in terms))


@dataclass(frozen=True)
class MatsumotoConfig:
    """Orthogonal mixing matrix for the bound-attaining measurement.

    ``o`` must be (p+1) x (p+1) orthogonal with every entry of its last
    column bounded away from zero.
    """

    o: np.ndarray
    last_column_floor: float

    def __post_init__(self):
        o = np.asarray(self.o, dtype=float)
        n = o.shape[0]
        if o.ndim != 2 or o.shape != (n, n):
            raise ValueError("mixing matrix must be square")
        if np.max(np.abs(o.T @ o - np.eye(n))) > 1e-10:
            raise ValueError("mixing matrix is not orthogonal")
        if self.last_column_floor <= 0:
            raise ValueError("last-column floor must be positive")
        if np.min(np.abs(o[:, -1])) < self.last_column_floor:
            raise ValueError("a last-column entry falls below the floor")
        o.setflags(write=False)
        object.__setattr__(self, "o", o)


def householder_mixing(p: int) -> MatsumotoConfig:
    """Reflection sending the last coordinate axis to the uniform direction,
    so every last-column entry equals 1/sqrt(p+1)."""
    n = p + 1
    u = np.full(n, 1.0 / math.sqrt(n))
    v = np.zeros(n)
    v[-1] = 1.0
    v = v - u
    o = np.eye(n) - 2.0 * np.outer(v, v) / (v @ v)
    return MatsumotoConfig(o=o, last_column_floor=1.0 / math.sqrt(n) - 1e-12)


def matsumoto_povm(model, H, config: MatsumotoConfig | None = None,
                   tol: Tolerances = TOL) -> Povm:
    """Measurement with p+2 elements whose Fisher information equals the
    quantum Fisher matrix at the construction point.

    Projector kets are orthogonal mixtures of the whitened l-vectors and the
    output state itself; requires the attainability condition (vanishing
    imaginary l-vector overlaps) and a positive definite H.
    """
    gap_matrix, gap = achievability_gap(model)
    if gap > tol.achievability:
        raise AchievabilityError(
            f"imaginary overlap matrix has magnitude {gap:.3e}; "
            "the Cramér-Rao bound is not attainable here"
        )
    Hm = np.asarray(H.matrix if isinstance(H, FisherMatrix) else H, dtype=float)
    p = model.n_params
    if Hm.shape != (p, p):
        raise DimensionMismatchError("quantum Fisher matrix size mismatch")
    eigs, vecs = np.linalg.eigh(Hm)
    if eigs.min() <= tol.positive_definite:
        raise SingularFisherError(
            f"quantum Fisher matrix nearly singular (min eigenvalue {eigs.min():.3e})"
        )
    if config is None:
        config = householder_mixing(p)
    if config.o.shape[0] != p + 1:
        raise DimensionMismatchError("mixing matrix must be (p+1) x (p+1)")
    inv_sqrt = (vecs / np.sqrt(eigs)) @ vecs.conj().T
    m_vectors = np.vstack([inv_sqrt @ model.lvecs, model.psi[None, :]])
    b_vectors = config.o @ m_vectors
    elements = [np.outer(b, b.conj()) for b in b_vectors]
    elements.append(np.eye(model.d**2) - sum(elements))
    return Povm(np.array(elements))


def write_povm(povm: Povm, path) -> None:
    """Serialize to the text format: dim, elements with row-major [re, im]
    matrices and optional single-term product metadata."""
    doc = {"dim": int(povm.dim), "elements": []}
    for element, terms in zip(povm.elements, povm.structure):
        record = {"matrix": _serialize.complex_to_pairs(element)}
        if terms is not None and len(terms) == 1:
            term = terms[0]
            record["product"] = {
                "c": float(term.c),
                "a": _serialize.complex_to_pairs(term.a),
                "b": _serialize.complex_to_pairs(term.b),
            }
        doc["elements"].append(record)
    _serialize.dump(doc, path)


def read_povm(path, tol: Tolerances = TOL) -> Povm:
    """Load and validate a POVM file; completeness residuals above the load
    tolerance are rejected."""
    try:
        doc = _serialize.load(path)
        dim = int(doc["dim"])
        elements, structure = [], []
        for record in doc["elements"]:
            elements.append(_serialize.pairs_to_complex(record["matrix"], (dim, dim)))
            if "product" in record:
                product = record["product"]
                side = int(round(math.sqrt(dim)))
                term = ProductTerm(
                    float(product["c"]),
                    _serialize.pairs_to_complex(product["a"], (side,)),
                    _serialize.pairs_to_complex(product["b"], (side,)),
                )
                structure.append((term,))
            else:
                structure.append(None)
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise PovmValidationError(f"malformed POVM file {path}: {exc}") from exc
    povm = Povm(np.array(elements), structure, check=False)
    diag = povm.validate()
    if diag.completeness_residual > tol.povm_load:
        raise PovmValidationError(
            f"loaded elements sum residual {diag.completeness_residual:.3e}"
        )
    if diag.min_eigenvalue < -1e-8 or diag.product_residual > 1e-8:
        raise PovmValidationError("loaded elements fail the POVM conditions")
    return povm
