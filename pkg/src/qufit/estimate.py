"""Monte-Carlo outcome sampling, maximum-likelihood estimation, covariance
studies against the Cramér-Rao prediction, merit-invariance sweeps, and the
search for probe states whose information beats the maximally entangled one.

Repetitions derive their randomness from a spawned seed stream, so studies
are reproducible end to end and repetitions are independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from . import _kernels, _serialize
from .channel_model import (
    BipartiteState,
    OutputModel,
    exp_output_model,
    max_entangled,
    output_model_at,
    pauli_correlators,
    singlet_output_model,
)
from .config import TOL
from .errors import (
    ChartDomainError,
    ConvergenceError,
    DimensionMismatchError,
    NonIdentifiableError,
)
from .fisher import classical_fi, fi_from_probabilities, merit, qfi_pure
from .povm import Povm
from .su_algebra import (
    CHART_EXP,
    CHART_SU2,
    GeneratorBasis,
    ParamPoint,
    gellmann_basis,
    unitary_exp,
    unitary_su2,
)


class SingletPolarFamily:
    """Outcome distribution of the qubit model as a function of the polar
    coordinates, for a fixed POVM; evaluation goes through the fast kernels."""

    chart = CHART_SU2

    def __init__(self, povm: Povm, margin: float = TOL.chart_margin):
        if povm.dim != 4:
            raise DimensionMismatchError("qubit model takes a two-qubit POVM")
        self.povm = povm
        self.margin = margin
        traces, correlators = [], []
        for element in povm.elements:
            t, G = pauli_correlators(element)
            traces.append(t)
            correlators.append(G)
        self._traces = np.asarray(traces)
        self._correlators = np.asarray(correlators)

    @property
    def n_params(self) -> int:
        return 3

    @property
    def n_outcomes(self) -> int:
        return len(self.povm)

    def bounds(self):
        m = self.margin
        return [(m, math.pi - m), (m, math.pi - m), (-np.inf, np.inf)]

    def in_domain(self, coords) -> bool:
        alpha, theta = coords[0], coords[1]
        return (
            self.margin < alpha < math.pi - self.margin
            and self.margin < theta < math.pi - self.margin
        )

    def probabilities(self, coords) -> np.ndarray:
        return self.probabilities_batch(np.asarray(coords, dtype=float)[None, :])[0]

    def probabilities_batch(self, points) -> np.ndarray:
        return _kernels.singlet_probabilities_batch(
            points, self._traces, self._correlators
        )

    def nll_batch(self, points, counts) -> np.ndarray:
        return _kernels.singlet_nll_batch(
            points, counts, self._traces, self._correlators
        )

    def output_model(self, coords) -> OutputModel:
        return singlet_output_model(coords[0], coords[1], coords[2])


class ExpChartFamily:
    """Outcome distribution on the exponential chart for any dimension."""

    chart = CHART_EXP

    def __init__(self, basis: GeneratorBasis, state: BipartiteState, povm: Povm):
        if povm.dim != basis.d**2:
            raise DimensionMismatchError("POVM does not act on the joint output space")
        self.basis = basis
        self.state = state
        self.povm = povm

    @property
    def n_params(self) -> int:
        return self.basis.n_params

    @property
    def n_outcomes(self) -> int:
        return len(self.povm)

    def bounds(self):
        return None

    def in_domain(self, coords) -> bool:
        return len(coords) == self.n_params

    def probabilities(self, coords) -> np.ndarray:
        U = unitary_exp(self.basis, coords)
        psi = (U @ self.state.R).reshape(-1)
        return np.einsum(
            "i,nij,j->n", psi.conj(), self.povm.elements, psi
        ).real

    def probabilities_batch(self, points) -> np.ndarray:
        return np.array([self.probabilities(c) for c in np.atleast_2d(points)])

    def nll_batch(self, points, counts) -> np.ndarray:
        counts = np.asarray(counts, dtype=float)
        probs = self.probabilities_batch(points)
        observed = counts > 0
        bad = np.any(probs[:, observed] < 1e-300, axis=1)
        safe = np.clip(probs[:, observed], 1e-300, None)
        nll = -(counts[observed] * np.log(safe)).sum(axis=1)
        nll[bad] = np.inf
        return nll

    def output_model(self, coords) -> OutputModel:
        return exp_output_model(self.basis, coords, self.state)


def family_for(point: ParamPoint, povm: Povm, state: BipartiteState | None = None,
               basis: GeneratorBasis | None = None):
    """Probability family matching a chart point's model."""
    if point.chart == CHART_SU2 and state is None:
        return SingletPolarFamily(povm)
    if point.chart == CHART_SU2:
        raise DimensionMismatchError("polar-chart families use the singlet probe")
    if basis is None:
        d = int(round(math.sqrt(point.n_params + 1)))
        basis = gellmann_basis(d)
    if state is None:
        state = max_entangled(basis.d)
    return ExpChartFamily(basis, state, povm)


def sample_outcomes(probabilities, n: int, seed) -> np.ndarray:
    """Multinomial outcome counts, reproducible from the seed."""
    probabilities = np.asarray(probabilities, dtype=float)
    if n < 1:
        raise ValueError("need at least one sample")
    if probabilities.min() < TOL.probability_floor or abs(
        probabilities.sum() - 1.0
    ) > TOL.probability_sum:
        raise ValueError("invalid outcome distribution")
    fixed = np.clip(probabilities, 0.0, None)
    fixed /= fixed.sum()
    rng = np.random.default_rng(seed)
    return rng.multinomial(n, fixed)


def _fd_fisher(family, coords, step: float = 1e-5) -> np.ndarray:
    """Fisher matrix of the family at a point via central finite differences."""
    coords = np.asarray(coords, dtype=float)
    probs = family.probabilities(coords)
    dprobs = np.empty((len(coords), len(probs)))
    for i in range(len(coords)):
        up, down = coords.copy(), coords.copy()
        up[i] += step
        down[i] -= step
        dprobs[i] = (family.probabilities(up) - family.probabilities(down)) / (2 * step)
    return fi_from_probabilities(probs, dprobs)


def _check_identifiable(family, coords) -> None:
    fi = _fd_fisher(family, coords)
    eigs = np.linalg.eigvalsh(fi)
    if eigs.min() <= 1e-8 * max(1.0, eigs.max()):
        raise NonIdentifiableError(
            "Fisher information is singular at the initial point "
            f"(eigenvalues {np.array2string(eigs, precision=3)}); "
            "some parameter directions cannot be estimated"
        )


def mle(counts, family, init, *, grid_points: int = 9, grid_radius: float = 0.5,
        xatol: float = 1e-8, max_iterations: int = 4000) -> np.ndarray:
    """Maximum-likelihood estimate from outcome counts.

    A coarse grid around the initial point seeds a Nelder-Mead refinement of
    the log-likelihood; the returned point never has lower likelihood than
    the initial one.

    Raises:
        NonIdentifiableError: if the model's Fisher information is singular
            at the initial point.
        ConvergenceError: if the simplex refinement hits its iteration cap;
            carries the best point found.
    """
    counts = np.asarray(counts, dtype=float)
    init = np.asarray(init, dtype=float)
    if counts.shape[0] != family.n_outcomes:
        raise DimensionMismatchError("counts do not match the POVM outcome count")
    if not family.in_domain(init):
        raise ChartDomainError("initial point outside the chart domain")
    _check_identifiable(family, init)

    bounds = family.bounds()
    axes = []
    for i in range(family.n_params):
        lo, hi = init[i] - grid_radius, init[i] + grid_radius
        if bounds is not None and np.isfinite(bounds[i][0]):
            lo = max(lo, bounds[i][0])
        if bounds is not None and np.isfinite(bounds[i][1]):
            hi = min(hi, bounds[i][1])
        axes.append(np.linspace(lo, hi, grid_points))
    grid = np.stack(
        [g.reshape(-1) for g in np.meshgrid(*axes, indexing="ij")], axis=1
    )
    candidates = np.vstack([init[None, :], grid])
    nll = family.nll_batch(candidates, counts)
    start = candidates[int(np.argmin(nll))]

    def objective(coords):
        if not family.in_domain(coords):
            return np.inf
        return float(family.nll_batch(coords[None, :], counts)[0])

    result = minimize(
        objective,
        start,
        method="Nelder-Mead",
        bounds=bounds,
        options={
            "xatol": xatol,
            "fatol": 1e-10,
            "maxiter": max_iterations,
            "maxfev": 2 * max_iterations,
        },
    )
    # the returned vertex is never worse than the grid seed, so the estimate
    # always has at least the likelihood of the initial point
    if not result.success:
        raise ConvergenceError(
            f"likelihood refinement did not converge: {result.message}",
            best=np.asarray(result.x, dtype=float),
            best_value=float(result.fun),
        )
    return np.asarray(result.x, dtype=float)


@dataclass(frozen=True)
class EstimationReport:
    """Empirical estimator covariance against the Cramér-Rao prediction."""

    true_point: np.ndarray
    chart: str
    estimates: np.ndarray
    n_samples: int
    repetitions: int
    covariance: np.ndarray
    predicted_covariance: np.ndarray
    seed: int

    @property
    def trace_ratio(self) -> float:
        """tr(empirical covariance) / tr(predicted covariance)."""
        return float(np.trace(self.covariance) / np.trace(self.predicted_covariance))

    def to_doc(self) -> dict:
        return {
            "kind": "estimation",
            "chart": self.chart,
            "true_point": [float(x) for x in self.true_point],
            "n_samples": int(self.n_samples),
            "repetitions": int(self.repetitions),
            "seed": int(self.seed),
            "estimates": [[float(x) for x in row] for row in self.estimates],
            "covariance": [[float(x) for x in row] for row in self.covariance],
            "predicted_covariance": [
                [float(x) for x in row] for row in self.predicted_covariance
            ],
        }


def covariance_study(point: ParamPoint, povm: Povm, n: int, reps: int, seed: int,
                     state: BipartiteState | None = None,
                     basis: GeneratorBasis | None = None) -> EstimationReport:
    """Repeatedly sample N outcomes at the true point, estimate by maximum
    likelihood, and compare the empirical covariance with I^-1 / N."""
    family = family_for(point, povm, state, basis)
    model = family.output_model(point.coords)
    info = classical_fi(model.rho, model.rho_derivs, povm)
    eigs = np.linalg.eigvalsh(info.matrix)
    if eigs.min() <= 1e-8 * max(1.0, eigs.max()):
        raise NonIdentifiableError(
            "measurement cannot identify all parameters "
            f"(Fisher eigenvalues {np.array2string(eigs, precision=3)})"
        )
    probabilities = family.probabilities(point.coords)
    streams = np.random.SeedSequence(seed).spawn(reps)
    estimates = np.empty((reps, family.n_params))
    for k in range(reps):
        counts = sample_outcomes(probabilities, n, streams[k])
        estimates[k] = mle(counts, family, point.coords)
    covariance = np.cov(estimates, rowvar=False)
    predicted = np.linalg.inv(info.matrix) / n
    return EstimationReport(
        true_point=point.coords.copy(),
        chart=point.chart,
        estimates=estimates,
        n_samples=n,
        repetitions=reps,
        covariance=covariance,
        predicted_covariance=predicted,
        seed=seed,
    )


@dataclass(frozen=True)
class InvarianceResult:
    merit_reference: float
    merit_transported: float
    difference: float
    conjugated: Povm


def _unitary_at(point: ParamPoint, basis: GeneratorBasis | None):
    if point.chart == CHART_SU2:
        return unitary_su2(point.alpha, point.theta, point.phi)[0]
    if basis is None:
        basis = gellmann_basis(int(round(math.sqrt(point.n_params + 1))))
    return unitary_exp(basis, point.coords)


def invariance_sweep(point0: ParamPoint, point1: ParamPoint, povm: Povm,
                     state: BipartiteState | None = None,
                     basis: GeneratorBasis | None = None) -> InvarianceResult:
    """Transport a measurement between chart points and compare merits.

    With V chosen so that V U(theta_0) = U(theta_1), the conjugated POVM
    (V x 1) M (V x 1)^dag at theta_1 carries the same figure of merit as M
    at theta_0.
    """
    if point0.chart != point1.chart:
        raise ChartDomainError("both points must live on the same chart")
    model0 = output_model_at(point0, state, basis)
    model1 = output_model_at(point1, state, basis)
    U0 = _unitary_at(point0, basis)
    U1 = _unitary_at(point1, basis)
    V = U1 @ U0.conj().T
    conjugated = povm.conjugated(V)
    merit0 = merit(qfi_pure(model0), classical_fi(model0.rho, model0.rho_derivs, povm))
    merit1 = merit(
        qfi_pure(model1), classical_fi(model1.rho, model1.rho_derivs, conjugated)
    )
    return InvarianceResult(
        merit_reference=merit0.value,
        merit_transported=merit1.value,
        difference=abs(merit0.value - merit1.value),
        conjugated=conjugated,
    )


@dataclass(frozen=True)
class SearchReport:
    """Outcome of the search for inputs with information beyond 4/d."""

    d: int
    best_input: np.ndarray
    qfi: np.ndarray
    excess: float
    trials: int
    seed: int

    @property
    def found(self) -> bool:
        return self.excess > 1e-6

    def to_doc(self) -> dict:
        return {
            "kind": "search",
            "d": int(self.d),
            "trials": int(self.trials),
            "seed": int(self.seed),
            "excess": float(self.excess),
            "found": bool(self.found),
            "best_input": _serialize.complex_to_pairs(self.best_input),
            "qfi": [[float(x) for x in row] for row in self.qfi],
        }


def _identity_qfi_batch(W_batch: np.ndarray, basis: GeneratorBasis) -> np.ndarray:
    """QFI matrices at the chart origin for a batch of reduced matrices W."""
    T = basis.generators
    TT = np.einsum("aij,bjk->abik", T, T)
    first = np.einsum("abij,nji->nab", TT, W_batch)
    t = np.einsum("aij,nji->na", T, W_batch).real
    return 4.0 * (first.real - np.einsum("na,nb->nab", t, t))


def qfi_at_identity(state: BipartiteState, basis: GeneratorBasis) -> np.ndarray:
    """QFI of the output model at the chart origin, directly from RR^dag."""
    return _identity_qfi_batch(state.reduced[None, :, :], basis)[0]


def _max_excess(W: np.ndarray, basis: GeneratorBasis) -> float:
    H = _identity_qfi_batch(W[None], basis)[0]
    return float(np.linalg.eigvalsh(H).max() - 4.0 / basis.d)


def counterexample_search(d: int, trials: int, seed: int, *,
                          hill_climb_budget: int = 2000) -> SearchReport:
    """Random search plus coordinate hill-climb for a probe whose QFI has an
    eigenvalue above the maximally entangled value 4/d.

    For d = 2 the search comes up empty (the maximally entangled probe is
    optimal); for d >= 3 an excess is expected and reported.
    """
    if d < 2:
        raise ValueError("need dimension d >= 2")
    basis = gellmann_basis(d)
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((trials, d, d)) + 1j * rng.standard_normal((trials, d, d))
    norms = np.sqrt(np.einsum("nij,nij->n", raw, raw.conj()).real)
    R_batch = raw / norms[:, None, None]
    W_batch = np.einsum("nij,nkj->nik", R_batch, R_batch.conj())
    H_batch = _identity_qfi_batch(W_batch, basis)
    max_eigs = np.linalg.eigvalsh(H_batch)[:, -1]
    best_idx = int(np.argmax(max_eigs))
    best_R = R_batch[best_idx].copy()
    best_excess = float(max_eigs[best_idx] - 4.0 / d)

    # coordinate-wise annealed refinement of the best random candidate
    evaluations = 0
    step = 0.1
    while step >= 1e-3 and evaluations < hill_climb_budget:
        improved = False
        for flat_index in range(d * d):
            for delta in (step, -step, 1j * step, -1j * step):
                if evaluations >= hill_climb_budget:
                    break
                candidate = best_R.copy()
                candidate.flat[flat_index] += delta
                candidate /= math.sqrt(
                    np.trace(candidate @ candidate.conj().T).real
                )
                W = candidate @ candidate.conj().T
                excess = _max_excess(W, basis)
                evaluations += 1
                if excess > best_excess + 1e-12:
                    best_excess = excess
                    best_R = candidate
                    improved = True
        if not improved:
            step /= 2.0
    best_state = BipartiteState(d, best_R)
    H_best = qfi_at_identity(best_state, basis)
    return SearchReport(
        d=d,
        best_input=best_state.R,
        qfi=H_best,
        excess=best_excess,
        trials=trials,
        seed=seed,
    )


def write_report(report, path) -> None:
    _serialize.dump(report.to_doc(), path)


def read_report(path):
    """Load an estimation or search report written by ``write_report``."""
    doc = _serialize.load(path)
    kind = doc.get("kind")
    if kind == "estimation":
        estimates = np.asarray(doc["estimates"], dtype=float)
        return EstimationReport(
            true_point=np.asarray(doc["true_point"], dtype=float),
            chart=doc["chart"],
            estimates=estimates,
            n_samples=int(doc["n_samples"]),
            repetitions=int(doc["repetitions"]),
            covariance=np.asarray(doc["covariance"], dtype=float),
            predicted_covariance=np.asarray(doc["predicted_covariance"], dtype=float),
            seed=int(doc["seed"]),
        )
    if kind == "search":
        d = int(doc["d"])
        return SearchReport(
            d=d,
            best_input=_serialize.pairs_to_complex(doc["best_input"], (d, d)),
            qfi=np.asarray(doc["qfi"], dtype=float),
            excess=float(doc["excess"]),
            trials=int(doc["trials"]),
            seed=int(doc["seed"]),
        )
    raise ValueError(f"unknown report kind {kind!r}")
