"""Pure-numpy implementation of the hot evaluation kernels.

These are the routines the estimator grinds on: closed-form outcome
probabilities of the qubit channel model (singlet probe, polar chart) for a
measurement given by its Pauli correlators, and the multinomial negative
log-likelihood built on them. The compiled extension in ``_core.pyx``
implements the same contract; either backend may be active.

Conventions: ``points`` is (m, 3) rows of (alpha, theta, phi); a measurement
element M is carried as its trace ``t`` and the real 3x3 correlator table
``G[j, i] = tr[(sigma_j x sigma_i) M]``, in terms of which

    p(point) = (t - sum_ij K_ij(point) G_ji) / 4

with K the closed-form conjugation table
K_ij = cos(2a) d_ij - sin(2a) eps_ijk n_k + 2 sin^2(a) n_i n_j.
"""

from __future__ import annotations

import numpy as np

_NLL_FLOOR = 1e-300


def heisenberg_rotation_batch(points: np.ndarray) -> np.ndarray:
    """Closed-form table (1/2) tr(U sigma_i U^dag sigma_j) per point.

    Returns an (m, 3, 3) array of rotation matrices.
    """
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    alpha, theta, phi = points[:, 0], points[:, 1], points[:, 2]
    st, ct = np.sin(theta), np.cos(theta)
    n = np.stack([st * np.cos(phi), st * np.sin(phi), ct], axis=1)
    c2a, s2a = np.cos(2 * alpha), np.sin(2 * alpha)
    sa2 = np.sin(alpha) ** 2
    m = points.shape[0]
    K = c2a[:, None, None] * np.eye(3)[None, :, :]
    cross = np.zeros((m, 3, 3))
    cross[:, 0, 1] = n[:, 2]
    cross[:, 0, 2] = -n[:, 1]
    cross[:, 1, 0] = -n[:, 2]
    cross[:, 1, 2] = n[:, 0]
    cross[:, 2, 0] = n[:, 1]
    cross[:, 2, 1] = -n[:, 0]
    K -= s2a[:, None, None] * cross
    K += 2.0 * sa2[:, None, None] * np.einsum("mi,mj->mij", n, n)
    return K


def singlet_probabilities_batch(
    points: np.ndarray, traces: np.ndarray, correlators: np.ndarray
) -> np.ndarray:
    """Outcome probabilities of the singlet-probe model, (m, n_outcomes)."""
    K = heisenberg_rotation_batch(points)
    traces = np.asarray(traces, dtype=float)
    correlators = np.asarray(correlators, dtype=float)
    return 0.25 * (traces[None, :] - np.einsum("mij,nji->mn", K, correlators))


def singlet_nll_batch(
    points: np.ndarray,
    counts: np.ndarray,
    traces: np.ndarray,
    correlators: np.ndarray,
) -> np.ndarray:
    """Negative log-likelihood -sum_xi counts_xi log p_xi per point.

    Points where an observed outcome has non-positive probability get +inf.
    """
    probs = singlet_probabilities_batch(points, traces, correlators)
    counts = np.asarray(counts, dtype=float)
    observed = counts > 0
    bad = np.any(probs[:, observed] < _NLL_FLOOR, axis=1)
    safe = np.clip(probs[:, observed], _NLL_FLOOR, None)
    nll = -(counts[observed] * np.log(safe)).sum(axis=1)
    nll[bad] = np.inf
    return nll
