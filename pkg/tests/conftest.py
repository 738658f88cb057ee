"""Shared numerical oracles and random-object builders for the test suite."""

import numpy as np
import pytest

from qufit.povm import Povm


def central_difference(fn, coords, step=1e-5):
    """Matrix-valued central finite differences, one derivative per coordinate."""
    coords = np.asarray(coords, dtype=float)
    derivs = []
    for i in range(coords.size):
        up, down = coords.copy(), coords.copy()
        up[i] += step
        down[i] -= step
        derivs.append((fn(up) - fn(down)) / (2 * step))
    return np.array(derivs)


def haar_basis_povm(dim, rng):
    """Projective measurement onto a Haar-random orthonormal basis of C^dim."""
    from scipy.stats import unitary_group

    V = unitary_group.rvs(dim, random_state=rng)
    return Povm(np.array([np.outer(V[:, k], V[:, k].conj()) for k in range(dim)]))


def two_element_povm(dim, rank, rng):
    """{P, 1 - P} for a Haar-random rank-``rank`` projector."""
    from scipy.stats import unitary_group

    V = unitary_group.rvs(dim, random_state=rng)
    P = sum(np.outer(V[:, k], V[:, k].conj()) for k in range(rank))
    return Povm(np.array([P, np.eye(dim) - P]))


def random_su2_points(n, rng, lo=0.25, hi=1.35):
    """Interior polar-chart points, away from probability zeros of the
    standard measurement families."""
    pts = np.empty((n, 3))
    pts[:, 0] = rng.uniform(lo, hi, n)
    pts[:, 1] = rng.uniform(lo, hi, n)
    pts[:, 2] = rng.uniform(lo, hi, n)
    return pts


def partial_trace_first(rho, d):
    """Trace out the first factor of a (d*d) x (d*d) density matrix."""
    return np.trace(rho.reshape(d, d, d, d), axis1=0, axis2=2)


def partial_trace_second(rho, d):
    return np.trace(rho.reshape(d, d, d, d), axis1=1, axis2=3)


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
