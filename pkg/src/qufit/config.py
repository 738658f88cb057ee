"""Central numerical tolerance configuration.

Every tolerance used by the library lives in one frozen record so that a
single override (e.g. from the CLI) propagates consistently. The defaults
are the contract the test suite runs against.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    # structural identities (generator orthonormality, trace conditions)
    algebra: float = 1e-12
    # unitarity of exponentiated group elements
    unitary: float = 1e-10
    # agreement of analytic derivatives with central finite differences
    derivative_fd: float = 1e-7
    # symmetry / hermiticity residuals of Fisher matrices
    symmetry: float = 1e-10
    # most-negative eigenvalue accepted as "positive semidefinite"
    psd: float = -1e-9
    # hard positive-definiteness gate for inverting the quantum Fisher matrix
    positive_definite: float = 1e-10
    # POVM element PSD floor and completeness residual
    povm_psd: float = -1e-10
    povm_completeness: float = 1e-10
    # completeness residual above which a POVM file is rejected on load
    povm_load: float = 1e-8
    # probability vector checks
    probability_sum: float = 1e-10
    probability_floor: float = -1e-12
    # classical FI zero-probability conventions
    zero_probability: float = 1e-12
    zero_probability_derivative: float = 1e-9
    # eigenvalue-sum cutoff for the mixed-state logarithmic-derivative solve
    sld_support: float = 1e-10
    sld_ill_posed: float = 1e-8
    # achievability gap allowed when building a bound-attaining measurement
    achievability: float = 1e-8
    # open-domain margin for the polar chart (its boundary is degenerate)
    chart_margin: float = 1e-6
    # figure-of-merit slack against the parameter-count ceiling
    merit_bound: float = 1e-8

    def replace(self, **overrides: float) -> "Tolerances":
        return dataclasses.replace(self, **overrides)


TOL = Tolerances()
