"""Hot-loop kernels with a compiled core and a numpy fallback.

The compiled extension is preferred when present; set ``QUFIT_PURE_PYTHON=1``
to force the fallback (used by the parity tests and the benchmark).
``BACKEND`` records which implementation is active.
"""

import os

if os.environ.get("QUFIT_PURE_PYTHON"):
    from . import core_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        from . import core_py as _impl

        BACKEND = "python"

heisenberg_rotation_batch = _impl.heisenberg_rotation_batch
singlet_probabilities_batch = _impl.singlet_probabilities_batch
singlet_nll_batch = _impl.singlet_nll_batch

__all__ = [
    "BACKEND",
    "heisenberg_rotation_batch",
    "singlet_probabilities_batch",
    "singlet_nll_batch",
]
