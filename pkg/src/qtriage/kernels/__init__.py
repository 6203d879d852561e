"""Backend selection for the numeric training kernels.

QTRIAGE_BACKEND=numpy forces the pure-numpy fallback; QTRIAGE_BACKEND=numba
demands the jitted path (and fails loudly if numba is missing). Unset, the
numba backend is used when importable. See benchmarks/bench_kernels.py for a
side-by-side timing of both.
"""

from __future__ import annotations

import os

_flag = os.environ.get("QTRIAGE_BACKEND", "").strip().lower()
if _flag not in ("", "numba", "numpy"):
    raise RuntimeError(
        f"QTRIAGE_BACKEND must be 'numba' or 'numpy', got {_flag!r}"
    )

if _flag == "numpy":
    from . import backend_numpy as _impl
    BACKEND = "numpy"
else:
    try:
        from . import backend_numba as _impl
        BACKEND = "numba"
    except ImportError:
        if _flag == "numba":
            raise
        from . import backend_numpy as _impl
        BACKEND = "numpy"


def backend_name() -> str:
    return BACKEND


logreg_scores = _impl.logreg_scores
logreg_grad = _impl.logreg_grad
svm_epoch = _impl.svm_epoch
best_split = _impl.best_split
forest_votes = _impl.forest_votes
