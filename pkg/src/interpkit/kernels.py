"""Backend selection for the hot kernels.

The compiled module is used when it imports; set ``INTERPKIT_PURE_PYTHON=1``
to force the numpy fallback.
"""

from __future__ import annotations

import os

import numpy as np

from interpkit import _pykernels

try:
    if os.environ.get("INTERPKIT_PURE_PYTHON") == "1":
        raise ImportError("pure-python backend requested")
    from interpkit import _ckernels as _impl
    BACKEND = "cython"
except ImportError:
    _impl = _pykernels
    BACKEND = "python"


def max_sign_sum(a: np.ndarray) -> float:
    a = np.ascontiguousarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError("expected a 2-d matrix")
    # the value is symmetric in (rows, cols); enumerate the shorter side
    if a.shape[1] > a.shape[0]:
        a = np.ascontiguousarray(a.T)
    return float(_impl.max_sign_sum(a))


def calderon(c: np.ndarray, labels: np.ndarray, lam: float) -> np.ndarray:
    return _impl.calderon(
        np.ascontiguousarray(c, dtype=np.float64),
        np.ascontiguousarray(labels, dtype=np.int64),
        float(lam),
    )
