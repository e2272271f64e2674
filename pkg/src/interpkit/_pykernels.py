"""Numpy implementations of the hot loops, used when the extension is absent."""

from __future__ import annotations

import numpy as np

_CHUNK = 1 << 14


def max_sign_sum(a: np.ndarray) -> float:
    """max over zeta in {-1,1}^n of sum_j |sum_k a[j, k] zeta_k|."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    m, n = a.shape
    if m == 0 or n == 0:
        return 0.0
    free = n - 1
    total = 1 << free
    bits = np.arange(free, dtype=np.int64)
    best = 0.0
    for start in range(0, total, _CHUNK):
        codes = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        signs = np.ones((codes.size, n))
        if free:
            signs[:, :free] = 1.0 - 2.0 * ((codes[:, None] >> bits) & 1)
        best = max(best, float(np.abs(signs @ a.T).sum(axis=1).max()))
    return best


def calderon(c: np.ndarray, labels: np.ndarray, lam: float) -> np.ndarray:
    """Omega(c)_j = sum_k min(1, lam**(j - k)) c_k over the given integer labels."""
    c = np.asarray(c, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    d = labels[:, None] - labels[None, :]
    factors = np.where(d >= 0, 1.0, np.power(float(lam), np.minimum(d, 0).astype(float)))
    return factors @ c
