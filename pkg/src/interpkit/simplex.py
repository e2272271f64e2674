"""Dense two-phase primal simplex with Bland's rule.

Solves  min c @ x  subject to  A_ub @ x <= b_ub,  A_eq @ x == b_eq,  x >= 0.
Meant for desk-scale problems (a few hundred variables); deterministic and
free of external solvers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from interpkit.errors import InfeasibleError


@dataclass(frozen=True)
class LPResult:
    x: np.ndarray
    fun: float
    status: str  # "optimal" | "infeasible" | "unbounded" | "iteration_limit"
    iterations: int


def _pivot(tab: np.ndarray, row: int, col: int) -> None:
    tab[row] /= tab[row, col]
    piv = tab[row]
    col_vals = tab[:, col].copy()
    col_vals[row] = 0.0
    nz = np.nonzero(col_vals)[0]
    if nz.size:
        tab[nz] -= np.outer(col_vals[nz], piv)


PIVOT_TOL = 1e-9  # smallest admissible pivot after row equilibration


def _run(tab: np.ndarray, basis: list[int], allowed: int, tol: float, max_iter: int) -> tuple[str, int]:
    """Minimise the objective stored in the last row; columns >= allowed never enter."""
    it = 0
    while it < max_iter:
        red = tab[-1, :allowed]
        cand = np.nonzero(red < -tol)[0]
        if cand.size == 0:
            return "optimal", it
        col = int(cand[0])  # Bland: smallest eligible index
        colv = tab[:-1, col]
        pos = colv > PIVOT_TOL
        if not np.any(pos):
            return "unbounded", it
        ratios = np.full(colv.shape, np.inf)
        # rounding can leave a basic value at -1e-17; read it as zero
        ratios[pos] = np.maximum(tab[:-1, -1][pos], 0.0) / colv[pos]
        best = ratios.min()
        ties = np.nonzero(ratios <= best + tol * max(1.0, abs(best)))[0]
        row = int(min(ties, key=lambda r: basis[r]))  # Bland: smallest leaving variable
        _pivot(tab, row, col)
        basis[row] = col
        it += 1
    return "iteration_limit", it


def solve(
    c,
    A_ub=None,
    b_ub=None,
    A_eq=None,
    b_eq=None,
    tol: float = 1e-11,
    max_iter: int = 50_000,
) -> LPResult:
    c = np.asarray(c, dtype=float)
    n = c.size
    A_ub = np.zeros((0, n)) if A_ub is None else np.asarray(A_ub, dtype=float).reshape(-1, n)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float)
    A_eq = np.zeros((0, n)) if A_eq is None else np.asarray(A_eq, dtype=float).reshape(-1, n)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float)
    m_ub, m_eq = A_ub.shape[0], A_eq.shape[0]
    m = m_ub + m_eq

    # standard form: [A_ub I; A_eq 0] [x; s] = b, then flip rows with b < 0
    A = np.zeros((m, n + m_ub))
    A[:m_ub, :n] = A_ub
    A[:m_ub, n:] = np.eye(m_ub)
    A[m_ub:, :n] = A_eq
    b = np.concatenate([b_ub, b_eq])
    neg = b < 0
    A[neg] *= -1.0
    b = np.where(neg, -b, b)
    # equilibrate rows so that pivot and feasibility tolerances are scale-free
    row_scale = np.abs(A).max(axis=1, initial=0.0)
    row_scale[row_scale == 0.0] = 1.0
    A /= row_scale[:, None]
    b = b / row_scale
    n_std = n + m_ub

    # phase 1 with one artificial per row
    tab = np.zeros((m + 1, n_std + m + 1))
    tab[:m, :n_std] = A
    tab[:m, n_std : n_std + m] = np.eye(m)
    tab[:m, -1] = b
    tab[-1, :n_std] = -A.sum(axis=0)
    tab[-1, -1] = -b.sum()
    basis = list(range(n_std, n_std + m))
    scale = max(1.0, float(np.abs(b).max(initial=0.0)))
    status, it1 = _run(tab, basis, n_std + m, tol, max_iter)
    if status != "optimal" or -tab[-1, -1] > 1e-9 * scale:
        return LPResult(np.full(n, np.nan), np.nan, "infeasible", it1)

    # drive remaining artificials out of the basis where possible
    for r in range(m):
        if basis[r] >= n_std:
            nz = np.nonzero(np.abs(tab[r, :n_std]) > tol)[0]
            if nz.size:
                _pivot(tab, r, int(nz[0]))
                basis[r] = int(nz[0])
    keep = [r for r in range(m) if basis[r] < n_std]
    tab = np.vstack([tab[keep], tab[-1:]])
    basis = [basis[r] for r in keep]
    tab = np.delete(tab, np.s_[n_std : n_std + m], axis=1)

    # phase 2 objective row, reduced against the current basis
    tab[-1] = 0.0
    tab[-1, :n] = c
    for r, j in enumerate(basis):
        if tab[-1, j] != 0.0:
            tab[-1] -= tab[-1, j] * tab[r]
    status, it2 = _run(tab, basis, n_std, tol, max_iter)
    x_std = np.zeros(n_std)
    for r, j in enumerate(basis):
        x_std[j] = tab[r, -1]
    x = np.maximum(x_std[:n], 0.0)
    if status != "optimal":
        return LPResult(x, np.nan, status, it1 + it2)
    return LPResult(x, float(c @ x), "optimal", it1 + it2)


def solve_or_raise(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, **kw) -> LPResult:
    res = solve(c, A_ub, b_ub, A_eq, b_eq, **kw)
    if res.status != "optimal":
        raise InfeasibleError(f"linear program not solved: {res.status}")
    return res
