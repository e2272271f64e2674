"""Representations x = sum_k x_k, the discrete Calderon transform and the J/K gap.

The gap of y against x over a lam-grid is

    inf over representations y = sum_k y_k of  sum_k J(lam**k, y_k) / K(lam**k, x),

computed either greedily (each coordinate placed whole at its best k) or
exactly as a linear program.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from interpkit import kernels, simplex
from interpkit.couples import WeightedCouple, j_functional, k_exact, k_surrogate
from interpkit.errors import ParameterError, ShapeError, UnsupportedExponentError
from interpkit.retract import partition

LP_SIZE_CAP = 600  # variables


@dataclass(frozen=True, eq=False)
class Representation:
    lam: float
    parts: dict[int, np.ndarray]
    target: np.ndarray
    couple: WeightedCouple | None = None
    rtol: float = 1e-10

    def __post_init__(self):
        if not self.lam > 1:
            raise ParameterError("lambda must exceed 1")
        target = np.asarray(self.target, dtype=float)
        parts = {int(k): np.asarray(v, dtype=float) for k, v in sorted(self.parts.items())}
        for k, v in parts.items():
            if v.shape != target.shape:
                raise ShapeError(f"part {k} has shape {v.shape}, expected {target.shape}")
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "parts", parts)
        err = np.abs(self.total() - target)
        scale = max(1.0, float(np.abs(target).max(initial=0.0)))
        if np.any(err > self.rtol * scale):
            raise ShapeError(f"parts do not sum to the target (max error {float(err.max())!r})")

    @property
    def labels(self) -> list[int]:
        return list(self.parts)

    def total(self) -> np.ndarray:
        if not self.parts:
            return np.zeros_like(self.target)
        stack = np.vstack(list(self.parts.values()))
        return np.array([math.fsum(col) for col in stack.T])

    def j_values(self, couple: WeightedCouple | None = None) -> dict[int, float]:
        c = couple or self.couple
        if c is None:
            raise ParameterError("a couple is needed to evaluate J")
        return {k: j_functional(c, self.lam**k, v) for k, v in self.parts.items()}

    def to_csv(self, target: str | Path | None = None, index_labels: Sequence[int] | None = None) -> str:
        """Long format rows (k, label, value) for the nonzero entries."""
        labels = index_labels or (self.couple.labels if self.couple else range(self.target.size))
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "label", "value"])
        for k, v in self.parts.items():
            for lab, val in zip(labels, v):
                if val != 0.0:
                    w.writerow([k, lab, repr(float(val))])
        text = buf.getvalue()
        if target is not None:
            Path(target).write_text(text)
        return text


def calderon(c_seq, lam: float, labels: Sequence[int] | None = None) -> np.ndarray:
    """Omega(c)_j = sum_k min(1, lam**(j-k)) c_k over the given integer labels."""
    if not lam > 1:
        raise ParameterError("lambda must exceed 1")
    c = np.asarray(c_seq, dtype=float)
    labs = np.arange(c.size, dtype=np.int64) if labels is None else np.asarray(labels, dtype=np.int64)
    if labs.shape != c.shape:
        raise ShapeError("labels and sequence differ in length")
    return kernels.calderon(c, labs, lam)


def fundamental_representation(target_couple: WeightedCouple, a, lam: float) -> Representation:
    """Split a (in an l^1 couple) by the blocks e_k; J(lam**k, a_k) <= lam K(lam**k, a)."""
    if target_couple.p != 1.0:
        raise UnsupportedExponentError("the block construction is specific to p = 1")
    a = target_couple.check(a)
    part = partition(target_couple, lam)
    parts = {}
    for k in part.labels:
        v = np.zeros_like(a)
        idx = list(part.block(int(k)))
        v[idx] = a[idx]
        parts[int(k)] = v
    return Representation(part.lam, parts, a, target_couple)


def strong_form_check(rep: Representation, x=None, couple: WeightedCouple | None = None, pad: int = 2) -> float:
    """max_j Omega({J(lam**k, x_k)})_j / K(lam**j, x) over the labels padded by ``pad``.

    Returns 0 for the zero vector and +inf when K vanishes under a positive Omega.
    """
    c = couple or rep.couple
    if c is None:
        raise ParameterError("a couple is needed")
    x = rep.target if x is None else c.check(x)
    if not rep.parts:
        return 0.0
    ks = rep.labels
    js = np.arange(min(ks) - pad, max(ks) + pad + 1, dtype=np.int64)
    jv = rep.j_values(c)
    seq = np.array([jv.get(int(j), 0.0) for j in js])
    omega = calderon(seq, rep.lam, js)
    worst = 0.0
    for j, om in zip(js, omega):
        if om == 0.0:
            continue
        kv = k_exact(c, rep.lam ** int(j), x)
        if kv == 0.0:
            return math.inf
        worst = max(worst, om / kv)
    return worst


@dataclass(frozen=True, eq=False)
class GapCertificate:
    value: float
    witness: Representation | None
    method: str  # "greedy" | "lp-exact"
    k_range: tuple[int, int]
    infinite: bool = False
    fallback: bool = False
    surrogate: bool = False
    note: str = field(
        default="k-range truncated to the target weight-ratio range padded by one step",
    )


def gap_k_range(target: WeightedCouple, lam: float) -> tuple[int, int]:
    sigma = target.tau
    lo = math.ceil(math.log(float(sigma.min())) / math.log(lam)) - 1
    hi = math.ceil(math.log(float(sigma.max())) / math.log(lam)) + 1
    return lo, hi


def gap_value(rep: Representation, source: WeightedCouple, x, target: WeightedCouple, surrogate: bool = False) -> float:
    """sum_k J(lam**k, y_k) / K(lam**k, x) evaluated on a witness."""
    kfun = k_surrogate if surrogate else k_exact
    terms = []
    for k, v in rep.parts.items():
        jv = j_functional(target, rep.lam**k, v)
        if jv == 0.0:
            continue
        kv = kfun(source, rep.lam**k, x)
        if kv == 0.0:
            return math.inf
        terms.append(jv / kv)
    return math.fsum(terms)


def _fix_residual(parts: dict[int, np.ndarray], y: np.ndarray) -> None:
    """Absorb rounding residue so the parts sum to y; mass goes to the largest part."""
    ks = list(parts)
    stack = np.vstack([parts[k] for k in ks])
    for n in range(y.size):
        resid = y[n] - math.fsum(stack[:, n])
        if resid != 0.0:
            r = int(np.argmax(np.abs(stack[:, n])))
            parts[ks[r]][n] += resid


def jk_gap(
    source: WeightedCouple,
    x,
    target: WeightedCouple,
    y,
    lam: float,
    method: str = "lp",
    surrogate: bool = False,
    size_cap: int = LP_SIZE_CAP,
) -> GapCertificate:
    if not lam > 1:
        raise ParameterError("lambda must exceed 1")
    if method not in ("greedy", "lp"):
        raise ParameterError("method must be 'greedy' or 'lp'")
    if target.p != 1.0:
        raise UnsupportedExponentError("the target couple must have p = 1")
    x = source.check(x)
    y = target.check(y)
    lam = float(lam)
    lo, hi = gap_k_range(target, lam)
    ks = list(range(lo, hi + 1))
    label = "lp-exact" if method == "lp" else "greedy"
    if not np.any(y):
        zero = Representation(lam, {}, y, target)
        return GapCertificate(0.0, zero, label, (lo, hi), surrogate=surrogate)
    if not np.any(x):
        return GapCertificate(math.inf, None, label, (lo, hi), infinite=True, surrogate=surrogate)

    kfun = k_surrogate if surrogate else k_exact
    kvals = np.array([kfun(source, lam**k, x) for k in ks])
    if np.any(kvals == 0.0):
        # only possible for vectors with K identically zero, excluded above
        return GapCertificate(math.inf, None, label, (lo, hi), infinite=True, surrogate=surrogate)

    n_vars = 2 * len(ks) * target.size + len(ks)
    fallback = method == "lp" and n_vars > size_cap
    if method == "greedy" or fallback:
        parts = _greedy(target, y, lam, ks, kvals)
        label = "greedy"
    else:
        parts = _lp(target, y, lam, ks, kvals)
    _fix_residual(parts, y)
    rep = Representation(lam, parts, y, target)
    value = gap_value(rep, source, x, target, surrogate)
    return GapCertificate(value, rep, label, (lo, hi), fallback=fallback, surrogate=surrogate)


def _greedy(target, y, lam, ks, kvals) -> dict[int, np.ndarray]:
    parts = {k: np.zeros(target.size) for k in ks}
    lk = lam ** np.asarray(ks, dtype=float)
    for n in np.nonzero(y)[0]:
        cost = np.maximum(target.w0[n], lk * target.w1[n]) / kvals
        parts[ks[int(np.argmin(cost))]][n] = y[n]
    return parts


def _lp(target, y, lam, ks, kvals) -> dict[int, np.ndarray]:
    nk, nn = len(ks), target.size
    # variable layout: y+ (k, n), y- (k, n), u (k)
    n_vars = 2 * nk * nn + nk

    def yp(ki, n):
        return ki * nn + n

    def ym(ki, n):
        return nk * nn + ki * nn + n

    def u(ki):
        return 2 * nk * nn + ki

    cost = np.zeros(n_vars)
    for ki in range(nk):
        cost[u(ki)] = 1.0 / kvals[ki]
    A_eq = np.zeros((nn, n_vars))
    for n in range(nn):
        for ki in range(nk):
            A_eq[n, yp(ki, n)] = 1.0
            A_eq[n, ym(ki, n)] = -1.0
    A_ub = np.zeros((2 * nk, n_vars))
    for ki, k in enumerate(ks):
        for side, w in enumerate((target.w0, target.w1 * lam**k)):
            row = 2 * ki + side
            for n in range(nn):
                A_ub[row, yp(ki, n)] = w[n]
                A_ub[row, ym(ki, n)] = w[n]
            A_ub[row, u(ki)] = -1.0
    res = simplex.solve_or_raise(cost, A_ub, np.zeros(2 * nk), A_eq, y)
    sol = res.x
    return {k: np.array([sol[yp(ki, n)] - sol[ym(ki, n)] for n in range(nn)]) for ki, k in enumerate(ks)}


@dataclass(frozen=True)
class OrderingReport:
    k_constant: float
    k_ordering: bool
    bergh: bool
    bergh_t: float | None
    cwikel_sum: float
    cwikel_finite: bool
    grid: tuple[float, ...]


def ordering_checks(
    source: WeightedCouple,
    x,
    target: WeightedCouple,
    y,
    lam: float,
    k_range: tuple[int, int] | None = None,
    tol: float = 1e-12,
) -> OrderingReport:
    """K-ordering, Bergh and Cwikel criteria on the grid lam**k, k in k_range."""
    x = source.check(x)
    y = target.check(y)
    if k_range is None:
        lo = min(gap_k_range(source, lam)[0], gap_k_range(target, lam)[0])
        hi = max(gap_k_range(source, lam)[1], gap_k_range(target, lam)[1])
        k_range = (lo, hi)
    ts = [float(lam) ** k for k in range(k_range[0], k_range[1] + 1)]
    ratios = []
    bergh_t = None
    for t in ts:
        ky = k_exact(target, t, y)
        kx = k_exact(source, t, x)
        if ky == 0.0:
            ratios.append(0.0)
        elif kx == 0.0:
            ratios.append(math.inf)
        else:
            ratios.append(ky / kx)
        if bergh_t is None and j_functional(target, t, y) <= kx * (1 + tol):
            bergh_t = t
    const = max(ratios) if ratios else 0.0
    total = math.fsum(ratios) if all(math.isfinite(r) for r in ratios) else math.inf
    return OrderingReport(
        k_constant=const,
        k_ordering=const <= 1 + tol,
        bergh=bergh_t is not None,
        bergh_t=bergh_t,
        cwikel_sum=total,
        cwikel_finite=math.isfinite(total),
        grid=tuple(ts),
    )
