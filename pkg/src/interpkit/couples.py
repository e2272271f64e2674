"""Weighted sequence couples (l^p(w0), l^p(w1)) and their functionals."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Any, NamedTuple, Sequence

import numpy as np

from interpkit import kernels
from interpkit.errors import (
    DomainError,
    ParameterError,
    ShapeError,
    UnsupportedExponentError,
)
from interpkit.qcfun import MinAffine, QcFunction, derived_weight

DEFAULT_EXACT_CAP = 20


def exact_cap() -> int:
    """Largest enumerated dimension for exact inf->1 norms (env INTERPKIT_CAP)."""
    raw = os.environ.get("INTERPKIT_CAP")
    if raw is None:
        return DEFAULT_EXACT_CAP
    cap = int(raw)
    if cap < 1:
        raise ParameterError("INTERPKIT_CAP must be >= 1")
    return cap


def _parse_p(p: Any) -> float:
    if isinstance(p, str):
        if p.lower() in ("inf", "infinity", "∞"):
            return math.inf
        p = float(p)
    p = float(p)
    if not p >= 1.0:
        raise ParameterError("exponent p must lie in [1, inf]")
    return p


@dataclass(frozen=True, eq=False)
class WeightedCouple:
    labels: tuple[int, ...]
    w0: np.ndarray
    w1: np.ndarray
    p: float = math.inf

    def __post_init__(self):
        w0 = np.asarray(self.w0, dtype=float).copy()
        w1 = np.asarray(self.w1, dtype=float).copy()
        labels = tuple(int(k) for k in self.labels)
        if w0.ndim != 1 or w0.shape != w1.shape or len(labels) != w0.size:
            raise ShapeError("labels, w0 and w1 must have one common length")
        if len(set(labels)) != len(labels):
            raise ShapeError("duplicate index labels")
        if not (np.all(np.isfinite(w0)) and np.all(np.isfinite(w1))):
            raise DomainError("weights must be finite")
        if np.any(w0 <= 0) or np.any(w1 <= 0):
            raise DomainError("weights must be strictly positive")
        tau = w0 / w1
        if not np.all(np.isfinite(tau)) or np.any(tau <= 0):
            raise DomainError("w0/w1 over- or underflows")
        w0.setflags(write=False)
        w1.setflags(write=False)
        object.__setattr__(self, "w0", w0)
        object.__setattr__(self, "w1", w1)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "p", _parse_p(self.p))

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def tau(self) -> np.ndarray:
        return self.w0 / self.w1

    def weight(self, side: int) -> np.ndarray:
        if side not in (0, 1):
            raise ParameterError("side must be 0 or 1")
        return self.w0 if side == 0 else self.w1

    def with_p(self, p) -> "WeightedCouple":
        return WeightedCouple(self.labels, self.w0, self.w1, p)

    def check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.size,):
            raise ShapeError(f"vector of shape {x.shape} does not match couple of size {self.size}")
        if not np.all(np.isfinite(x)):
            raise DomainError("vector entries must be finite")
        return x

    @classmethod
    def lambda_adic(cls, lam: float, k_min: int, k_max: int, p=math.inf) -> "WeightedCouple":
        """The couple (l^p, l^p(lam**-k)) over labels k_min..k_max."""
        if not lam > 1:
            raise ParameterError("lambda must exceed 1")
        ks = np.arange(k_min, k_max + 1)
        return cls(tuple(int(k) for k in ks), np.ones(ks.size), np.power(float(lam), -ks.astype(float)), p)

    @classmethod
    def from_spec(cls, spec: dict[str, Any]) -> "WeightedCouple":
        p = spec.get("p", "inf")
        if "lambda_adic" in spec:
            g = spec["lambda_adic"]
            return cls.lambda_adic(float(g["lambda"]), int(g["k_min"]), int(g["k_max"]), g.get("p", p))
        w0 = spec["w0"]
        labels = spec.get("labels", list(range(len(w0))))
        return cls(tuple(labels), np.asarray(w0, float), np.asarray(spec["w1"], float), p)

    def to_spec(self) -> dict[str, Any]:
        return {
            "labels": list(self.labels),
            "w0": [float(v) for v in self.w0],
            "w1": [float(v) for v in self.w1],
            "p": "inf" if math.isinf(self.p) else self.p,
        }


@dataclass(frozen=True, eq=False)
class CoupleOperator:
    """Matrix with rows over the target index set and columns over the source."""

    matrix: np.ndarray
    source: WeightedCouple
    target: WeightedCouple

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (self.target.size, self.source.size):
            raise ShapeError(f"matrix {m.shape} does not match couples ({self.target.size}, {self.source.size})")
        object.__setattr__(self, "matrix", m)

    def __call__(self, x) -> np.ndarray:
        return self.matrix @ self.source.check(x)


class OpNorm(NamedTuple):
    value: float
    exact: bool


def _lp_norm(v: np.ndarray, p: float) -> float:
    a = np.abs(v)
    if a.size == 0:
        return 0.0
    if math.isinf(p):
        return float(a.max())
    if p == 1.0:
        return math.fsum(a)
    top = float(a.max())
    if top == 0.0:
        return 0.0
    # scale first so large weights cannot overflow the power
    return top * math.fsum((a / top) ** p) ** (1.0 / p)


def norm_side(c: WeightedCouple, i: int, x) -> float:
    """l^p(w^i) norm of x."""
    x = c.check(x)
    return _lp_norm(c.weight(i) * x, c.p)


def _require_k_exponent(c: WeightedCouple) -> None:
    if c.p not in (1.0, math.inf):
        raise UnsupportedExponentError("K-functionals are exact only for p = 1 and p = inf")


def _k_inf(w0: np.ndarray, w1: np.ndarray, t: float, ax: np.ndarray) -> float:
    """inf over c >= 0 of c + t * max_n w1_n * max(0, |x_n| - c / w0_n).

    The objective is convex piecewise linear in c; its kinks are c = 0, the
    zero crossings c = w0_n |x_n| of each line, and the pairwise crossings of
    the lines inside the max.  Evaluating every candidate gives the exact
    minimum.
    """
    live = ax > 0
    if not np.any(live):
        return 0.0
    w0, w1, ax = w0[live], w1[live], ax[live]
    icpt = w1 * ax  # line n: icpt_n - slope_n * c
    slope = w1 / w0
    cands = [np.zeros(1), w0 * ax]
    ds = slope[:, None] - slope[None, :]
    di = icpt[:, None] - icpt[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        cross = di / ds
    cross = cross[np.isfinite(cross) & (cross > 0)]
    cands.append(cross)
    c = np.unique(np.concatenate(cands))
    resid = (w1[None, :] * np.maximum(ax[None, :] - c[:, None] / w0[None, :], 0.0)).max(axis=1)
    best = float(np.min(c + t * resid))
    # the endpoint splits x0 = x and x1 = x are exact; keep rounding from exceeding them
    return min(best, float(np.max(w0 * ax)), t * float(np.max(w1 * ax)))


def k_exact(c: WeightedCouple, t: float, x) -> float:
    """Peetre K-functional inf_{x = x0 + x1} ||x0||_0 + t ||x1||_1, for p in {1, inf}."""
    _require_k_exponent(c)
    if not t > 0:
        raise DomainError("t must be positive")
    x = c.check(x)
    ax = np.abs(x)
    if c.p == 1.0:
        return math.fsum(np.minimum(c.w0, t * c.w1) * ax)
    return _k_inf(c.w0, c.w1, float(t), ax)


def k_surrogate(c: WeightedCouple, t: float, x) -> float:
    """sup_n min(w0_n, t w1_n) |x_n| for p = inf (within factor 2 of K); K itself for p = 1."""
    _require_k_exponent(c)
    if not t > 0:
        raise DomainError("t must be positive")
    x = c.check(x)
    if c.p == 1.0:
        return k_exact(c, t, x)
    if x.size == 0:
        return 0.0
    return float(np.max(np.minimum(c.w0, t * c.w1) * np.abs(x)))


def j_functional(c: WeightedCouple, t: float, x) -> float:
    """max(||x||_0, t ||x||_1)."""
    if not t > 0:
        raise DomainError("t must be positive")
    return max(norm_side(c, 0, x), t * norm_side(c, 1, x))


def rho_norm(c: WeightedCouple, rho: QcFunction, x) -> float:
    """l^p norm of x against the weight w0 / rho(w0 / w1)."""
    x = c.check(x)
    return _lp_norm(derived_weight(rho, c.w0, c.w1) * x, c.p)


def k_majorant(c: WeightedCouple, x, ts: Sequence[float] | None = None) -> MinAffine:
    """Least quasi-concave majorant of the samples t -> K(t, x) at the given points.

    Defaults to the couple's own tau_n.  Zero samples are dropped; x must be
    nonzero.
    """
    ts = c.tau if ts is None else np.asarray(ts, dtype=float)
    pairs = []
    for t in ts:
        kv = k_exact(c, float(t), x)
        if kv > 0:
            pairs.append((kv, kv / float(t)))
    if not pairs:
        raise DomainError("K vanishes at every sample; x must be nonzero")
    return MinAffine(tuple(pairs))


def opnorm_inf_to_1(A, u, v, cap: int | None = None) -> OpNorm:
    """||A|| from l^inf(u) to l^1(v).

    Exact by sign enumeration over the shorter matrix side when that side has
    at most ``cap`` entries; otherwise the absolute-sum upper bound with
    ``exact=False``.
    """
    A = np.asarray(A, dtype=float)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if A.ndim != 2 or A.shape != (v.size, u.size):
        raise ShapeError(f"matrix {A.shape} does not match weights ({v.size}, {u.size})")
    if np.any(u <= 0) or np.any(v <= 0):
        raise DomainError("weights must be positive")
    scaled = v[:, None] * A / u[None, :]
    cap = exact_cap() if cap is None else cap
    if min(scaled.shape) == 0:
        return OpNorm(0.0, True)
    if min(scaled.shape) > cap:
        return OpNorm(math.fsum(np.abs(scaled).ravel()), False)
    return OpNorm(kernels.max_sign_sum(scaled), True)


def weighted_opnorm(A, u, v, p: float, q: float, cap: int | None = None) -> OpNorm:
    """||A|| from l^p(u) to l^q(v).

    Exact for (inf, 1) by enumeration, for p = 1 (largest column norm), for
    q = inf (largest row dual norm) and for (2, 2) (spectral norm).  Any
    other pair falls back to the inf->1 value, which dominates every p->q
    norm of the scaled matrix, with ``exact=False``.
    """
    A = np.asarray(A, dtype=float)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if A.shape != (v.size, u.size):
        raise ShapeError("matrix does not match weights")
    if A.size == 0:
        return OpNorm(0.0, True)
    scaled = v[:, None] * A / u[None, :]
    if math.isinf(p) and q == 1.0:
        return opnorm_inf_to_1(A, u, v, cap)
    if p == 1.0:
        return OpNorm(max(_lp_norm(scaled[:, k], q) for k in range(scaled.shape[1])), True)
    if math.isinf(q):
        dual = 1.0 if math.isinf(p) else p / (p - 1.0)
        return OpNorm(max(_lp_norm(scaled[j], dual) for j in range(scaled.shape[0])), True)
    if p == 2.0 and q == 2.0:
        return OpNorm(float(np.linalg.norm(scaled, 2)), True)
    bound = opnorm_inf_to_1(A, u, v, cap)
    return OpNorm(bound.value, False)


def couple_opnorm(T: CoupleOperator, cap: int | None = None) -> OpNorm:
    """max over sides of ||T_i||; exact when both side norms are."""
    vals = [
        weighted_opnorm(T.matrix, T.source.weight(i), T.target.weight(i), T.source.p, T.target.p, cap)
        for i in (0, 1)
    ]
    return OpNorm(max(v.value for v in vals), all(v.exact for v in vals))


def multiplier_sum(a, b) -> float:
    """sum_k |b_k| / |a_k| with 0/0 read as 0; +inf if some b_k != 0 meets a_k = 0."""
    a = np.abs(np.asarray(a, dtype=float))
    b = np.abs(np.asarray(b, dtype=float))
    if a.shape != b.shape:
        raise ShapeError("a and b differ in length")
    live = b > 0
    if np.any(a[live] == 0):
        return math.inf
    return math.fsum(b[live] / a[live])


def multiplier_operator(a, b, source: WeightedCouple, target: WeightedCouple) -> CoupleOperator:
    """The diagonal map x -> {b_k x_k / a_k} (zero where b_k = 0)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if math.isinf(multiplier_sum(a, b)):
        raise DomainError("b_k != 0 where a_k = 0")
    with np.errstate(divide="ignore", invalid="ignore"):
        d = np.where(b != 0, b / a, 0.0)
    return CoupleOperator(np.diag(d), source, target)
