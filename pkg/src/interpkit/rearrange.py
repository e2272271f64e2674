"""Step functions on (0, inf), decreasing rearrangement, Marcinkiewicz and Lorentz norms.

Breakpoints and values are kept as generic Python numbers, so Fraction
inputs give exact rearrangements and exact level-set measures.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np
from scipy import integrate

from interpkit.errors import DomainError, ParameterError, ShapeError
from interpkit.qcfun import PowerLaw, QcFunction

_TAIL = 600.0  # log-variable horizon for the admissibility integrals
_TAIL_TOL = 1e-10


@dataclass(frozen=True)
class StepFunction:
    """Value v_i on (t_{i-1}, t_i] with t_0 = 0; zero beyond the last breakpoint."""

    breakpoints: tuple[Any, ...]
    values: tuple[Any, ...]

    def __post_init__(self):
        bp = tuple(self.breakpoints)
        vals = tuple(self.values)
        if len(bp) != len(vals):
            raise ShapeError("one value per breakpoint is required")
        prev = 0
        for t in bp:
            if not t > prev:
                raise ParameterError("breakpoints must be positive and strictly increasing")
            prev = t
        for v in vals:
            if not (v >= 0 and math.isfinite(v)):
                raise DomainError("values must be finite and nonnegative")
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_pieces(cls, pieces: Sequence[tuple[Any, Any]]) -> "StepFunction":
        """Build from consecutive (width, value) pairs."""
        bp, vals, acc = [], [], 0
        for width, value in pieces:
            acc = acc + width
            bp.append(acc)
            vals.append(value)
        return cls(tuple(bp), tuple(vals))

    @property
    def widths(self) -> tuple[Any, ...]:
        out, prev = [], 0
        for t in self.breakpoints:
            out.append(t - prev)
            prev = t
        return tuple(out)

    @property
    def lefts(self) -> tuple[Any, ...]:
        return (0,) + self.breakpoints[:-1]

    def pieces(self) -> list[tuple[Any, Any]]:
        return list(zip(self.widths, self.values))

    def __call__(self, t: float) -> Any:
        if not t > 0:
            raise DomainError("step functions live on (0, inf)")
        for right, v in zip(self.breakpoints, self.values):
            if t <= right:
                return v
        return 0

    def level_measure(self, s: Any) -> Any:
        """|{t : f(t) > s}|."""
        return sum((w for w, v in self.pieces() if v > s), 0)

    def scaled(self, c: Any) -> "StepFunction":
        return StepFunction(self.breakpoints, tuple(c * v for v in self.values))

    def to_csv(self, target: str | Path | None = None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t_right", "value"])
        for t, v in zip(self.breakpoints, self.values):
            w.writerow([_fmt(t), _fmt(v)])
        text = buf.getvalue()
        if target is not None:
            Path(target).write_text(text)
        return text

    @classmethod
    def from_csv(cls, text: str) -> "StepFunction":
        rows = [r for r in csv.reader(io.StringIO(text)) if r]
        if rows and not _is_number(rows[0][0]):
            rows = rows[1:]
        return cls(tuple(_parse(r[0]) for r in rows), tuple(_parse(r[1]) for r in rows))


def _fmt(v: Any) -> str:
    return str(v) if isinstance(v, Fraction) else repr(float(v))


def _is_number(s: str) -> bool:
    try:
        _parse(s)
        return True
    except (ValueError, ZeroDivisionError):
        return False


def _parse(s: str) -> Any:
    s = s.strip()
    return Fraction(s) if "/" in s else float(s)


def _sum_step(a: StepFunction, b: StepFunction) -> StepFunction:
    """Pointwise sum on the merged breakpoint set."""
    bps = sorted(set(a.breakpoints) | set(b.breakpoints))
    return StepFunction(tuple(bps), tuple(a(t) + b(t) for t in bps))


def rearrange(f: StepFunction) -> StepFunction:
    """Nonincreasing equimeasurable rearrangement; equal values stay as separate pieces."""
    pieces = sorted(f.pieces(), key=lambda p: p[1], reverse=True)  # stable sort
    return StepFunction.from_pieces([(w, v) for w, v in pieces if v > 0] or [(1, 0)])


def _f(fn: QcFunction, t: Any) -> float:
    return float(fn(float(t)))


# ----------------------------------------------------------------- admissibility


@dataclass(frozen=True)
class Admissibility:
    ok: bool
    constant: float
    diagnostic: str = ""
    worst_t: float | None = None


def _log_integral(g: Callable[[float], float]) -> tuple[float, bool]:
    """int_0^inf g(s) ds for a nonnegative integrand; (value, converged)."""
    if g(_TAIL) > _TAIL_TOL:
        return math.inf, False
    val, _ = integrate.quad(g, 0.0, _TAIL, limit=400, epsabs=1e-12, epsrel=1e-10)
    return val, True


def _power_of(fn: QcFunction) -> float | None:
    return fn.theta if isinstance(fn, PowerLaw) else None


def check_psi(psi: QcFunction, grid: Sequence[float]) -> Admissibility:
    """max over t of int_0^t du/psi(u) / (t/psi(t)).

    Closed form 1/(1-theta) for t**theta; otherwise the ratio is written as
    int_0^inf e**-s psi(t)/psi(t e**-s) ds and integrated numerically.
    """
    theta = _power_of(psi)
    if theta is not None:
        if theta >= 1.0:
            return Admissibility(False, math.inf, "int_0 du/psi(u) diverges for psi(t) = t")
        return Admissibility(True, 1.0 / (1.0 - theta))
    worst, worst_t = 0.0, None
    for t in grid:
        pt = _f(psi, t)
        val, ok = _log_integral(lambda s: math.exp(-s) * pt / _f(psi, t * math.exp(-s)))
        if not ok:
            return Admissibility(False, math.inf, f"integrand does not decay at t={t!r}", float(t))
        if val > worst:
            worst, worst_t = val, float(t)
    return Admissibility(True, worst, "", worst_t)


def check_phi(phi: QcFunction, grid: Sequence[float]) -> Admissibility:
    """max over t of int_0^t phi(u) du/u / phi(t); closed form 1/theta for t**theta."""
    theta = _power_of(phi)
    if theta is not None:
        if theta <= 0.0:
            return Admissibility(False, math.inf, "int_0 phi(u) du/u diverges for constant phi")
        return Admissibility(True, 1.0 / theta)
    worst, worst_t = 0.0, None
    for t in grid:
        pt = _f(phi, t)
        val, ok = _log_integral(lambda s: _f(phi, t * math.exp(-s)) / pt)
        if not ok:
            return Admissibility(False, math.inf, f"integrand does not decay at t={t!r}", float(t))
        if val > worst:
            worst, worst_t = val, float(t)
    return Admissibility(True, worst, "", worst_t)


@dataclass(frozen=True)
class ConcaveWeight:
    """A catalog function together with its measured admissibility constant."""

    fn: QcFunction
    role: str  # "psi" | "phi"
    admissibility: Admissibility = field(compare=False)

    @classmethod
    def make(cls, fn: QcFunction, role: str, grid: Sequence[float]) -> "ConcaveWeight":
        if role not in ("psi", "phi"):
            raise ParameterError("role must be 'psi' or 'phi'")
        adm = check_psi(fn, grid) if role == "psi" else check_phi(fn, grid)
        return cls(fn, role, adm)

    @property
    def constant(self) -> float:
        return self.admissibility.constant

    def concave_on(self, grid: Sequence[float]) -> bool:
        """Three-point midpoint test on consecutive grid triples."""
        g = np.sort(np.asarray(grid, dtype=float))
        v = np.asarray(self.fn(g), dtype=float)
        for i in range(1, g.size - 1):
            lam = (g[i] - g[i - 1]) / (g[i + 1] - g[i - 1])
            if v[i] < (1 - lam) * v[i - 1] + lam * v[i + 1] - 1e-12 * abs(v[i]):
                return False
        return True


def _unwrap(w: QcFunction | ConcaveWeight) -> QcFunction:
    return w.fn if isinstance(w, ConcaveWeight) else w


# ------------------------------------------------------------------------- norms


def m_norm(psi, f: StepFunction) -> float:
    """sup_t psi(t) f*(t) = max over pieces of psi(t_i) f*_i."""
    psi = _unwrap(psi)
    fs = rearrange(f)
    return max((_f(psi, t) * float(v) for t, v in zip(fs.breakpoints, fs.values)), default=0.0)


def lambda_norm(phi, f: StepFunction) -> float:
    """int f* dphi = sum f*_i (phi(t_i) - phi(t_{i-1})), reading phi(0) as 0."""
    phi = _unwrap(phi)
    fs = rearrange(f)
    terms, prev = [], 0.0
    for t, v in zip(fs.breakpoints, fs.values):
        cur = _f(phi, t)
        terms.append(float(v) * (cur - prev))
        prev = cur
    return math.fsum(terms)


def m_norm_average(psi, f: StepFunction, samples: int = 64) -> float:
    """Audit form sup_t psi(t)/t int_0^t f*, scanned on and between the breakpoints.

    A lower estimate of the supremum; m_norm <= this <= C1 m_norm.
    """
    psi = _unwrap(psi)
    fs = rearrange(f)
    best, acc, left = 0.0, 0.0, 0.0
    for t, v in zip(fs.breakpoints, fs.values):
        t, v = float(t), float(v)
        for s in np.linspace(left, t, samples + 1)[1:]:
            best = max(best, _f(psi, s) / s * (acc + v * (s - left)))
        acc += v * (t - left)
        left = t
    return best


def _phi_over_t(phi: QcFunction, a: float, b: float) -> float:
    """int_a^b phi(t)/t dt."""
    theta = _power_of(phi)
    if theta is not None:
        if theta == 0.0:
            return math.inf if a == 0.0 else math.log(b / a)
        return (b**theta - a**theta) / theta
    if a == 0.0:
        # int_0^b phi(t)/t dt = int_0^inf phi(b e**-s) ds
        val, ok = _log_integral(lambda s: _f(phi, b * math.exp(-s)))
        return val if ok else math.inf
    val, _ = integrate.quad(lambda s: _f(phi, math.exp(s)), math.log(a), math.log(b), epsabs=1e-13, epsrel=1e-11)
    return val


def lambda_norm_average(phi, f: StepFunction) -> float:
    """Audit form int f* phi(t)/t dt; lambda_norm <= this <= C2 lambda_norm."""
    phi = _unwrap(phi)
    fs = rearrange(f)
    return math.fsum(
        float(v) * _phi_over_t(phi, float(a), float(b)) for a, b, v in zip(fs.lefts, fs.breakpoints, fs.values) if v
    )


# ------------------------------------------------------------ couple K-functionals


@dataclass(frozen=True)
class MinScaled(QcFunction):
    """u -> min(f0(u), t f1(u)); quasi-concave when both parts are."""

    f0: QcFunction
    f1: QcFunction
    t: float
    kind: str = field(default="min_scaled", init=False)

    def _values(self, u):
        return np.minimum(np.asarray(self.f0(u)), self.t * np.asarray(self.f1(u)))

    def to_dict(self):
        return {"kind": "min_scaled", "f0": self.f0.to_dict(), "f1": self.f1.to_dict(), "t": self.t}


def crossing_points(f0: QcFunction, f1: QcFunction, t: float, lo: float, hi: float, n: int = 64) -> list[float]:
    """Sign changes of f0 - t f1 on [lo, hi], refined by bisection to 1e-12 relative."""
    grid = np.exp(np.linspace(math.log(lo), math.log(hi), n))
    diff = np.asarray(f0(grid)) - t * np.asarray(f1(grid))
    out = []
    for i in range(n - 1):
        if diff[i] == 0.0:
            out.append(float(grid[i]))
        elif diff[i] * diff[i + 1] < 0:
            a, b = math.log(grid[i]), math.log(grid[i + 1])
            da = diff[i]
            while b - a > 1e-12 * max(1.0, abs(a)):
                mid = 0.5 * (a + b)
                dm = _f(f0, math.exp(mid)) - t * _f(f1, math.exp(mid))
                if (dm < 0) == (da < 0):
                    a, da = mid, dm
                else:
                    b = mid
            out.append(math.exp(0.5 * (a + b)))
    return out


def k_marcinkiewicz(psi0, psi1, t: float, f: StepFunction) -> float:
    """sup_u min(psi0(u), t psi1(u)) f*(u); the min is nondecreasing so pieces peak at their right end."""
    if not t > 0:
        raise DomainError("t must be positive")
    return m_norm(MinScaled(_unwrap(psi0), _unwrap(psi1), float(t)), f)


def k_lorentz(phi0, phi1, t: float, f: StepFunction) -> float:
    """int f* d[min(phi0, t phi1)] as an exact Stieltjes sum over the pieces of f*."""
    if not t > 0:
        raise DomainError("t must be positive")
    return lambda_norm(MinScaled(_unwrap(phi0), _unwrap(phi1), float(t)), f)


def k_lorentz_average(phi0, phi1, t: float, f: StepFunction) -> float:
    """int f* min(phi0, t phi1)(u) du/u with the crossing points used as quadrature breaks."""
    m = MinScaled(_unwrap(phi0), _unwrap(phi1), float(t))
    fs = rearrange(f)
    end = float(fs.breakpoints[-1])
    cuts = crossing_points(m.f0, m.f1, m.t, end * 1e-9, end)
    terms = []
    for a, b, v in zip(fs.lefts, fs.breakpoints, fs.values):
        a, b = float(a), float(b)
        if not v:
            continue
        inner = [c for c in cuts if a < c < b]
        edges = [a] + inner + [b]
        terms.extend(float(v) * _phi_over_t(m, lo, hi) for lo, hi in zip(edges[:-1], edges[1:]))
    return math.fsum(terms)


# --------------------------------------------------------------- embedding checks


@dataclass(frozen=True)
class EmbeddingReport:
    m_norm: float
    sup_weighted: float
    marcinkiewicz_ok: bool
    hl_lhs: float
    hl_rhs: float
    hardy_littlewood_ok: bool


def sup_weighted(psi, g: StepFunction) -> float:
    """sup_t psi(t)|g(t)|, attained at right piece ends since psi is nondecreasing."""
    psi = _unwrap(psi)
    return max((_f(psi, t) * float(v) for t, v in zip(g.breakpoints, g.values)), default=0.0)


def hardy_littlewood(phi, g: StepFunction) -> tuple[float, float]:
    """(int |g| h, int g* h) with h = phi(t)/t, which is nonincreasing."""
    phi = _unwrap(phi)
    gs = rearrange(g)

    def pair_sum(fn: StepFunction) -> float:
        return math.fsum(
            float(v) * _phi_over_t(phi, float(a), float(b)) for a, b, v in zip(fn.lefts, fn.breakpoints, fn.values) if v
        )

    return pair_sum(g), pair_sum(gs)


def embedding_checks(psi, phi, samples: Sequence[StepFunction], tol: float = 1e-12) -> list[EmbeddingReport]:
    out = []
    for g in samples:
        mn = m_norm(psi, g)
        sw = sup_weighted(psi, g)
        lhs, rhs = hardy_littlewood(phi, g)
        out.append(
            EmbeddingReport(
                m_norm=mn,
                sup_weighted=sw,
                marcinkiewicz_ok=mn <= sw * (1 + tol),
                hl_lhs=lhs,
                hl_rhs=rhs,
                hardy_littlewood_ok=lhs <= rhs * (1 + tol) + tol,
            )
        )
    return out


def add(a: StepFunction, b: StepFunction) -> StepFunction:
    return _sum_step(a, b)
