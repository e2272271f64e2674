"""Quasi-concave parameter functions and the sparse sequence construction.

A parameter function ``rho`` is positive on (0, inf), nondecreasing, and has
``rho(t)/t`` nonincreasing.  These conditions are enforced on evaluation
grids (see :meth:`QcFunction.check_grid`), not symbolically.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from interpkit.errors import (
    DomainError,
    ParameterError,
    RangeAssumptionViolated,
    ShapeError,
)

# natural-log window searched by sparse_tau before declaring the range exhausted
_LOG_REACH = 690.0
_BISECT_RTOL = 1e-12


class QcFunction:
    """Base class for catalog members.  Subclasses implement ``_values``."""

    kind: str = ""

    def _values(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, t):
        arr = np.asarray(t, dtype=float)
        if np.any(~(arr > 0)):
            raise DomainError(f"{self.kind} is only defined for t > 0")
        out = self._values(arr)
        return float(out) if out.ndim == 0 else out

    def conjugate(self, t):
        """The conjugate function t / rho(t)."""
        return np.asarray(t, dtype=float) / self(t)

    def check_grid(self, grid: Sequence[float], rtol: float = 1e-12) -> bool:
        """Positivity, monotonicity and quasi-concavity on a sorted grid."""
        g = np.sort(np.asarray(grid, dtype=float))
        v = np.asarray(self(g), dtype=float)
        if np.any(v <= 0) or not np.all(np.isfinite(v)):
            return False
        up = np.all(v[1:] >= v[:-1] * (1 - rtol))
        ratio = v / g
        down = np.all(ratio[1:] <= ratio[:-1] * (1 + rtol))
        return bool(up and down)

    def to_dict(self) -> dict[str, Any]:
        raise NotImplementedError

    @staticmethod
    def from_dict(spec: dict[str, Any]) -> "QcFunction":
        return from_spec(spec)


@dataclass(frozen=True)
class PowerLaw(QcFunction):
    theta: float
    kind: str = field(default="power", init=False)

    def __post_init__(self):
        if not 0.0 <= self.theta <= 1.0:
            raise ParameterError("power-law exponent must lie in [0, 1]")

    def _values(self, t):
        return np.power(t, self.theta)

    def to_dict(self):
        return {"kind": "power", "theta": self.theta}


@dataclass(frozen=True)
class PowerLog(QcFunction):
    """t**theta * (1 + |log t|)**beta.

    Quasi-concave whenever |beta| <= min(theta, 1 - theta): the logarithmic
    derivative is theta + beta*sign(log t)/(1 + |log t|).
    """

    theta: float
    beta: float
    kind: str = field(default="powerlog", init=False)

    def __post_init__(self):
        if not 0.0 < self.theta < 1.0:
            raise ParameterError("powerlog exponent must lie in (0, 1)")
        if abs(self.beta) > min(self.theta, 1.0 - self.theta):
            raise ParameterError("|beta| must not exceed min(theta, 1 - theta)")

    def _values(self, t):
        return np.power(t, self.theta) * np.power(1.0 + np.abs(np.log(t)), self.beta)

    def to_dict(self):
        return {"kind": "powerlog", "theta": self.theta, "beta": self.beta}


@dataclass(frozen=True)
class MinAffine(QcFunction):
    """t -> max_i min(c_i, t * d_i); the least quasi-concave majorant of its pairs."""

    pairs: tuple[tuple[float, float], ...]
    kind: str = field(default="min_affine", init=False)

    def __post_init__(self):
        pairs = tuple((float(c), float(d)) for c, d in self.pairs)
        if not pairs or any(not (c > 0 and d > 0) for c, d in pairs):
            raise ParameterError("min_affine needs at least one pair with c, d > 0")
        object.__setattr__(self, "pairs", pairs)

    def _values(self, t):
        c = np.array([p[0] for p in self.pairs])
        d = np.array([p[1] for p in self.pairs])
        flat = t.reshape(-1, 1)
        return np.minimum(c, flat * d).max(axis=1).reshape(t.shape)

    def to_dict(self):
        return {"kind": "min_affine", "pairs": [list(p) for p in self.pairs]}


@dataclass(frozen=True)
class ConcaveMajorant(QcFunction):
    """Least positive concave majorant of finitely many samples (t_i, y_i).

    The hull is anchored at the origin and continued flat after the largest
    sample value, which keeps it nondecreasing on the whole half-line.
    """

    points: tuple[tuple[float, float], ...]
    kind: str = field(default="majorant", init=False)
    _knots: tuple[np.ndarray, np.ndarray] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pts = sorted((float(t), float(y)) for t, y in self.points)
        if not pts or any(not (t > 0 and y > 0) for t, y in pts):
            raise ParameterError("majorant samples need t > 0 and y > 0")
        object.__setattr__(self, "points", tuple(pts))
        ymax = max(y for _, y in pts)
        cut = next(i for i, (_, y) in enumerate(pts) if y == ymax)
        hull: list[tuple[float, float]] = [(0.0, 0.0)]
        for p in pts[: cut + 1]:
            while len(hull) >= 2:
                (x1, y1), (x2, y2) = hull[-2], hull[-1]
                # drop the middle point when it lies on or below the chord
                if (x2 - x1) * (p[1] - y1) - (y2 - y1) * (p[0] - x1) >= 0:
                    hull.pop()
                else:
                    break
            hull.append(p)
        xs = np.array([h[0] for h in hull])
        ys = np.array([h[1] for h in hull])
        object.__setattr__(self, "_knots", (xs, ys))

    def _values(self, t):
        xs, ys = self._knots
        return np.interp(t, xs, ys)

    def to_dict(self):
        return {"kind": "majorant", "points": [list(p) for p in self.points]}


def from_spec(spec: dict[str, Any]) -> QcFunction:
    """Build a catalog function from its tagged JSON record."""
    kind = spec.get("kind")
    if kind == "power":
        return PowerLaw(float(spec["theta"]))
    if kind == "powerlog":
        return PowerLog(float(spec["theta"]), float(spec["beta"]))
    if kind == "min_affine":
        return MinAffine(tuple(tuple(p) for p in spec["pairs"]))
    if kind == "majorant":
        return ConcaveMajorant(tuple(tuple(p) for p in spec["points"]))
    raise ParameterError(f"unknown rho kind {kind!r}")


def eval(rho: QcFunction, t: float) -> float:  # noqa: A001 - mirrors the documented op name
    if not t > 0:
        raise DomainError("t must be positive")
    return float(rho(t))


def dilation(rho: QcFunction, t: float, grid: Sequence[float]) -> float:
    """sup over u in grid of rho(t u) / rho(u); exact t**theta for power laws."""
    if not t > 0:
        raise DomainError("t must be positive")
    if isinstance(rho, PowerLaw):
        return float(t**rho.theta)
    u = np.asarray(grid, dtype=float)
    if u.size == 0:
        raise ParameterError("dilation grid is empty")
    return float(np.max(rho(t * u) / rho(u)))


def log_grid(lo: float, hi: float, n: int) -> np.ndarray:
    return np.exp(np.linspace(math.log(lo), math.log(hi), n))


def dilation_exponents(rho: QcFunction, grid: Sequence[float], probe: float | None = None) -> tuple[float, float]:
    """Estimated (index at 0, index at infinity) of the dilation function.

    Uses log s(t) / log t at t = 1/probe and t = probe.  The default probe is
    the fourth root of the grid span, which leaves room for the sup over u.
    For t**theta both values equal theta.
    """
    g = np.asarray(grid, dtype=float)
    if probe is None:
        probe = float(g.max() / g.min()) ** 0.25
    if not probe > 1:
        raise ParameterError("probe must exceed 1")
    lo = math.log(dilation(rho, 1.0 / probe, g)) / math.log(1.0 / probe)
    hi = math.log(dilation(rho, probe, g)) / math.log(probe)
    return lo, hi


def in_p_plus_minus(rho: QcFunction, grid: Sequence[float], margin: float = 1e-3, probe: float | None = None) -> bool:
    """Grid decision: both dilation exponents strictly inside (0, 1).

    This is an approximation of an asymptotic property; the answer depends on
    the grid and probe size.
    """
    lo, hi = dilation_exponents(rho, grid, probe)
    return lo > margin and hi < 1.0 - margin


def derived_weight(rho: QcFunction, w0: Sequence[float], w1: Sequence[float]) -> np.ndarray:
    """The weight n -> w0_n / rho(w0_n / w1_n)."""
    w0 = np.asarray(w0, dtype=float)
    w1 = np.asarray(w1, dtype=float)
    if w0.shape != w1.shape:
        raise ShapeError("weight vectors differ in length")
    if np.any(w0 <= 0) or np.any(w1 <= 0):
        raise DomainError("weights must be positive")
    if isinstance(rho, PowerLaw) and rho.theta == 0.0:
        return w0.copy()
    return w0 / np.asarray(rho(w0 / w1), dtype=float)


@dataclass(frozen=True)
class SparseSequence:
    k: np.ndarray
    tau: np.ndarray
    source: QcFunction
    ratio_constant: float = 2.0
    truncated_low: bool = False
    truncated_high: bool = False

    @property
    def truncated(self) -> bool:
        return self.truncated_low or self.truncated_high

    def rho_tau(self) -> np.ndarray:
        return np.asarray(self.source(self.tau), dtype=float)

    def separation(self) -> float:
        """max over pairs of 2**|j-k| * min(1, tau_j/tau_k) rho(tau_k)/rho(tau_j).

        At most 1 (up to rounding) for a valid sequence.
        """
        r = self.rho_tau()
        tj = self.tau[:, None]
        tk = self.tau[None, :]
        val = np.minimum(1.0, tj / tk) * r[None, :] / r[:, None]
        gap = np.abs(self.k[:, None] - self.k[None, :]).astype(float)
        return float(np.max(val * np.power(2.0, gap)))

    def separation_excess(self) -> float:
        """max over pairs of min(1, tau_j/tau_k) rho(tau_k)/rho(tau_j) - 2**-|j-k|."""
        r = self.rho_tau()
        val = np.minimum(1.0, self.tau[:, None] / self.tau[None, :]) * r[None, :] / r[:, None]
        gap = np.abs(self.k[:, None] - self.k[None, :]).astype(float)
        return float(np.max(val - np.power(2.0, -gap)))

    def step_ratios(self) -> np.ndarray:
        """min(rho ratio, conjugate ratio) for each consecutive pair; all ~2."""
        r = self.rho_tau()
        c = self.tau / r
        return np.minimum(r[1:] / r[:-1], c[1:] / c[:-1])

    def cover_constant(self, t: Sequence[float]) -> float:
        """max over t of rho(t) / sup_k min(1, t/tau_k) rho(tau_k); at most 2 inside the span."""
        t = np.asarray(t, dtype=float)
        r = self.rho_tau()
        env = np.max(np.minimum(1.0, t[:, None] / self.tau[None, :]) * r[None, :], axis=1)
        return float(np.max(np.asarray(self.source(t)) / env))

    def to_csv(self, target: str | Path | io.TextIOBase | None = None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "tau_k", "rho_tau_k"])
        for k, t, r in zip(self.k, self.tau, self.rho_tau()):
            w.writerow([int(k), repr(float(t)), repr(float(r))])
        text = buf.getvalue()
        if isinstance(target, (str, Path)):
            Path(target).write_text(text)
        elif target is not None:
            target.write(text)
        return text


def _step(rho: QcFunction, tau: float, direction: int) -> float | None:
    """Next point in the given direction at which min(rho ratio, conjugate ratio) hits 2.

    Returns None when the ratio stays below 2 across the whole search window.
    """
    base = math.log(tau)
    r0 = float(rho(tau))
    c0 = tau / r0

    def ratio(logs: float) -> float:
        s = math.exp(logs)
        r = float(rho(s))
        c = s / r
        if direction > 0:
            return min(r / r0, c / c0)
        return min(r0 / r, c0 / c)

    # exponential search for a bracket [near, far] with ratio(far) >= 2
    near, step = 0.0, 0.5
    far = None
    while step <= _LOG_REACH:
        if abs(base + direction * step) > _LOG_REACH:
            break
        if ratio(base + direction * step) >= 2.0:
            far = step
            break
        near = step
        step *= 2.0
    if far is None:
        return None
    while far - near > _BISECT_RTOL * max(1.0, abs(base) + far):
        mid = 0.5 * (near + far)
        if ratio(base + direction * mid) >= 2.0:
            far = mid
        else:
            near = mid
    return math.exp(base + direction * far)


def sparse_tau(rho: QcFunction, k_min: int, k_max: int, truncate: bool = False) -> SparseSequence:
    """Increasing sequence with tau_0 = 1 and consecutive min-ratio 2.

    Each step solves min(rho(s)/rho(tau), (s/rho(s))/(tau/rho(tau))) = 2 by
    bisection on log s; the returned endpoint always has ratio >= 2, so the
    separation bound 2**-|j-k| holds without rounding slack.

    With ``truncate`` a side whose range runs out is cut short and flagged
    instead of raising.
    """
    if k_min > 0 or k_max < 0:
        raise ParameterError("the label range must contain k = 0")
    probe = np.exp(np.array([-40.0, 0.0, 40.0]))
    rv = np.asarray(rho(probe))
    cv = probe / rv
    if np.ptp(rv) <= 1e-12 * rv.max() or np.ptp(cv) <= 1e-12 * cv.max():
        raise RangeAssumptionViolated("rho or t/rho(t) is constant on the probe grid")

    taus = {0: 1.0}
    trunc = {1: False, -1: False}
    for direction, stop in ((1, k_max), (-1, k_min)):
        k, cur = 0, 1.0
        while k != stop:
            nxt = _step(rho, cur, direction)
            if nxt is None:
                if not truncate:
                    raise RangeAssumptionViolated(
                        f"range exhausted after tau_{k} = {cur!r} going {'up' if direction > 0 else 'down'}"
                    )
                trunc[direction] = True
                break
            k += direction
            cur = nxt
            taus[k] = cur
    ks = np.array(sorted(taus), dtype=np.int64)
    return SparseSequence(
        k=ks,
        tau=np.array([taus[int(k)] for k in ks]),
        source=rho,
        truncated_low=trunc[-1],
        truncated_high=trunc[1],
    )
