"""Diagonal-sum machinery for l^inf -> l^1 couple operators and the rho-interpolation check.

Diagonals are indexed by m = j - k with j the target (row) label and k the
source (column) label.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from interpkit.couples import CoupleOperator, WeightedCouple, couple_opnorm, opnorm_inf_to_1, rho_norm
from interpkit.errors import HypothesisViolation, ParameterError, ShapeError, UnsupportedExponentError
from interpkit.nuclear import NuclearDecomposition, point_mass_decomposition
from interpkit.qcfun import QcFunction, SparseSequence, derived_weight, dilation


def scaled_matrix(T: CoupleOperator) -> np.ndarray:
    """a_jk = max(z0_j / w0_k, z1_j / w1_k) t_jk."""
    s, t = T.source, T.target
    factor = np.maximum(t.w0[:, None] / s.w0[None, :], t.w1[:, None] / s.w1[None, :])
    return factor * T.matrix


def diagonal_sums(a, row_labels: Sequence[int] | None = None, col_labels: Sequence[int] | None = None) -> dict[int, float]:
    """m -> sum over j - k = m of |a_jk|, for every m realized by the labels."""
    a = np.asarray(a, dtype=float)
    rows = np.arange(a.shape[0]) if row_labels is None else np.asarray(row_labels, dtype=np.int64)
    cols = np.arange(a.shape[1]) if col_labels is None else np.asarray(col_labels, dtype=np.int64)
    if a.shape != (rows.size, cols.size):
        raise ShapeError("labels do not match the matrix")
    m = rows[:, None] - cols[None, :]
    out: dict[int, list[float]] = {}
    for key, val in zip(m.ravel(), np.abs(a).ravel()):
        out.setdefault(int(key), []).append(float(val))
    return {key: math.fsum(v) for key, v in sorted(out.items())}


@dataclass(frozen=True)
class EpsilonProfile:
    values: dict[int, float]
    sum: float = field(init=False)
    convergent: bool = field(init=False)

    def __post_init__(self):
        total = math.fsum(self.values.values())
        object.__setattr__(self, "sum", total)
        object.__setattr__(self, "convergent", math.isfinite(total))

    def __getitem__(self, m: int) -> float:
        return self.values[m]


def _tight(pairs: np.ndarray, m: np.ndarray) -> EpsilonProfile:
    vals: dict[int, float] = {}
    for key, v in zip(m.ravel(), pairs.ravel()):
        k = int(key)
        vals[k] = max(vals.get(k, 0.0), float(v))
    return EpsilonProfile(dict(sorted(vals.items())))


def epsilon_profile(source: WeightedCouple, target: WeightedCouple) -> EpsilonProfile:
    """eps_m = max over j - k = m of min(w0_k / z0_j, w1_k / z1_j)."""
    pairs = np.minimum(source.w0[None, :] / target.w0[:, None], source.w1[None, :] / target.w1[:, None])
    m = np.asarray(target.labels)[:, None] - np.asarray(source.labels)[None, :]
    return _tight(pairs, m)


def epsilon_profile_rho(
    tau,
    sigma,
    rho: QcFunction,
    lam_fn: QcFunction | None = None,
    source_labels: Sequence[int] | None = None,
    target_labels: Sequence[int] | None = None,
) -> EpsilonProfile:
    """eps_m = max over j - k = m of min(1, sigma_j / tau_k) rho(tau_k) / lam_fn(sigma_j).

    ``lam_fn`` defaults to ``rho``.
    """
    tau = np.asarray(tau, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    lam_fn = rho if lam_fn is None else lam_fn
    ks = np.arange(tau.size) if source_labels is None else np.asarray(source_labels)
    js = np.arange(sigma.size) if target_labels is None else np.asarray(target_labels)
    pairs = (
        np.minimum(1.0, sigma[:, None] / tau[None, :])
        * np.asarray(rho(tau), dtype=float)[None, :]
        / np.asarray(lam_fn(sigma), dtype=float)[:, None]
    )
    return _tight(pairs, js[:, None] - ks[None, :])


def dilation_profile(rho: QcFunction, lam: float, m_range: Sequence[int], grid) -> EpsilonProfile:
    """Upper profile min(1, lam**m) s_rho(lam**-m) from the dilation function.

    Dominates the tight profile of any pair tau, sigma with sigma_j / tau_k = lam**(j-k).
    """
    vals = {int(m): min(1.0, lam**m) * dilation(rho, lam ** (-m), grid) for m in m_range}
    return EpsilonProfile(vals)


def condition_1prime(c: WeightedCouple) -> bool:
    """min(w0_k, w1_k) nonincreasing as |k| grows away from the argmax."""
    v = np.minimum(c.w0, c.w1)
    top = int(np.argmax(v))
    left = v[: top + 1]
    right = v[top:]
    return bool(np.all(np.diff(left) >= 0) and np.all(np.diff(right) <= 0))


@dataclass(frozen=True)
class Lemma1Bound:
    bound: float  # C * eps.sum with C the couple norm of T
    certified: float  # ||a||_{inf->1} * eps.sum, with a the scaled matrix
    diagonal: float  # sum_m eps_m * (diagonal sum of a at m)
    absolute_sum: float  # sum |t_jk| after the rho scaling; dominates the rho norm
    decomposition: NuclearDecomposition
    exact: bool


def lemma1_bound(T: CoupleOperator, profile: EpsilonProfile, rho: QcFunction | None = None) -> Lemma1Bound:
    """Bounds for the weighted l^inf -> l^1 norm from the eps profile.

    ``bound`` uses the couple norm of T; ``certified`` uses the exact inf->1
    norm of the scaled matrix and holds unconditionally; ``diagonal`` is the
    sharpest of the three.  With ``rho`` the point-mass decomposition is of
    T between the rho-weighted spaces; its nuclear norm is ``absolute_sum``.
    """
    if not profile.convergent:
        inf = math.inf
        return Lemma1Bound(inf, inf, inf, inf, NuclearDecomposition(()), False)
    base = couple_opnorm(T)
    a = scaled_matrix(T)
    a_norm = opnorm_inf_to_1(a, np.ones(a.shape[1]), np.ones(a.shape[0]))
    diag = diagonal_sums(a, T.target.labels, T.source.labels)
    sharp = math.fsum(profile.values.get(m, math.inf) * d for m, d in diag.items() if d > 0)
    if rho is None:
        rho_matrix = T.matrix
    else:
        u = derived_weight(rho, T.source.w0, T.source.w1)
        v = derived_weight(rho, T.target.w0, T.target.w1)
        rho_matrix = v[:, None] * T.matrix / u[None, :]
    return Lemma1Bound(
        bound=base.value * profile.sum,
        certified=a_norm.value * profile.sum,
        diagonal=sharp,
        absolute_sum=math.fsum(np.abs(rho_matrix).ravel()),
        decomposition=point_mass_decomposition(rho_matrix),
        exact=base.exact and a_norm.exact,
    )


@dataclass(frozen=True)
class OvchReport:
    C_base: float
    C_rho: float
    ratio: float
    bound: float
    certified: float
    eps_sum: float
    exact: bool
    passed: bool
    tolerance: float

    def row(self) -> dict:
        return {
            "C_base": self.C_base,
            "C_rho": self.C_rho,
            "ratio": self.ratio,
            "bound": self.bound,
            "pass": self.passed,
            "certified": self.certified,
            "exact": self.exact,
            "tolerance": self.tolerance,
        }


def verify_ovchinnikov(T: CoupleOperator, rho: QcFunction, cap: int | None = None, tol: float = 1e-9) -> OvchReport:
    """Exact rho-weighted norm of T against the diagonal bound.

    tau = w0/w1 on the source and sigma = z0/z1 on the target; the profile is
    the tight one for (tau, sigma, rho).
    """
    if not (math.isinf(T.source.p) and T.target.p == 1.0):
        raise UnsupportedExponentError("needs a p = inf source and a p = 1 target")
    base = couple_opnorm(T, cap)
    u = derived_weight(rho, T.source.w0, T.source.w1)
    v = derived_weight(rho, T.target.w0, T.target.w1)
    c_rho = opnorm_inf_to_1(T.matrix, u, v, cap)
    prof = epsilon_profile_rho(T.source.tau, T.target.tau, rho, None, T.source.labels, T.target.labels)
    lb = lemma1_bound(T, prof, rho)
    ratio = 0.0 if c_rho.value == 0.0 else (math.inf if base.value == 0.0 else c_rho.value / base.value)
    return OvchReport(
        C_base=base.value,
        C_rho=c_rho.value,
        ratio=ratio,
        bound=lb.bound,
        certified=lb.certified,
        eps_sum=prof.sum,
        exact=base.exact and c_rho.exact,
        passed=c_rho.value <= lb.bound + tol,
        tolerance=tol,
    )


@dataclass(frozen=True, eq=False)
class GridIota:
    a: np.ndarray  # x(tau_k)
    matrix: np.ndarray  # grid points x block labels
    inside: np.ndarray  # grid points within [tau_min, tau_max]

    def apply(self, b) -> np.ndarray:
        return self.matrix @ np.asarray(b, dtype=float)

    def side_norms(self, t_grid, tau) -> tuple[float, float]:
        """Exact norms from (l^inf, l^inf(1/tau)) into (l^inf, l^inf(1/t)) on the grid."""
        t = np.asarray(t_grid, dtype=float)
        tau = np.asarray(tau, dtype=float)
        absm = np.abs(self.matrix)
        n0 = float(absm.sum(axis=1).max(initial=0.0))
        n1 = float(((absm * tau[None, :]).sum(axis=1) / t).max(initial=0.0))
        return n0, n1


def _tau_values(tau) -> np.ndarray:
    return np.asarray(tau.tau if isinstance(tau, SparseSequence) else tau, dtype=float)


def lemma2_grid_iota(t_grid, x_values, tau) -> GridIota:
    """Piecewise-linear prolongation b -> (iota b)(t) on a grid, and a = x(tau_k).

    Between consecutive tau the map interpolates linearly; below tau_min it
    is (t / tau_min) b_min and above tau_max it is b_max, so both side norms
    stay at most 1 on the whole grid.
    """
    t = np.asarray(t_grid, dtype=float)
    x = np.asarray(x_values, dtype=float)
    tv = _tau_values(tau)
    if t.shape != x.shape or t.ndim != 1:
        raise ShapeError("grid and values must be 1-d of equal length")
    if tv.size == 0 or np.any(np.diff(tv) <= 0) or np.any(tv <= 0):
        raise ParameterError("tau must be positive and strictly increasing")
    if np.any(np.diff(t) <= 0) or np.any(t <= 0):
        raise ParameterError("grid must be positive and strictly increasing")
    a = np.interp(tv, t, x)
    m = np.zeros((t.size, tv.size))
    for i, ti in enumerate(t):
        if ti <= tv[0]:
            m[i, 0] = ti / tv[0]
        elif ti >= tv[-1]:
            m[i, -1] = 1.0
        else:
            k = int(np.searchsorted(tv, ti, side="right")) - 1
            theta = (ti - tv[k]) / (tv[k + 1] - tv[k])
            m[i, k] = 1.0 - theta
            m[i, k + 1] = theta
    inside = (t >= tv[0]) & (t <= tv[-1])
    return GridIota(a, m, inside)


def k_tilde_grid(t: float, points, values) -> float:
    """sup_s min(1, t/s)|x(s)| over sample points."""
    s = np.asarray(points, dtype=float)
    return float(np.max(np.minimum(1.0, t / s) * np.abs(np.asarray(values, dtype=float))))


@dataclass(frozen=True, eq=False)
class Lemma3Result:
    b: np.ndarray  # over tau labels
    matrix: np.ndarray  # tau labels x atoms
    partition: dict[int, tuple[int, ...]]  # tau label -> atom positions
    atom_values: np.ndarray  # certified per-atom value (<= C)
    labels: np.ndarray


def lemma3_pi(target: WeightedCouple, y, tau: SparseSequence, rho: QcFunction, C: float = 2.0) -> Lemma3Result:
    """Partition the atoms by argmin_k max(1, sigma_n/tau_k) rho(tau_k)/rho(sigma_n) and project.

    pi v_k = rho(tau_k) sum_{n in H_k} z0_n / rho(sigma_n) sgn(y_n) v_n, b = pi y.
    Both side norms of pi are at most C, and sum |b_k| / rho(tau_k) equals the
    rho-derived l^1 norm of y.
    """
    if target.p != 1.0:
        raise UnsupportedExponentError("the target couple must have p = 1")
    y = target.check(y)
    tv = _tau_values(tau)
    labels = np.asarray(tau.k if isinstance(tau, SparseSequence) else np.arange(tv.size))
    sigma = target.tau
    r_tau = np.asarray(rho(tv), dtype=float)
    r_sig = np.asarray(rho(sigma), dtype=float)
    vals = np.maximum(1.0, sigma[:, None] / tv[None, :]) * r_tau[None, :] / r_sig[:, None]
    choice = np.argmin(vals, axis=1)
    best = vals[np.arange(sigma.size), choice]
    for n, v in enumerate(best):
        if v > C:
            raise HypothesisViolation(
                f"coverage fails at atom {target.labels[n]} (sigma={sigma[n]!r}): value {v!r} > {C!r}"
            )
    m = np.zeros((tv.size, target.size))
    part: dict[int, list[int]] = {}
    for n, k in enumerate(choice):
        part.setdefault(int(labels[k]), []).append(n)
        m[k, n] = r_tau[k] * target.w0[n] / r_sig[n] * np.sign(y[n])
    b = np.array([math.fsum(m[k] * y) for k in range(tv.size)])
    return Lemma3Result(b, m, {k: tuple(v) for k, v in sorted(part.items())}, best, labels)


def lemma3_conservation(res: Lemma3Result, target: WeightedCouple, y, tau, rho: QcFunction) -> tuple[float, float]:
    """(sum |b_k| / rho(tau_k), rho_norm(y)); equal up to rounding."""
    r_tau = np.asarray(rho(_tau_values(tau)), dtype=float)
    return math.fsum(np.abs(res.b) / r_tau), rho_norm(target, rho, y)


def lemma3_side_norms(res: Lemma3Result, target: WeightedCouple, tau) -> tuple[float, float]:
    """Exact norms of pi: (l^1(z0), l^1(z1)) -> (l^1, l^1(1/tau)) as largest column sums."""
    tv = _tau_values(tau)
    absm = np.abs(res.matrix)
    n0 = float((absm.sum(axis=0) / target.w0).max(initial=0.0))
    n1 = float(((absm / tv[:, None]).sum(axis=0) / target.w1).max(initial=0.0))
    return n0, n1
