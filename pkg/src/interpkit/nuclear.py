"""Nuclear decompositions of couple operators and the two conversions with representations."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from interpkit.couples import CoupleOperator, WeightedCouple, k_surrogate, _lp_norm
from interpkit.errors import (
    DegenerateInputError,
    InfeasibleError,
    ParameterError,
    ShapeError,
    UnsupportedExponentError,
)
from interpkit.representations import Representation, gap_value, jk_gap
from interpkit.retract import block_index


def _conjugate(p: float) -> float:
    if p == 1.0:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


def dual_norm(c: WeightedCouple, side: int, l) -> float:
    """Norm of the functional a -> sum l_n a_n on l^p(w): the l^p'(1/w) norm of l."""
    l = c.check(l)
    return _lp_norm(l / c.weight(side), _conjugate(c.p))


@dataclass(frozen=True, eq=False)
class NuclearDecomposition:
    """Rank-one terms (l, b); the operator is a -> sum <l, a> b."""

    terms: tuple[tuple[np.ndarray, np.ndarray], ...]

    def __post_init__(self):
        kept = []
        for l, b in self.terms:
            l = np.asarray(l, dtype=float)
            b = np.asarray(b, dtype=float)
            if not (np.all(np.isfinite(l)) and np.all(np.isfinite(b))):
                raise ParameterError("decomposition entries must be finite")
            if np.any(b) and np.any(l):
                kept.append((l, b))
        shapes = {(l.shape, b.shape) for l, b in kept}
        if len(shapes) > 1:
            raise ShapeError("terms have inconsistent shapes")
        object.__setattr__(self, "terms", tuple(kept))

    def __len__(self) -> int:
        return len(self.terms)

    def matrix(self, n_source: int, n_target: int) -> np.ndarray:
        m = np.zeros((n_target, n_source))
        for l, b in self.terms:
            m += np.outer(b, l)
        return m

    def operator(self, source: WeightedCouple, target: WeightedCouple) -> CoupleOperator:
        return CoupleOperator(self.matrix(source.size, target.size), source, target)

    def apply(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=float)
        if not self.terms:
            raise ParameterError("empty decomposition has no fixed target size")
        return sum(float(l @ a) * b for l, b in self.terms)


def _term_products(l, b, source, target) -> tuple[float, float]:
    return (
        dual_norm(source, 0, l) * _lp_norm(target.w0 * b, target.p),
        dual_norm(source, 1, l) * _lp_norm(target.w1 * b, target.p),
    )


def nuclear_norm(d: NuclearDecomposition, source: WeightedCouple, target: WeightedCouple) -> float:
    """sum_n max_i ||l_n||_{X_i'} ||b_n||_{Y_i}."""
    return math.fsum(max(_term_products(l, b, source, target)) for l, b in d.terms)


def side_sums(d: NuclearDecomposition, source: WeightedCouple, target: WeightedCouple) -> tuple[float, float]:
    """Per-side nuclear sums; each is at most nuclear_norm."""
    prods = [_term_products(l, b, source, target) for l, b in d.terms]
    return math.fsum(p[0] for p in prods), math.fsum(p[1] for p in prods)


class DecompCertificate(NamedTuple):
    rep: Representation
    gap: float  # sum_k J(lam**k, y_k) / K(lam**k, x) on rep
    bound: float  # lam * nuclear_norm(d)
    term_blocks: tuple[int, ...]


def decomp_to_representation(
    d: NuclearDecomposition,
    x,
    lam: float,
    source: WeightedCouple,
    target: WeightedCouple,
) -> DecompCertificate:
    """Group the terms by the block of (||b||_0, ||b||_1); y_k = sum_{n in e_k} <l_n, x> b_n."""
    if not lam > 1:
        raise ParameterError("lambda must exceed 1")
    x = source.check(x)
    if not np.any(x):
        raise DegenerateInputError("x must be nonzero")
    lam = float(lam)
    parts: dict[int, np.ndarray] = {}
    blocks = []
    for l, b in d.terms:
        b0 = _lp_norm(target.w0 * b, target.p)
        b1 = _lp_norm(target.w1 * b, target.p)
        k = block_index(b0, b1, lam)
        blocks.append(k)
        contrib = float(l @ x) * b
        parts[k] = parts.get(k, np.zeros(target.size)) + contrib
    if parts:
        stack = np.vstack(list(parts.values()))
        y = np.array([math.fsum(col) for col in stack.T])
    else:
        y = np.zeros(target.size)
    rep = Representation(lam, parts, y, target)
    gap = gap_value(rep, source, x, target)
    return DecompCertificate(rep, gap, lam * nuclear_norm(d, source, target), tuple(blocks))


def term_inequality(l, b, k: int, lam: float, source, target) -> tuple[float, float]:
    """(J(lam**-k, l) J(lam**k, b), lam max_i ||l||_{X_i'} ||b||_{Y_i}); the first never exceeds the second."""
    jl = max(dual_norm(source, 0, l), lam ** (-k) * dual_norm(source, 1, l))
    jb = max(_lp_norm(target.w0 * b, target.p), lam**k * _lp_norm(target.w1 * b, target.p))
    return jl * jb, lam * max(_term_products(l, b, source, target))


def norming_index(source: WeightedCouple, t: float, x) -> int:
    """argmax_n min(w0_n, t w1_n)|x_n|, smallest index on ties."""
    vals = np.minimum(source.w0, t * source.w1) * np.abs(np.asarray(x, dtype=float))
    return int(np.argmax(vals))


def representation_to_decomp(rep: Representation, x, source: WeightedCouple, lam: float | None = None) -> NuclearDecomposition:
    """l_k = e_{n*}/x_{n*} with n* the surrogate-norming index at lam**k; terms (l_k, y_k)."""
    if not math.isinf(source.p):
        raise UnsupportedExponentError("the point-mass functionals need a p = inf source")
    lam = rep.lam if lam is None else float(lam)
    x = source.check(x)
    terms = []
    for k, yk in rep.parts.items():
        if not np.any(yk):
            continue
        t = lam**k
        if k_surrogate(source, t, x) == 0.0:
            raise InfeasibleError(f"surrogate K vanishes at k={k} while y_k != 0")
        n = norming_index(source, t, x)
        l = np.zeros(source.size)
        l[n] = 1.0 / x[n]
        terms.append((l, yk.copy()))
    return NuclearDecomposition(tuple(terms))


@dataclass(frozen=True)
class NuclearityReport:
    gap: float
    nu: float
    factor_gap_over_nu: float
    factor_nu_over_gap: float
    lam: float
    gap_ok: bool  # gap <= lam nu (1 + rtol)
    nu_ok: bool  # nu <= 2 gap (1 + rtol)

    def to_dict(self) -> dict:
        return {
            "gap": self.gap,
            "nu": self.nu,
            "factor_gap_over_nu": self.factor_gap_over_nu,
            "factor_nu_over_gap": self.factor_nu_over_gap,
        }


def _ratio(a: float, b: float) -> float:
    if a == 0.0:
        return 0.0
    return math.inf if b == 0.0 else a / b


def nuclearity_equivalence_test(
    source: WeightedCouple,
    target: WeightedCouple,
    x,
    y,
    lam: float,
    rtol: float = 1e-6,
) -> NuclearityReport:
    if not (math.isinf(source.p) and target.p == 1.0):
        raise UnsupportedExponentError("needs a p = inf source and a p = 1 target")
    cert = jk_gap(source, x, target, y, lam, method="lp")
    if cert.infinite:
        return NuclearityReport(math.inf, math.inf, 1.0, 1.0, float(lam), True, True)
    d = representation_to_decomp(cert.witness, x, source, lam)
    nu = nuclear_norm(d, source, target)
    gap = cert.value
    return NuclearityReport(
        gap=gap,
        nu=nu,
        factor_gap_over_nu=_ratio(gap, nu),
        factor_nu_over_gap=_ratio(nu, gap),
        lam=float(lam),
        gap_ok=gap <= lam * nu * (1 + rtol) + 1e-12,
        nu_ok=nu <= 2 * gap * (1 + rtol) + 1e-12,
    )


def separately_nuclear_example(eps: float = 0.01) -> tuple[NuclearDecomposition, WeightedCouple, WeightedCouple]:
    """Two terms whose side products are (1, eps) and (eps, 1).

    Each side sum is 1 + eps while the nuclear norm is 2.
    """
    source = WeightedCouple((0, 1), np.ones(2), np.ones(2), math.inf)
    target = WeightedCouple((0, 1), np.array([1.0, eps]), np.array([eps, 1.0]), 1)
    e = np.eye(2)
    return NuclearDecomposition(((e[0], e[0]), (e[1], e[1]))), source, target


def point_mass_decomposition(matrix) -> NuclearDecomposition:
    """Terms t_jk e_k (functional) with e_j (vector), one per nonzero entry."""
    m = np.asarray(matrix, dtype=float)
    rows, cols = m.shape
    terms = []
    for j in range(rows):
        for k in range(cols):
            if m[j, k] != 0.0:
                l = np.zeros(cols)
                l[k] = m[j, k]
                b = np.zeros(rows)
                b[j] = 1.0
                terms.append((l, b))
    return NuclearDecomposition(tuple(terms))
