"""Block partitions e_k of a weighted couple and the partial retract maps.

For a couple (l^p(w0), l^p(w1)) and lam > 1 the index set splits into

    e_k = {n : w0_n <= lam**k * w1_n < lam * w0_n},

and every element x factors through the lam-adic couple
(l^p, l^p(lam**-k)) via ``iota`` (norm <= 1) and ``pi`` (norm <= lam).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from interpkit.couples import CoupleOperator, WeightedCouple, weighted_opnorm
from interpkit.errors import DegenerateInputError, HypothesisViolation, ParameterError


@dataclass(frozen=True, eq=False)
class BlockPartition:
    lam: float
    phi: tuple[int, ...]  # block label of each position n
    blocks: dict[int, tuple[int, ...]]  # nonempty blocks only, positions ascending

    @property
    def k_min(self) -> int:
        return min(self.blocks) if self.blocks else 0

    @property
    def k_max(self) -> int:
        return max(self.blocks) if self.blocks else -1

    @property
    def labels(self) -> np.ndarray:
        """Contiguous block labels k_min..k_max (empty blocks included)."""
        return np.arange(self.k_min, self.k_max + 1, dtype=np.int64)

    def block(self, k: int) -> tuple[int, ...]:
        return self.blocks.get(int(k), ())

    def to_json(self, couple: WeightedCouple) -> dict[str, list[int]]:
        """{k: [index labels]} for the nonempty blocks."""
        return {str(k): [couple.labels[n] for n in ns] for k, ns in sorted(self.blocks.items())}


def _scaled(w1: float, lam: float, k: int) -> float:
    # divide by the positive power: integer powers of an integer lam stay exact
    return w1 * lam**k if k >= 0 else w1 / lam ** (-k)


TIE_RTOL = 1e-14


def block_index(w0: float, w1: float, lam: float) -> int:
    """The unique k with w0 <= lam**k w1 < lam w0.

    Ratios within TIE_RTOL of a block boundary count as on it, so weights
    that are rounded powers of lam land in their nominal block.
    """
    k = math.ceil(math.log(w0 / w1) / math.log(lam))
    seen = set()
    for _ in range(64):
        r = _scaled(w1, lam, k) / w0
        if r < 1.0 - TIE_RTOL:
            step = 1
        elif r >= lam * (1.0 - TIE_RTOL):
            step = -1
        else:
            return k
        if k + step in seen:
            return max(k, k + step)
        seen.add(k)
        k += step
    raise ParameterError(f"could not place w0={w0!r}, w1={w1!r} for lambda={lam!r}")


def partition(c: WeightedCouple, lam: float) -> BlockPartition:
    if not lam > 1:
        raise ParameterError("lambda must exceed 1")
    lam = float(lam)
    phi = tuple(block_index(float(a), float(b), lam) for a, b in zip(c.w0, c.w1))
    blocks: dict[int, list[int]] = {}
    for n, k in enumerate(phi):
        blocks.setdefault(k, []).append(n)
    return BlockPartition(lam, phi, {k: tuple(v) for k, v in sorted(blocks.items())})


def lambda_adic_for(part: BlockPartition, p: float, labels: Sequence[int] | None = None) -> WeightedCouple:
    """The lam-adic couple over the partition's block labels."""
    ks = part.labels if labels is None else np.asarray(labels, dtype=np.int64)
    return WeightedCouple(tuple(int(k) for k in ks), np.ones(ks.size), part.lam ** (-ks.astype(float)), p)


class IotaResult(NamedTuple):
    s: np.ndarray  # block norms, over part.labels
    labels: np.ndarray
    functionals: np.ndarray  # row k is alpha_k; alpha_k(x) = s_k


def _block_norm(v: np.ndarray, p: float) -> float:
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
    return top * math.fsum((a / top) ** p) ** (1.0 / p)


def iota(c: WeightedCouple, part: BlockPartition, x) -> IotaResult:
    """Block norms s_k of w0 x and norming functionals alpha_k.

    alpha_k is supported on e_k, satisfies alpha_k(x) = s_k and
    |alpha_k(b)| <= ||w0 b||_{l^p(e_k)}, so b -> {alpha_k(b)} has norm <= 1
    into the lam-adic couple.
    """
    x = c.check(x)
    labels = part.labels
    s = np.zeros(labels.size)
    alpha = np.zeros((labels.size, c.size))
    p = c.p
    for row, k in enumerate(labels):
        idx = np.array(part.block(int(k)), dtype=np.int64)
        if idx.size == 0:
            continue
        wx = c.w0[idx] * x[idx]
        sk = _block_norm(wx, p)
        s[row] = sk
        if sk == 0.0:
            continue
        if p == 1.0:
            alpha[row, idx] = c.w0[idx] * np.sign(x[idx])
        elif math.isinf(p):
            m = int(np.argmax(np.abs(wx)))
            alpha[row, idx[m]] = c.w0[idx[m]] * np.sign(x[idx[m]])
        else:
            # Hoelder equality case, normalised by s_k**(p-1)
            r = np.abs(wx) / sk
            alpha[row, idx] = c.w0[idx] * r ** (p - 1.0) * np.sign(x[idx])
    return IotaResult(s, labels, alpha)


def pi_matrix(c: WeightedCouple, part: BlockPartition, x) -> np.ndarray:
    """Matrix of a -> {a_{phi(n)} x_n / s_{phi(n)}} (positions x block labels)."""
    x = c.check(x)
    res = iota(c, part, x)
    labels = res.labels
    row_of = {int(k): r for r, k in enumerate(labels)}
    m = np.zeros((c.size, labels.size))
    for n, k in enumerate(part.phi):
        if x[n] == 0.0:
            continue
        sk = res.s[row_of[k]]
        if sk == 0.0:
            raise DegenerateInputError(f"block {k} has zero norm but x[{n}] != 0")
        m[n, row_of[k]] = x[n] / sk
    return m


def pi(c: WeightedCouple, part: BlockPartition, x, a) -> np.ndarray:
    """pi(a)_n = a_{phi(n)} x_n / s_{phi(n)}, with 0/0 read as 0."""
    a = np.asarray(a, dtype=float)
    m = pi_matrix(c, part, x)
    if a.shape != (m.shape[1],):
        raise ParameterError(f"a must have one entry per block label ({m.shape[1]})")
    return m @ a


def _probe_norm(m: np.ndarray, u: np.ndarray, v: np.ndarray, p: float, rng: np.random.Generator, n: int) -> float:
    """Lower estimate of ||m|| from l^p(u) to l^p(v) by random probing."""
    best = 0.0
    for _ in range(n):
        z = rng.standard_normal(m.shape[1])
        den = _block_norm(u * z, p)
        if den > 0:
            best = max(best, _block_norm(v * (m @ z), p) / den)
    return best


def side_norms(
    m: np.ndarray,
    source: WeightedCouple,
    target: WeightedCouple,
    probes: int = 2000,
    seed: int = 0,
) -> tuple[tuple[float, float], bool]:
    """Norms of m on both sides and whether they are exact.

    Exact for p in {1, 2, inf}; otherwise random probing, which can only
    under-estimate.
    """
    p = source.p
    if p in (1.0, 2.0) or math.isinf(p):
        out = tuple(weighted_opnorm(m, source.weight(i), target.weight(i), p, target.p).value for i in (0, 1))
        return out, True
    rng = np.random.default_rng(seed)
    out = tuple(_probe_norm(m, source.weight(i), target.weight(i), p, rng, probes) for i in (0, 1))
    return out, False


class RetractPair(NamedTuple):
    iota: CoupleOperator  # lam-adic -> c
    pi: CoupleOperator  # c -> lam-adic
    representatives: dict[int, int]


def retract_pair(c: WeightedCouple, part: BlockPartition, labels: Sequence[int] | None = None) -> RetractPair:
    """x-independent iota, pi with pi o iota = identity on the block labels.

    Uses the smallest position n(k) of each block: iota(a) = sum a_k e_{n(k)}/w0_{n(k)}
    and pi(x)_k = w0_{n(k)} x_{n(k)}.  Both have norm <= lam.
    """
    ks = [int(k) for k in (part.labels if labels is None else labels)]
    empty = [k for k in ks if not part.block(k)]
    if empty:
        raise HypothesisViolation(f"empty blocks in range: {empty}")
    reps = {k: part.block(k)[0] for k in ks}
    adic = lambda_adic_for(part, c.p, ks)
    im = np.zeros((c.size, len(ks)))
    pm = np.zeros((len(ks), c.size))
    for col, k in enumerate(ks):
        n = reps[k]
        im[n, col] = 1.0 / c.w0[n]
        pm[col, n] = c.w0[n]
    return RetractPair(CoupleOperator(im, adic, c), CoupleOperator(pm, c, adic), reps)
