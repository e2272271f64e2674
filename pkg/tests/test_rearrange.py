from __future__ import annotations

import itertools
import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from interpkit.errors import DomainError, ParameterError, ShapeError
from interpkit.qcfun import MinAffine, PowerLaw, PowerLog, log_grid
from interpkit.rearrange import (
    ConcaveWeight,
    StepFunction,
    add,
    check_phi,
    check_psi,
    embedding_checks,
    hardy_littlewood,
    k_lorentz,
    k_lorentz_average,
    k_marcinkiewicz,
    lambda_norm,
    lambda_norm_average,
    m_norm,
    m_norm_average,
    rearrange,
)

SQRT = PowerLaw(0.5)
GRID = log_grid(1e-3, 1e3, 13)

pieces = st.lists(
    st.tuples(st.fractions(F(1, 8), 4, max_denominator=8), st.fractions(0, 10, max_denominator=8)),
    min_size=1,
    max_size=6,
)


def chi(a):
    return StepFunction((a,), (1,))


class TestStep:
    def test_validation(self):
        with pytest.raises(ShapeError):
            StepFunction((1, 2), (1,))
        with pytest.raises(ParameterError):
            StepFunction((2, 1), (1, 1))
        with pytest.raises(DomainError):
            StepFunction((1,), (-1,))
        with pytest.raises(DomainError):
            chi(1)(0)

    def test_eval_and_csv(self):
        f = StepFunction.from_pieces([(F(1, 2), 3), (F(1, 2), F(1, 3))])
        assert f(F(1, 4)) == 3 and f(1) == F(1, 3) and f(5) == 0
        assert StepFunction.from_csv(f.to_csv()) == f
        g = StepFunction((0.5, 2.0), (1.5, 0.25))
        assert StepFunction.from_csv(g.to_csv()) == g

    def test_add(self):
        s = add(chi(1), StepFunction((2,), (2,)))
        assert s.breakpoints == (1, 2) and s.values == (3, 2)


class TestRearrange:
    def test_example(self):
        f = StepFunction.from_pieces([(1, 3), (1, 1), (1, 2)])
        assert rearrange(f).pieces() == [(1, 3), (1, 2), (1, 1)]

    @given(pieces)
    def test_idempotent_and_equimeasurable(self, ps):
        f = StepFunction.from_pieces(ps)
        fs = rearrange(f)
        assert rearrange(fs) == fs
        assert all(a >= b for a, b in zip(fs.values, fs.values[1:]))
        for s in set(v for _, v in ps) | {0}:
            assert fs.level_measure(s) == f.level_measure(s)

    def test_zero(self):
        assert rearrange(StepFunction((1,), (0,))).values == (0,)


class TestAdmissibility:
    def test_closed_forms(self):
        assert check_psi(SQRT, GRID).constant == pytest.approx(2, abs=1e-8)
        assert not check_psi(PowerLaw(1.0), GRID).ok
        assert check_psi(PowerLaw(0.0), GRID).constant == 1
        assert check_phi(SQRT, GRID).constant == pytest.approx(2, abs=1e-8)
        assert not check_phi(PowerLaw(0.0), GRID).ok
        assert check_phi(PowerLaw(1.0), GRID).constant == 1

    @pytest.mark.parametrize("theta", [0.3, 0.5, 0.8])
    def test_numeric_path_matches_closed_form(self, theta):
        # a single-pair MinAffine equal to t**theta is not available; use a PowerLog with beta = 0
        fn = PowerLog(theta, 0.0)
        assert check_psi(fn, GRID).constant == pytest.approx(1 / (1 - theta), rel=1e-8)
        assert check_phi(fn, GRID).constant == pytest.approx(1 / theta, rel=1e-8)

    def test_numeric_failures(self):
        fn = MinAffine(((1.0, 1.0),))  # min(1, t): linear at 0, constant at infinity
        assert not check_psi(fn, GRID).ok
        # int_0^t min(1, u) du/u = 1 + log t beyond 1: finite on a grid, growing with its end
        res = check_phi(fn, GRID)
        assert res.constant == pytest.approx(1 + math.log(GRID[-1]), rel=1e-8)
        assert res.worst_t == pytest.approx(GRID[-1])

    def test_concave_weight(self):
        w = ConcaveWeight.make(SQRT, "psi", GRID)
        assert w.constant == pytest.approx(2) and w.concave_on(GRID)
        with pytest.raises(ParameterError):
            ConcaveWeight.make(SQRT, "other", GRID)


class TestNorms:
    def test_examples(self):
        assert m_norm(SQRT, chi(1)) == 1
        assert lambda_norm(SQRT, chi(1)) == 1
        assert m_norm(SQRT, StepFunction((4,), (2,))) == 4

    def test_k_examples(self):
        assert k_marcinkiewicz(SQRT, SQRT, 1, chi(1)) == 1
        assert k_marcinkiewicz(SQRT, PowerLaw(0.0), 2, chi(4)) == 2

    def test_k_lorentz_saturates(self):
        f = StepFunction.from_pieces([(1, 3), (2, 1), (4, 0.5)])
        vals = [k_lorentz(SQRT, PowerLaw(0.0), t, f) for t in (0.1, 1, 10, 100, 1e4)]
        assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))
        assert vals[-1] == pytest.approx(lambda_norm(SQRT, f))

    @given(pieces)
    def test_permutation_invariance_exact(self, ps):
        widths = {w for w, _ in ps}
        ps = [(F(1, 2), v) for _, v in ps]  # equal widths
        base = StepFunction.from_pieces(ps)
        for perm in itertools.islice(itertools.permutations(ps), 24):
            g = StepFunction.from_pieces(list(perm))
            assert rearrange(g) == rearrange(base)
            assert m_norm(SQRT, g) == m_norm(SQRT, base)
            assert lambda_norm(SQRT, g) == lambda_norm(SQRT, base)
        assert widths

    @pytest.mark.parametrize("seed", range(8))
    def test_average_forms_sandwich(self, seed):
        rng = np.random.default_rng(seed)
        f = StepFunction.from_pieces(list(zip(rng.uniform(0.1, 2, 5), rng.uniform(0, 3, 5))))
        m, ma = m_norm(SQRT, f), m_norm_average(SQRT, f)
        assert m <= ma * (1 + 1e-12) and ma <= 2 * m * (1 + 1e-12)
        l, la = lambda_norm(SQRT, f), lambda_norm_average(SQRT, f)
        assert l <= la * (1 + 1e-12) and la <= 2 * l * (1 + 1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_k_lorentz_average_sandwich(self, seed):
        rng = np.random.default_rng(seed)
        f = StepFunction.from_pieces(list(zip(rng.uniform(0.1, 2, 4), rng.uniform(0, 3, 4))))
        phi0, phi1 = PowerLaw(0.3), PowerLaw(0.7)
        for t in (0.1, 1.0, 10.0):
            k, ka = k_lorentz(phi0, phi1, t, f), k_lorentz_average(phi0, phi1, t, f)
            assert k <= ka * (1 + 1e-9)
            assert ka <= (1 / 0.3) * k * (1 + 1e-9)


class TestEmbedding:
    def test_decreasing_equality(self):
        g = StepFunction.from_pieces([(1, 3), (1, 2), (2, 1)])
        lhs, rhs = hardy_littlewood(SQRT, g)
        assert lhs == rhs

    def test_zero(self):
        rep = embedding_checks(SQRT, SQRT, [StepFunction((1,), (0,))])[0]
        assert rep.hl_lhs == rep.hl_rhs == 0 and rep.hardy_littlewood_ok and rep.marcinkiewicz_ok

    def test_exhaustive_permutations(self):
        vals = [5, 3, 3, 2, 1, 0.5]
        for r in range(1, 7):
            for perm in itertools.permutations(vals[:r]):
                g = StepFunction.from_pieces([(1, v) for v in perm])
                rep = embedding_checks(SQRT, SQRT, [g])[0]
                assert rep.hardy_littlewood_ok and rep.marcinkiewicz_ok
