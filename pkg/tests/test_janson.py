from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from interpkit.couples import CoupleOperator, WeightedCouple, opnorm_inf_to_1, rho_norm
from interpkit.errors import HypothesisViolation, ParameterError, UnsupportedExponentError
from interpkit.janson import (
    EpsilonProfile,
    condition_1prime,
    diagonal_sums,
    dilation_profile,
    epsilon_profile,
    epsilon_profile_rho,
    k_tilde_grid,
    lemma1_bound,
    lemma2_grid_iota,
    lemma3_conservation,
    lemma3_pi,
    lemma3_side_norms,
    scaled_matrix,
    verify_ovchinnikov,
)
from interpkit.nuclear import nuclear_norm
from interpkit.qcfun import PowerLaw, PowerLog, log_grid, sparse_tau


def couple(w0, w1, p="inf", labels=None):
    labels = tuple(range(len(w0))) if labels is None else tuple(labels)
    return WeightedCouple(labels, np.asarray(w0, float), np.asarray(w1, float), p)


def adic(lo, hi, p="inf"):
    return WeightedCouple.lambda_adic(2, lo, hi, p)


class TestScaledAndDiagonals:
    def test_scaled_examples(self):
        m = np.array([[1.0, -2.0], [0.5, 3.0]])
        T = CoupleOperator(m, couple([1, 1], [1, 1]), couple([1, 1], [1, 1], 1))
        np.testing.assert_array_equal(scaled_matrix(T), m)
        T = CoupleOperator(np.ones((1, 1)), couple([1], [1]), couple([2], [1], 1))
        assert scaled_matrix(T)[0, 0] == 2
        T = CoupleOperator(np.zeros((2, 2)), couple([1, 2], [1, 1]), couple([1, 3], [1, 1], 1))
        assert not np.any(scaled_matrix(T))

    def test_diagonal_examples(self):
        assert diagonal_sums(np.eye(2), [0, 1], [0, 1]) == {-1: 0.0, 0: 2.0, 1: 0.0}
        assert diagonal_sums([[1, 1], [1, -1]], [0, 1], [0, 1]) == {-1: 1.0, 0: 2.0, 1: 1.0}
        assert all(v == 0 for v in diagonal_sums(np.zeros((3, 3))).values())

    @given(
        st.integers(1, 8).flatmap(
            lambda r: st.integers(1, 8).flatmap(lambda c: hnp.arrays(float, (r, c), elements=st.floats(-5, 5)))
        )
    )
    def test_diagonal_below_inf_to_1(self, a):
        # a diagonal is the action on a +-1 vector restricted to disjoint rows
        norm = opnorm_inf_to_1(a, np.ones(a.shape[1]), np.ones(a.shape[0])).value
        for d in diagonal_sums(a).values():
            assert d <= norm + 1e-9


class TestProfiles:
    def test_square_root_adic(self):
        k = np.arange(-5, 6)
        prof = epsilon_profile_rho(2.0**k, 2.0**k, PowerLaw(0.5), None, k, k)
        for m, v in prof.values.items():
            assert v == pytest.approx(2.0 ** (-abs(m) / 2), rel=1e-12)

    @pytest.mark.parametrize("theta", [0.2, 0.3, 0.7])
    def test_power_asymmetric_and_bounded(self, theta):
        k = np.arange(-4, 5)
        prof = epsilon_profile_rho(2.0**k, 2.0**k, PowerLaw(theta), None, k, k)
        for m, v in prof.values.items():
            exact = 2.0 ** (-theta * m) if m >= 0 else 2.0 ** ((1 - theta) * m)
            assert v == pytest.approx(exact, rel=1e-12)
            assert v <= 2.0 ** (-abs(m) * min(theta, 1 - theta)) * (1 + 1e-12)

    def test_single_pair(self):
        prof = epsilon_profile(couple([2], [1], labels=[3]), couple([1], [4], 1, labels=[5]))
        assert prof.values == {2: 0.25}

    def test_couple_profile_adic(self):
        prof = epsilon_profile(adic(-3, 3), adic(-3, 3, 1))
        for m, v in prof.values.items():
            assert v == pytest.approx(min(1.0, 2.0**m))

    def test_dilation_profile_dominates(self):
        rho = PowerLog(0.5, 0.3)
        k = np.arange(-4, 5)
        tau = 2.0**k
        tight = epsilon_profile_rho(tau, tau, rho, None, k, k)
        # the sup sits at the kink of the log factor; include the lattice points themselves
        grid = np.union1d(log_grid(1e-4, 1e4, 2000), 2.0 ** np.arange(-8, 9))
        dil = dilation_profile(rho, 2.0, list(tight.values), grid)
        for m, v in tight.values.items():
            assert v <= dil[m] * (1 + 1e-6)

    def test_divergent(self):
        assert not EpsilonProfile({0: 1.0, 1: math.inf}).convergent

    def test_condition_1prime(self):
        assert condition_1prime(adic(-4, 4))
        assert not condition_1prime(couple([1, 3, 1, 3], [1, 3, 1, 3]))


class TestDiagonalBound:
    def test_single_entry(self):
        T = CoupleOperator(np.array([[-3.0]]), couple([1], [1]), couple([1], [1], 1))
        lb = lemma1_bound(T, EpsilonProfile({0: 1.0}))
        assert lb.bound == 3 and lb.diagonal == 3

    def test_zero(self):
        T = CoupleOperator(np.zeros((2, 2)), adic(0, 1), adic(0, 1, 1))
        prof = epsilon_profile(T.source, T.target)
        lb = lemma1_bound(T, prof)
        assert lb.bound == 0 and lb.diagonal == 0 and lb.certified == 0

    @pytest.mark.parametrize("seed", range(10))
    def test_random_adic(self, seed):
        rng = np.random.default_rng(seed)
        src, tgt = adic(-3, 4), adic(-3, 4, 1)
        T = CoupleOperator(rng.standard_normal((8, 8)), src, tgt)
        rho = PowerLaw(0.5)
        k = np.arange(-3, 5)
        prof = epsilon_profile_rho(2.0**k, 2.0**k, rho, None, k, k)
        lb = lemma1_bound(T, prof, rho)
        rep = verify_ovchinnikov(T, rho)
        assert rep.C_rho <= lb.diagonal * (1 + 1e-12)
        assert lb.diagonal <= lb.certified * (1 + 1e-12)
        assert rep.C_rho <= lb.certified * (1 + 1e-12)
        assert rep.C_rho <= lb.absolute_sum * (1 + 1e-12)
        # the point-mass decomposition between the rho spaces
        assert nuclear_norm(lb.decomposition, src, tgt) > 0


class TestRhoNormCheck:
    def test_single_entry(self):
        for rho in (PowerLaw(0.3), PowerLaw(0.5)):
            T = CoupleOperator(np.array([[2.0]]), adic(0, 0), adic(0, 0, 1))
            rep = verify_ovchinnikov(T, rho)
            assert rep.ratio == pytest.approx(1.0) and rep.passed
            assert rep.ratio <= rep.eps_sum

    def test_zero(self):
        T = CoupleOperator(np.zeros((3, 3)), adic(0, 2), adic(0, 2, 1))
        rep = verify_ovchinnikov(T, PowerLaw(0.5))
        assert rep.C_base == rep.C_rho == rep.bound == 0 and rep.passed

    def test_requires_inf_to_1(self):
        T = CoupleOperator(np.ones((1, 1)), adic(0, 0, 1), adic(0, 0, 1))
        with pytest.raises(UnsupportedExponentError):
            verify_ovchinnikov(T, PowerLaw(0.5))

    def test_closed_form_sum(self):
        k = np.arange(-6, 7)
        prof = epsilon_profile_rho(2.0**k, 2.0**k, PowerLaw(0.5), None, k, k)
        full = 2 / (1 - 2**-0.5) - 1
        assert prof.sum < full
        assert prof.sum == pytest.approx(1 + 2 * sum(2 ** (-m / 2) for m in range(1, 13)))


class TestGridIota:
    def test_constant(self):
        t = np.array([0.5, 1, 2, 4, 8, 16, 32])
        g = lemma2_grid_iota(t, np.ones(7), [1, 4, 16])
        np.testing.assert_allclose(g.a, [1, 1, 1])
        np.testing.assert_allclose(g.apply(g.a)[g.inside], 1)

    def test_min_one_t(self):
        t = log_grid(1 / 64, 64, 97)
        tau = sparse_tau(PowerLaw(0.5), -2, 2)
        g = lemma2_grid_iota(t, np.minimum(1, t), tau)
        np.testing.assert_allclose(g.a, np.minimum(1, 4.0 ** np.arange(-2, 3)), rtol=1e-12)

    def test_bad_tau(self):
        with pytest.raises(ParameterError):
            lemma2_grid_iota([1, 2], [1, 1], [2, 1])

    @pytest.mark.parametrize("seed", range(10))
    def test_side_norms_random_concave(self, seed):
        rng = np.random.default_rng(seed)
        t = log_grid(1e-3, 1e3, 200)
        slopes = np.sort(rng.uniform(0, 1, 4))[::-1]
        knots = np.sort(rng.uniform(1e-2, 1e2, 4))
        x = np.min([s * t + (1 - s) * kn for s, kn in zip(slopes, knots)], axis=0)
        tau = sparse_tau(PowerLaw(0.5), -4, 4)
        g = lemma2_grid_iota(t, x, tau)
        n0, n1 = g.side_norms(t, tau.tau)
        assert n0 <= 1 + 1e-9 and n1 <= 1 + 1e-9

    def test_k_tilde(self):
        assert k_tilde_grid(2.0, [1, 4], [1, 2]) == 1.0


class TestAtomProjection:
    def test_single_atom(self):
        tgt = couple([3], [3], 1)
        res = lemma3_pi(tgt, [-2], sparse_tau(PowerLaw(0.5), 0, 0), PowerLaw(0.5))
        assert res.partition == {0: (0,)}
        assert res.b[0] == pytest.approx(6)

    def test_zero(self):
        tgt = couple([1, 2], [1, 1], 1)
        res = lemma3_pi(tgt, [0, 0], sparse_tau(PowerLaw(0.5), -1, 1), PowerLaw(0.5))
        assert not np.any(res.b)

    def test_own_blocks(self):
        tgt = couple([1, 4, 16], [1, 1, 1], 1)
        tau = sparse_tau(PowerLaw(0.5), 0, 2)
        res = lemma3_pi(tgt, [1, 1, 1], tau, PowerLaw(0.5))
        assert res.partition == {0: (0,), 1: (1,), 2: (2,)}
        np.testing.assert_allclose(res.atom_values, 1)

    def test_violation(self):
        tgt = couple([1e6], [1], 1)
        with pytest.raises(HypothesisViolation, match="atom 0"):
            lemma3_pi(tgt, [1], sparse_tau(PowerLaw(0.5), 0, 1), PowerLaw(0.5))

    @pytest.mark.parametrize("seed", range(10))
    def test_conservation_and_norms(self, seed):
        rng = np.random.default_rng(seed)
        n = 6
        rho = PowerLaw(float(rng.uniform(0.2, 0.8)))
        tgt = couple(np.exp(rng.uniform(-3, 3, n)), np.exp(rng.uniform(-3, 3, n)), 1)
        y = rng.standard_normal(n)
        tau = sparse_tau(rho, -20, 20)
        res = lemma3_pi(tgt, y, tau, rho)
        lhs, rhs = lemma3_conservation(res, tgt, y, tau, rho)
        assert lhs == pytest.approx(rhs, rel=1e-12)
        assert rhs == pytest.approx(rho_norm(tgt, rho, y), rel=1e-12)
        assert max(lemma3_side_norms(res, tgt, tau)) <= 2 + 1e-9
