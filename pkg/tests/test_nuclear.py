from __future__ import annotations

import math

import numpy as np
import pytest

from interpkit.couples import WeightedCouple, _lp_norm, couple_opnorm, j_functional
from interpkit.errors import DegenerateInputError, ShapeError, UnsupportedExponentError
from interpkit.nuclear import (
    NuclearDecomposition,
    decomp_to_representation,
    dual_norm,
    nuclear_norm,
    nuclearity_equivalence_test,
    point_mass_decomposition,
    representation_to_decomp,
    separately_nuclear_example,
    side_sums,
    term_inequality,
)
from interpkit.representations import Representation, jk_gap
from interpkit.retract import block_index


def couple(w0, w1, p="inf"):
    return WeightedCouple(tuple(range(len(w0))), np.asarray(w0, float), np.asarray(w1, float), p)


ONE_INF, ONE_L1 = couple([1], [1]), couple([1], [1], 1)


def random_instance(rng, n=3, m=3, terms=3):
    src = couple(np.exp(rng.uniform(-2, 2, n)), np.exp(rng.uniform(-2, 2, n)))
    tgt = couple(np.exp(rng.uniform(-2, 2, m)), np.exp(rng.uniform(-2, 2, m)), 1)
    d = NuclearDecomposition(tuple((rng.standard_normal(n), rng.standard_normal(m)) for _ in range(terms)))
    return d, src, tgt, rng.standard_normal(n)


class TestNorm:
    def test_examples(self):
        one = NuclearDecomposition(((np.ones(1), np.ones(1)),))
        assert nuclear_norm(one, ONE_INF, ONE_L1) == 1
        assert nuclear_norm(NuclearDecomposition(()), ONE_INF, ONE_L1) == 0
        assert nuclear_norm(one, couple([2], [1]), couple([3], [1], 1)) == 1.5

    def test_dual_norm(self):
        assert dual_norm(couple([2, 4], [1, 1]), 0, [1, 1]) == pytest.approx(0.75)
        assert dual_norm(couple([2, 4], [1, 1], 1), 0, [1, 1]) == pytest.approx(0.5)

    def test_zero_terms_dropped(self):
        d = NuclearDecomposition(((np.zeros(2), np.ones(2)), (np.ones(2), np.ones(2))))
        assert len(d) == 1

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            NuclearDecomposition(((np.ones(2), np.ones(2)), (np.ones(3), np.ones(2))))

    def test_separately_nuclear(self):
        d, s, t = separately_nuclear_example(0.01)
        assert nuclear_norm(d, s, t) == pytest.approx(2.0)
        np.testing.assert_allclose(side_sums(d, s, t), (1.01, 1.01))

    @pytest.mark.parametrize("seed", range(10))
    def test_dominates_opnorm(self, seed):
        d, src, tgt, _ = random_instance(np.random.default_rng(seed))
        assert couple_opnorm(d.operator(src, tgt)).value <= nuclear_norm(d, src, tgt) * (1 + 1e-12)
        assert max(side_sums(d, src, tgt)) <= nuclear_norm(d, src, tgt) * (1 + 1e-12)

    def test_point_mass_matrix(self, rng):
        m = rng.standard_normal((3, 4))
        np.testing.assert_allclose(point_mass_decomposition(m).matrix(4, 3), m)


class TestConversions:
    def test_single_term(self):
        d = NuclearDecomposition(((np.ones(1), np.ones(1)),))
        cert = decomp_to_representation(d, [1], 2, ONE_INF, ONE_L1)
        assert list(cert.rep.parts) == [0]
        assert cert.gap <= cert.bound

    def test_empty(self):
        cert = decomp_to_representation(NuclearDecomposition(()), [1], 2, ONE_INF, ONE_L1)
        assert cert.gap == 0 and not cert.rep.parts

    def test_zero_x(self):
        with pytest.raises(DegenerateInputError):
            decomp_to_representation(NuclearDecomposition(()), [0], 2, ONE_INF, ONE_L1)

    def test_block_placement(self):
        tgt = couple([1, 4], [1, 1], 1)
        src = couple([1, 1], [1, 1])
        e = np.eye(2)
        d = NuclearDecomposition(((e[0], e[0]), (e[1], e[1])))
        assert decomp_to_representation(d, [1, 1], 2, src, tgt).term_blocks == (0, 2)

    def test_rep_to_decomp_single(self):
        rep = Representation(2.0, {0: np.array([3.0])}, np.array([3.0]))
        d = representation_to_decomp(rep, [1], ONE_INF)
        assert len(d) == 1
        assert nuclear_norm(d, ONE_INF, ONE_L1) == j_functional(ONE_L1, 1, [3.0])
        assert len(representation_to_decomp(Representation(2.0, {}, np.zeros(1)), [1], ONE_INF)) == 0

    def test_rep_to_decomp_needs_inf(self):
        rep = Representation(2.0, {0: np.array([1.0])}, np.array([1.0]))
        with pytest.raises(UnsupportedExponentError):
            representation_to_decomp(rep, [1], ONE_L1)

    @pytest.mark.parametrize("seed", range(20))
    def test_round_trip(self, seed):
        rng = np.random.default_rng(seed)
        lam = 2.0
        d, src, tgt, x = random_instance(rng)
        cert = decomp_to_representation(d, x, lam, src, tgt)
        assert cert.gap <= cert.bound * (1 + 1e-12)
        np.testing.assert_allclose(cert.rep.total(), d.apply(x), rtol=1e-10, atol=1e-12)
        back = representation_to_decomp(cert.rep, x, src, lam)
        nu = nuclear_norm(back, src, tgt)
        assert nu <= 2 * cert.gap * (1 + 1e-12)
        np.testing.assert_allclose(back.apply(x), cert.rep.total(), rtol=1e-10, atol=1e-12)
        assert nu <= 2 * lam * nuclear_norm(d, src, tgt) * (1 + 1e-12)

    @pytest.mark.parametrize("seed", range(10))
    def test_term_inequality(self, seed):
        rng = np.random.default_rng(seed)
        d, src, tgt, _ = random_instance(rng)
        for l, b in d.terms:
            k = block_index(_lp_norm(tgt.w0 * b, 1), _lp_norm(tgt.w1 * b, 1), 2.0)
            lhs, rhs = term_inequality(l, b, k, 2.0, src, tgt)
            assert lhs <= rhs * (1 + 1e-12)


class TestEquivalence:
    def test_zero_y(self):
        rep = nuclearity_equivalence_test(ONE_INF, ONE_L1, [1], [0], 2)
        assert rep.gap == 0 and rep.nu == 0

    def test_identity(self):
        rep = nuclearity_equivalence_test(ONE_INF, ONE_L1, [1], [1], 2)
        assert rep.gap == pytest.approx(1) and rep.nu == pytest.approx(1)
        assert set(rep.to_dict()) == {"gap", "nu", "factor_gap_over_nu", "factor_nu_over_gap"}

    def test_infinite(self):
        rep = nuclearity_equivalence_test(ONE_INF, ONE_L1, [0], [1], 2)
        assert math.isinf(rep.gap)

    @pytest.mark.parametrize("seed", range(10))
    def test_random_4x4(self, seed):
        rng = np.random.default_rng(seed)
        _, src, tgt, x = random_instance(rng, 4, 4, 1)
        y = rng.standard_normal(4)
        rep = nuclearity_equivalence_test(src, tgt, x, y, 2)
        assert rep.gap_ok and rep.nu_ok
        assert rep.gap == pytest.approx(jk_gap(src, x, tgt, y, 2).value)
