from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from interpkit import qcfun
from interpkit.errors import DomainError, ParameterError, RangeAssumptionViolated, ShapeError
from interpkit.qcfun import ConcaveMajorant, MinAffine, PowerLaw, PowerLog, sparse_tau

from oracles import dilation_brute

GRID = qcfun.log_grid(1e-4, 1e4, 81)


def catalog():
    return [
        PowerLaw(0.5),
        PowerLaw(0.25),
        PowerLaw(0.75),
        PowerLog(0.5, 0.3),
        PowerLog(0.4, -0.2),
        MinAffine(((1.0, 1.0), (4.0, 0.5))),
        ConcaveMajorant(((0.5, 0.5), (1.0, 1.0), (3.0, 1.5))),
    ]


class TestEval:
    def test_power_half(self):
        assert qcfun.eval(PowerLaw(0.5), 4) == 2.0

    def test_constant(self):
        assert qcfun.eval(PowerLaw(0.0), 7) == 1.0

    def test_min_affine(self):
        assert qcfun.eval(MinAffine(((1, 1),)), 0.25) == 0.25

    @pytest.mark.parametrize("t", [0.0, -1.0])
    def test_nonpositive_t(self, t):
        with pytest.raises(DomainError):
            qcfun.eval(PowerLaw(0.5), t)

    def test_vector_call(self):
        np.testing.assert_allclose(PowerLaw(0.5)(np.array([1.0, 4.0, 9.0])), [1, 2, 3])

    @pytest.mark.parametrize("rho", catalog(), ids=lambda r: r.kind)
    def test_catalog_quasi_concave(self, rho):
        assert rho.check_grid(GRID)
        assert np.all(np.asarray(rho(GRID)) > 0)

    def test_powerlog_parameter_guard(self):
        with pytest.raises(ParameterError):
            PowerLog(0.2, 0.5)

    def test_power_range_guard(self):
        with pytest.raises(ParameterError):
            PowerLaw(1.5)

    def test_spec_round_trip(self):
        for rho in catalog():
            assert qcfun.from_spec(rho.to_dict()) == rho

    def test_conjugate(self):
        assert PowerLaw(0.25).conjugate(16.0) == pytest.approx(8.0)


class TestMajorant:
    def test_hull_dominates_samples(self):
        pts = ((0.5, 0.4), (1.0, 1.0), (2.0, 1.1), (4.0, 0.9))
        m = ConcaveMajorant(pts)
        for t, y in pts:
            assert m(t) >= y - 1e-15
        assert m.check_grid(GRID)

    def test_flat_after_peak(self):
        m = ConcaveMajorant(((1.0, 1.0), (2.0, 2.0)))
        assert m(10.0) == 2.0


class TestDilation:
    def test_power_exact(self):
        assert qcfun.dilation(PowerLaw(0.5), 9, GRID) == pytest.approx(3.0, rel=1e-15)
        assert qcfun.dilation(PowerLaw(1.0), 2, GRID) == 2.0

    def test_majorant_min_oracle(self):
        grid = qcfun.log_grid(1e-3, 1e3, 64)
        samples = [(t, min(1.0, t)) for t in grid]
        rho = ConcaveMajorant(tuple(samples))
        val = qcfun.dilation(rho, 2.0, grid)
        assert 1.0 <= val <= 2.0
        # the 4096-point refinement sup dominates the 64-point value
        assert val <= dilation_brute(rho, 2.0) + 1e-12

    @given(st.floats(-3, 3), st.floats(-3, 3))
    def test_submultiplicative(self, a, b):
        # grid-closed products: t1, t2, t1 t2 and u on an exact 2**(j/4) lattice
        grid = 2.0 ** (np.arange(-80, 81) / 4)
        t1, t2 = 2.0 ** (round(a * 4) / 4), 2.0 ** (round(b * 4) / 4)
        for rho in (PowerLog(0.5, 0.3), MinAffine(((1.0, 1.0), (4.0, 0.5)))):
            lhs = qcfun.dilation(rho, t1 * t2, grid[40:-40])
            rhs = qcfun.dilation(rho, t1, grid) * qcfun.dilation(rho, t2, grid)
            assert lhs <= rhs + 1e-9

    def test_exponents_power(self):
        lo, hi = qcfun.dilation_exponents(PowerLaw(0.3), GRID)
        assert lo == pytest.approx(0.3) and hi == pytest.approx(0.3)
        assert qcfun.in_p_plus_minus(PowerLaw(0.3), GRID)
        assert not qcfun.in_p_plus_minus(PowerLaw(0.0), GRID)
        assert not qcfun.in_p_plus_minus(MinAffine(((1.0, 1.0),)), GRID)


class TestDerivedWeight:
    def test_example(self):
        np.testing.assert_allclose(qcfun.derived_weight(PowerLaw(0.5), [1, 1], [1, 0.25]), [1, 0.5])

    def test_theta_zero_identity(self, rng):
        w0 = rng.uniform(0.1, 5, 7)
        w1 = rng.uniform(0.1, 5, 7)
        np.testing.assert_array_equal(qcfun.derived_weight(PowerLaw(0.0), w0, w1), w0)

    def test_quarter_power(self):
        assert qcfun.derived_weight(PowerLaw(0.25), [1], [1 / 16])[0] == pytest.approx(0.5, rel=1e-15)

    def test_shape_error(self):
        with pytest.raises(ShapeError):
            qcfun.derived_weight(PowerLaw(0.5), [1, 2], [1])


class TestSparseTau:
    def test_half(self):
        seq = sparse_tau(PowerLaw(0.5), -2, 2)
        np.testing.assert_allclose(seq.tau, [1 / 16, 1 / 4, 1, 4, 16], rtol=1e-9)
        assert list(seq.k) == [-2, -1, 0, 1, 2]

    def test_quarter(self):
        np.testing.assert_allclose(sparse_tau(PowerLaw(0.25), 0, 1).tau, [1, 16], rtol=1e-9)

    @pytest.mark.parametrize("theta", [0.0, 1.0])
    def test_range_exhausted(self, theta):
        with pytest.raises(RangeAssumptionViolated):
            sparse_tau(PowerLaw(theta), -1, 1)

    def test_one_sided_truncation(self):
        # rho = min(1, t) has rho' = max(1, t): both bounded on one side
        seq = sparse_tau(MinAffine(((1.0, 1.0),)), -3, 3, truncate=True)
        assert seq.truncated
        assert seq.separation() <= 1.0 + 1e-12

    def test_truncation_off_raises(self):
        with pytest.raises(RangeAssumptionViolated):
            sparse_tau(MinAffine(((1.0, 1.0),)), -3, 3)

    @pytest.mark.parametrize("theta", [0.1, 0.25, 0.4, 0.5, 0.6, 0.75, 0.9])
    def test_power_geometric(self, theta):
        r = 2.0 ** (1.0 / min(theta, 1 - theta))
        seq = sparse_tau(PowerLaw(theta), -4, 4)
        np.testing.assert_allclose(seq.tau, r ** seq.k.astype(float), rtol=1e-9)

    @pytest.mark.parametrize("rho", catalog()[:5], ids=lambda r: r.kind)
    def test_invariants(self, rho):
        seq = sparse_tau(rho, -5, 5)
        assert seq.tau[list(seq.k).index(0)] == 1.0
        assert np.all(np.diff(seq.tau) > 0)
        np.testing.assert_allclose(seq.step_ratios(), 2.0, rtol=1e-9)
        assert seq.separation_excess() <= 1e-12
        t = np.exp(np.linspace(math.log(seq.tau[0]), math.log(seq.tau[-1]), 200))
        assert seq.cover_constant(t) <= 2.0 + 1e-9

    def test_csv(self):
        text = sparse_tau(PowerLaw(0.5), -1, 1).to_csv()
        lines = text.strip().splitlines()
        assert lines[0] == "k,tau_k,rho_tau_k"
        assert lines[2] == "0,1.0,1.0"

    def test_range_must_contain_zero(self):
        with pytest.raises(ParameterError):
            sparse_tau(PowerLaw(0.5), 1, 3)
