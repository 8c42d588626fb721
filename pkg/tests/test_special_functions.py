import math

import mpmath as mp
import numpy as np
import pytest

from powheat import special_functions as sf
from powheat.errors import ParameterError, RangeError
from powheat.special_functions import OdeBasisSpec

from helpers import ode_residual

mp.mp.dps = 40


class TestLogGamma:
    def test_one(self):
        assert sf.log_gamma(1.0).value == 0.0

    def test_half(self):
        assert sf.log_gamma(0.5).value == pytest.approx(math.log(math.sqrt(math.pi)), rel=1e-14)

    def test_recurrence(self, rng):
        x = rng.uniform(0.1, 40, 50)
        lhs = sf.log_gamma(x + 1).value - sf.log_gamma(x).value - np.log(x)
        np.testing.assert_allclose(lhs, 0, atol=1e-12)

    def test_against_mpmath(self, rng):
        for x in rng.uniform(0.01, 50, 50):
            v = sf.log_gamma(x)
            ref = float(mp.loggamma(x))
            assert abs(v.value - ref) <= max(1e-12 * abs(ref), v.abs_error)

    def test_nonpositive(self):
        with pytest.raises(ParameterError):
            sf.log_gamma(0.0)


class TestBessel:
    def test_j0_small(self):
        assert sf.bessel("J", 0, 1e-12).value == pytest.approx(1.0, abs=1e-15)

    @pytest.mark.parametrize("x", [0.5, 1.0, 2.0])
    def test_half_order(self, x):
        assert sf.bessel("J", 0.5, x).value == pytest.approx(math.sqrt(2 / (math.pi * x)) * math.sin(x), rel=1e-10)

    def test_wronskian_ordinary(self, rng):
        for _ in range(50):
            nu, x = rng.uniform(0, 5), rng.uniform(0.1, 50)
            J, Y = sf.bessel("J", nu, x).value, sf.bessel("Y", nu, x).value
            dJ, dY = sf.bessel_derivative("J", nu, x).value, sf.bessel_derivative("Y", nu, x).value
            assert (J * dY - dJ * Y) * math.pi * x / 2 == pytest.approx(1, abs=1e-9)

    def test_wronskian_modified(self, rng):
        for _ in range(50):
            nu, x = rng.uniform(0, 5), rng.uniform(0.1, 50)
            I, K = sf.bessel("I", nu, x).value, sf.bessel("K", nu, x).value
            dI, dK = sf.bessel_derivative("I", nu, x).value, sf.bessel_derivative("K", nu, x).value
            assert (I * dK - dI * K) * x == pytest.approx(-1, abs=1e-9)

    @pytest.mark.parametrize("kind", "JYIK")
    def test_against_mpmath(self, rng, kind):
        ref = {"J": mp.besselj, "Y": mp.bessely, "I": mp.besseli, "K": mp.besselk}[kind]
        for _ in range(50):
            nu, x = rng.uniform(0, 5), rng.uniform(0.05, 50)
            v = sf.bessel(kind, nu, x)
            exact = float(ref(nu, x))
            assert abs(v.value - exact) <= v.abs_error
            if kind in "IK":
                assert abs(v.value - exact) <= 1e-10 * abs(exact)

    def test_overflow_is_range_error(self):
        with pytest.raises(RangeError):
            sf.bessel("I", 1.0, 1000.0)

    def test_bad_kind(self):
        with pytest.raises(ParameterError):
            sf.bessel("H", 1.0, 1.0)

    def test_second_solution_dispatch(self):
        spec = OdeBasisSpec.bessel(1.5, modified=True)
        assert sf.second_solution(spec, 2.0).value == sf.bessel("K", 1.5, 2.0).value
        spec = OdeBasisSpec.bessel(1.5, modified=False)
        assert sf.second_solution(spec, 2.0).value == sf.bessel("Y", 1.5, 2.0).value


class TestKummer:
    def test_origin(self):
        assert sf.kummer_m(1.3, 2.2, 0.0).value == 1.0

    @pytest.mark.parametrize("x", [-30.0, -1.0, 0.5, 20.0])
    def test_alpha_zero(self, x):
        assert sf.kummer_m(0.0, 2.5, x).value == 1.0

    def test_e_minus_one(self):
        assert sf.kummer_m(1.0, 2.0, 1.0).value == pytest.approx(math.e - 1, rel=1e-10)

    def test_against_mpmath(self, rng):
        for _ in range(100):
            al, be, x = rng.uniform(-3, 4), rng.uniform(1.1, 4), rng.uniform(-50, 50)
            v = sf.kummer_m(al, be, x)
            exact = float(mp.hyp1f1(al, be, x))
            assert abs(v.value - exact) <= max(1e-10 * abs(exact), v.abs_error)

    def test_irregular_closed_form(self):
        # non-integer beta: x**(1-beta) M(1+alpha-beta, 2-beta, x) / (beta-1)
        al, be = 0.7, 2.5
        spec = OdeBasisSpec.kummer(al, be)
        for x in (0.2, 1.0, 4.0):
            ref = float(x ** (1 - be) * mp.hyp1f1(1 + al - be, 2 - be, x) / (be - 1))
            assert sf.second_solution(spec, x).value == pytest.approx(ref, rel=1e-12)

    @pytest.mark.parametrize("al,be", [(1, 2), (0.5, 2), (3, 3), (-1, 2.5), (2, 4 / 3)])
    def test_wronskian(self, al, be):
        # both branches grow like e**x, so the weighted difference cancels
        # catastrophically; allow for that on top of 1e-9
        spec = OdeBasisSpec.kummer(al, be)
        x = np.linspace(0.05, 8, 60)
        y1, d1 = sf.regular_solution(spec, x).value, sf.regular_derivative(spec, x).value
        y2, d2 = sf.second_solution(spec, x).value, sf.irregular_derivative(spec, x).value
        cancel = 64 * sf.EPS * spec.weight(x) * (np.abs(d1 * y2) + np.abs(y1 * d2))
        assert np.all(np.abs(sf.wronskian(spec, x) - 1.0) <= 1e-9 + cancel)

    @pytest.mark.parametrize("be", [2.0, 3.0, 2.5, 4 / 3])
    @pytest.mark.parametrize("branch", ["regular", "irregular"])
    def test_ode_residual(self, be, branch):
        spec = OdeBasisSpec.kummer(1.7, be)
        x = np.linspace(0.1, 10, 50)
        assert np.max(ode_residual(spec, x, branch)) <= 1e-9

    def test_irregular_integer_beta_finite(self):
        spec = OdeBasisSpec.kummer(1.0, 2.0)
        assert math.isfinite(sf.second_solution(spec, 1.0).value)
        assert ode_residual(spec, np.array([1.0]), "irregular")[0] <= 1e-9

    def test_irregular_below_xi_min(self):
        with pytest.raises(RangeError):
            sf.second_solution(OdeBasisSpec.kummer(1.0, 2.5), 1e-9)

    def test_beta_must_exceed_one(self):
        with pytest.raises(ParameterError):
            OdeBasisSpec.kummer(1.0, 0.5)


class TestCoulomb:
    def test_sin_ratio_constant(self):
        rho = np.linspace(0.1, 10, 200)
        mask = np.abs(np.sin(rho)) > 0.05
        r = sf.coulomb_regular(0.0, 0.0, rho).value[mask] / np.sin(rho[mask])
        np.testing.assert_allclose(r, r[0], rtol=1e-9)

    @pytest.mark.parametrize("a", [1 / 3, 2.0, 2.5, 1.5])
    def test_bessel_reduction(self, a):
        l = (a - 1) / 2
        rho = np.linspace(0.5, 10, 200)
        ref = np.sqrt(rho) * sf.bessel("J", l + 0.5, rho).value
        mask = np.abs(ref) > 0.05 * np.max(np.abs(ref))
        ratio = sf.coulomb_regular(l, 0.0, rho).value[mask] / ref[mask]
        assert np.std(ratio) <= 1e-8
        expected = 2 ** (l + 0.5) * math.gamma(l + 1.5)
        assert np.mean(ratio) == pytest.approx(expected, rel=1e-10)

    @pytest.mark.parametrize("a", [1 / 3, 2.0, 2.5])
    @pytest.mark.parametrize("mu", [-1.0, 0.0, 3.0])
    @pytest.mark.parametrize("branch", ["regular", "irregular"])
    def test_ode_residual(self, a, mu, branch):
        spec = OdeBasisSpec.for_projective(a, mu)
        rho = np.linspace(0.2, 20, 100)
        assert np.max(ode_residual(spec, rho, branch)) <= 1e-9

    def test_unit_case_wronskian(self):
        spec = OdeBasisSpec.for_projective(1.0, 0.0)
        w = sf.wronskian(spec, np.linspace(0.1, 20, 80))
        np.testing.assert_allclose(np.abs(w), 1.0, rtol=1e-9)
        irr = sf.second_solution(spec, np.linspace(0.1, 20, 80)).value
        rho = np.linspace(0.1, 20, 80)
        mask = np.abs(np.cos(rho)) > 0.05
        ratio = irr[mask] / np.cos(rho[mask])
        np.testing.assert_allclose(ratio, ratio[0], rtol=1e-9)

    @pytest.mark.parametrize("l,eta", [(0.5, 1.0), (-1 / 3, -0.5), (1.25, 1.5), (0.0, 0.5)])
    def test_wronskian_constant(self, l, eta):
        spec = OdeBasisSpec.coulomb(l, eta)
        w = sf.wronskian(spec, np.linspace(0.1, 30, 120))
        np.testing.assert_allclose(w, 1.0, rtol=1e-9)

    @pytest.mark.parametrize("l,eta", [(0.5, 1.0), (-1 / 3, -0.5), (1.25, 1.5), (0.0, 0.0), (0.75, -1.0)])
    def test_against_mpmath(self, l, eta):
        c = mp.coulombc(l, eta)
        for rho in (0.3, 2.0, 7.9, 8.1, 15.0, 35.0):
            ref = float(mp.coulombf(l, eta, rho) / c)
            v = sf.coulomb_regular(l, eta, rho)
            assert abs(v.value - ref) <= 1e-10 * max(abs(ref), 1e-3 * abs(float(rho ** (l + 1))))

    def test_continuation_matches_series_at_switch(self):
        spec = OdeBasisSpec.coulomb(0.75, 0.8)
        below = sf.regular_solution(spec, sf.RHO_SWITCH * (1 - 1e-12)).value
        above = sf.regular_solution(spec, sf.RHO_SWITCH * (1 + 1e-12)).value
        assert above == pytest.approx(below, rel=1e-9)

    def test_smooth_across_switch(self):
        spec = OdeBasisSpec.coulomb(0.25, -0.6)
        rho = sf.RHO_SWITCH + np.linspace(-0.05, 0.05, 11)
        d = sf.regular_derivative(spec, rho).value
        y = sf.regular_solution(spec, rho).value
        fd = np.gradient(y, rho)
        np.testing.assert_allclose(fd[1:-1], d[1:-1], rtol=1e-4)


class TestErrorHonesty:
    """Reported abs_error must bound the true error against extended precision."""

    def test_corpus(self, rng):
        violations = 0
        for _ in range(200):
            family = rng.integers(0, 3)
            if family == 0:
                nu, x = rng.uniform(0, 5), rng.uniform(0.1, 50)
                v = sf.bessel("J", nu, x)
                ref = float(mp.besselj(nu, x))
            elif family == 1:
                al, be, x = rng.uniform(-2, 3), rng.uniform(1.2, 4), rng.uniform(0, 30)
                v = sf.kummer_m(al, be, x)
                ref = float(mp.hyp1f1(al, be, x))
            else:
                l, eta, rho = rng.uniform(-0.3, 1.5), rng.uniform(-2, 2), rng.uniform(0.1, 20)
                v = sf.coulomb_regular(l, eta, rho)
                ref = float(mp.coulombf(l, eta, rho) / mp.coulombc(l, eta))
            if abs(v.value - ref) > v.abs_error:
                violations += 1
        assert violations == 0
