import json
import math

import numpy as np
import pytest

from powheat import (
    DomainError,
    FlowStep,
    Generator,
    GridSpec,
    ParameterError,
    PowerLawParameter,
    evaluate,
    flow_point,
    from_dict,
    make_projective,
    make_scale_invariant,
    make_separable,
    make_stationary,
    pushforward,
    residual_report,
    superpose,
    verify_transformed,
)
from powheat.flows import flow_point_numeric, map_time_interval, mobius_matrix, reach_interval
from powheat.lie_algebra import adjoint_coefficients


class TestBasisFlows:
    def test_x1_shift(self):
        assert flow_point(FlowStep.basis(1, 3.0, 2.0), 1, 2, 5) == (4, 2, 5)

    def test_x2_scaling(self):
        th, xh, uh = flow_point(FlowStep.basis(2, 0.5, 1.5), 1.0, 2.0, 3.0)
        assert (th, xh, uh) == pytest.approx((math.exp(0.5), 2 * math.exp(0.75), 3.0), rel=1e-15)

    def test_x4_multiplies(self):
        assert flow_point(FlowStep.basis(4, 0.3, 2.0), 1.0, 2.0, 3.0)[2] == pytest.approx(3 * math.exp(0.3))

    def test_x3_time(self):
        assert float(flow_point(FlowStep.basis(3, 0.5, 2.0), 1.0, 1.0, 1.0)[0]) == 2.0

    def test_x3_matches_geometric_series(self):
        eps, t = 0.3, 1.7
        series = t * sum((eps * t) ** j for j in range(400))
        assert float(flow_point(FlowStep.basis(3, eps, 2.0), t, 1.0, 1.0)[0]) == pytest.approx(series, rel=1e-13)

    @pytest.mark.parametrize("eps,t", [(1.0, 1.0), (0.5, 2.5), (-1.0, -1.0)])
    def test_x3_reach_violation(self, eps, t):
        with pytest.raises(DomainError, match="eps\\*t"):
            flow_point(FlowStep.basis(3, eps, 2.0), t, 1.0, 1.0)

    def test_x_positive(self):
        with pytest.raises(DomainError):
            flow_point(FlowStep.basis(1, 1.0, 2.0), 0.0, -1.0, 1.0)

    def test_nonfinite_epsilon(self):
        with pytest.raises(ParameterError):
            FlowStep.basis(1, math.inf, 2.0)

    @pytest.mark.parametrize("a", [1 / 3, 1.0, 2.5])
    def test_x3_closed_form_vs_characteristics(self, a, rng):
        for _ in range(40):
            t, x, u = rng.uniform(-2, 2), rng.uniform(0.2, 3), rng.uniform(-2, 2)
            eps = rng.uniform(-0.9, 0.9) / max(abs(t), 1e-3)
            eps = float(np.clip(eps, -5, 5))
            step = FlowStep.basis(3, eps, a)
            exact = np.array(flow_point(step, t, x, u), dtype=float)
            numeric = np.array(flow_point_numeric(step, t, x, u), dtype=float)
            np.testing.assert_allclose(numeric, exact, rtol=1e-8, atol=1e-10)

    @pytest.mark.parametrize("i", [1, 2, 3, 4])
    def test_group_law(self, i, rng):
        p = PowerLawParameter(1.5)
        for _ in range(30):
            t, x, u = rng.uniform(-0.5, 0.5), rng.uniform(0.3, 2), rng.uniform(0.5, 2)
            e1, e2 = rng.uniform(-0.4, 0.4, 2)
            two = flow_point(FlowStep.basis(i, e2, p), *flow_point(FlowStep.basis(i, e1, p), t, x, u))
            one = flow_point(FlowStep.basis(i, e1 + e2, p), t, x, u)
            np.testing.assert_allclose(np.array(two, float), np.array(one, float), rtol=1e-10, atol=1e-12)

    @pytest.mark.parametrize("i", [1, 2, 3, 4])
    def test_inverse_flow(self, i, rng):
        p = PowerLawParameter(2 / 3)
        for _ in range(30):
            t, x, u = rng.uniform(-0.5, 0.5), rng.uniform(0.3, 2), rng.uniform(0.5, 2)
            step = FlowStep.basis(i, rng.uniform(-0.8, 0.8), p)
            back = flow_point(step.inverse, *flow_point(step, t, x, u))
            np.testing.assert_allclose(np.array(back, float), (t, x, u), rtol=1e-10, atol=1e-12)


class TestGenericFlows:
    @pytest.mark.parametrize("a", [1 / 3, 1.0, 2.5])
    def test_closed_form_vs_characteristics(self, a, rng):
        p = PowerLawParameter(a)
        done = 0
        while done < 40:
            X = Generator(tuple(rng.uniform(-1, 1, 4)), p)
            step = FlowStep(X, rng.uniform(-1, 1))
            t, x, u = rng.uniform(-1, 1), rng.uniform(0.3, 2), rng.uniform(0.5, 2)
            lo, hi = reach_interval(step)
            if not lo + 0.2 < t < hi - 0.2:
                continue
            exact = np.array(flow_point(step, t, x, u), float)
            numeric = np.array(flow_point(step, t, x, u, method="numeric"), float)
            np.testing.assert_allclose(numeric, exact, rtol=1e-9, atol=1e-11)
            done += 1

    def test_mobius_is_group_element(self, rng):
        p = PowerLawParameter(2.0)
        for _ in range(20):
            X = Generator(tuple(rng.uniform(-2, 2, 4)), p)
            E = mobius_matrix(FlowStep(X, rng.uniform(-1, 1)))
            assert np.linalg.det(E) == pytest.approx(1.0, rel=1e-12)

    def test_elliptic_half_period_has_no_reach(self):
        # X1 + X3: the time flow is rotation by eps, a half turn sends every t through infinity
        step = FlowStep(Generator((1, 0, 1, 0), 2.0), math.pi)
        assert all(math.isnan(v) for v in reach_interval(step))

    def test_image_interval(self):
        step = FlowStep.basis(3, 0.5, 2.0)
        assert map_time_interval(step, 0.0, math.inf) == (0.0, math.inf)
        lo, hi = map_time_interval(step, -math.inf, 1.0)
        assert (lo, hi) == (-2.0, 2.0)

    def test_generic_flow_conjugation(self, rng):
        # exp(s Y) exp(eps X) exp(-s Y) = exp(eps Ad(exp(s Y)) X) on points
        p = PowerLawParameter(1.5)
        X = Generator((0.3, 0.2, 0.4, 0.1), p)
        s = 0.25
        for i in (1, 2, 3):
            Y = FlowStep.basis(i, s, p)
            conj = adjoint_coefficients(i, s, X)
            t, x, u = 0.2, 1.1, 0.7
            lhs = flow_point(Y, *flow_point(FlowStep(X, 0.3), *flow_point(Y.inverse, t, x, u)))
            rhs = flow_point(FlowStep(conj, 0.3), t, x, u)
            np.testing.assert_allclose(np.array(lhs, float), np.array(rhs, float), rtol=1e-12)


class TestPushforward:
    def test_x4_rescales(self, rng):
        sol = make_projective(1.5, 1.0)
        new = pushforward(sol, FlowStep.basis(4, 0.7, 1.5))
        t, x = rng.uniform(-1, 1, 20), rng.uniform(0.5, 2, 20)
        np.testing.assert_allclose(evaluate(new, t, x).value, math.exp(0.7) * evaluate(sol, t, x).value, rtol=1e-15)

    def test_x1_separable_time_shift(self, rng):
        kappa, eps = 0.8, 0.4
        sol = make_separable(2 / 3, "-", kappa)
        new = pushforward(sol, FlowStep.basis(1, eps, 2 / 3))
        t, x = rng.uniform(-1, 1, 20), rng.uniform(0.5, 2, 20)
        ref = math.exp(kappa**2 * eps) * evaluate(sol, t, x).value
        np.testing.assert_allclose(evaluate(new, t, x).value, ref, rtol=1e-12)

    @pytest.mark.parametrize("sign", ["+", "-"])
    def test_x2_separable_rescaled_kappa(self, sign, rng):
        kappa, eps, a = 0.8, 0.6, 1.5
        sol = make_separable(a, sign, kappa, 1.0, 0.5)
        new = pushforward(sol, FlowStep.basis(2, eps, a))
        same = make_separable(a, sign, kappa * math.exp(-eps / 2), 1.0, 0.5)
        t, x = rng.uniform(-1, 1, 20), rng.uniform(0.5, 2, 20)
        np.testing.assert_allclose(evaluate(new, t, x).value, evaluate(same, t, x).value, rtol=1e-10)

    def test_zero_flow_same_residuals(self, window):
        sol = make_scale_invariant(2 / 3, -1.0)
        base = residual_report(sol, window)
        moved = verify_transformed(sol, FlowStep.basis(3, 0.0, 2 / 3), window)
        np.testing.assert_array_equal(moved.residuals, base.residuals)

    def test_inverse_pushforward(self, rng):
        sol = make_projective(2 / 3, 2.0, 1.0, 0.3)
        step = FlowStep(Generator((0.2, -0.5, 0.6, 0.3), 2 / 3), 0.7)
        back = pushforward(pushforward(sol, step), step.inverse)
        t, x = rng.uniform(-1, 1, 20), rng.uniform(0.5, 2, 20)
        np.testing.assert_allclose(evaluate(back, t, x).value, evaluate(sol, t, x).value, rtol=1e-9)

    def test_composition_concatenates(self):
        sol = make_projective(1.5, 0.0)
        s1, s2 = FlowStep.basis(1, 0.2, 1.5), FlowStep.basis(3, 0.1, 1.5)
        assert pushforward(pushforward(sol, s1), s2).steps == (s1, s2)

    def test_domain_from_reach(self):
        sol = make_scale_invariant(1.5, -1.0)
        new = pushforward(sol, FlowStep.basis(3, -0.5, 1.5))
        # t in (0, inf) maps onto (0, 2)
        assert (new.domain.t_min, new.domain.t_max) == (0.0, 2.0)
        with pytest.raises(DomainError):
            evaluate(new, 2.5, 1.0)

    def test_empty_domain(self):
        sol = make_scale_invariant(1.5, -1.0)
        with pytest.raises(DomainError):
            pushforward(sol, FlowStep(Generator((1, 0, 1, 0), 1.5), 4.0))

    def test_x3_of_scale_invariant_passes(self):
        sol = make_scale_invariant(1.5, -1.0)
        grid = GridSpec(0.5, 1.5, 6, 0.5, 2, 6)
        assert verify_transformed(sol, FlowStep.basis(3, 0.3, 1.5), grid).passed

    def test_mixed_x1_x3_flow_of_projective_passes(self):
        grid = GridSpec(0.5, 1.5, 6, 0.5, 2, 6)
        for a in (1 / 3, 2 / 3, 1.0, 1.5):
            step = FlowStep(Generator((0.5, 0, 1, 0), a), 0.5)
            assert verify_transformed(make_projective(a, 1.0), step, grid).passed

    def test_json_round_trip(self):
        sol = pushforward(
            superpose([(1, make_stationary(2.0, 1, 0)), (2, make_projective(2.0, 1.0))]),
            FlowStep(Generator((0.1, 0.2, 0.3, 0.4), 2.0), 0.5),
        )
        d = json.loads(json.dumps(sol.to_dict()))
        assert d["flows"] == [{"k": [0.1, 0.2, 0.3, 0.4], "eps": 0.5}]
        assert from_dict(d) == sol


class TestProjectiveInvariant:
    """u (1+t**2)**((1-a)/2) exp(-mu atan t + a**2 x**(1/a) t / (1+t**2)) along X1 + X3 + mu X4 flows."""

    @staticmethod
    def invariant(a, mu, t, x, u):
        return u * (1 + t * t) ** ((1 - a) / 2) * math.exp(-mu * math.atan(t) + a * a * x ** (1 / a) * t / (1 + t * t))

    @pytest.mark.parametrize("a,mu", [(1 / 3, -1.0), (1.5, 2.0), (2.5, 0.5)])
    def test_constant_along_flow(self, a, mu):
        X = Generator((1, 0, 1, mu), a)
        t, x, u = 0.3, 1.2, 0.8
        ref = self.invariant(a, mu, t, x, u)
        for eps in np.linspace(-0.6, 0.6, 7):
            th, xh, uh = flow_point_numeric(FlowStep(X, eps), t, x, u)
            assert self.invariant(a, mu, th, xh, uh) == pytest.approx(ref, rel=1e-7)
