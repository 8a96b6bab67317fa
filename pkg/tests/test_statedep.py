"""Wealth-dependent coefficients: pointwise optimum, bang-bang policies,
the quadrature evaluator, and both closed-form families."""

import math

import numpy as np
import pytest

from dualruin.statedep import (
    BangBang,
    BangBangPolicy,
    NonIntegrable,
    StateExampleIIParams,
    StateExampleIParams,
    StateModel,
    StateRuinEvaluator,
    c_star_bangbang,
    c_star_pointwise,
    closed_form_state_ex1,
    closed_form_state_ex2,
    ruin_probability_quadrature,
    state_ex2_no_investment,
)

EX1 = StateExampleIParams(rho0=1.0, lam0=0.1, delta0=1.0, c1=1.0, c2=1.0, nu=0.1)
EX2 = StateExampleIIParams(rho0=1.0, c1=1.0, c2=1.0, lam0=1.2, delta0=0.4, nu=0.1)


class TestPointwiseOptimum:
    def test_optimality_equation(self):
        model = EX1.model()
        for x in (0.0, 0.5, 2.0, 10.0):
            c = c_star_pointwise(model, x)
            rho, lam, delta = model.rho_fn(x), model.lam_fn(x), model.delta_fn(x)
            g = model.gamma
            resid = lam + (1.0 - g) * delta * c**g - rho * delta * g * c ** (g - 1.0)
            assert abs(resid) <= 1e-9 * max(1.0, abs(lam)), x

    def test_vectorized(self):
        model = EX1.model()
        xs = np.linspace(0.0, 5.0, 11)
        vec = c_star_pointwise(model, xs)
        assert vec.shape == xs.shape
        for x, c in zip(xs, vec):
            assert c == pytest.approx(c_star_pointwise(model, float(x)), rel=1e-12)

    def test_scale_invariance(self):
        # the affine factor multiplies lam and delta together, so the
        # pointwise optimum does not move with wealth
        model = EX1.model()
        assert c_star_pointwise(model, 0.0) == pytest.approx(
            c_star_pointwise(model, 7.0), rel=1e-12
        )

    def test_upper_bound(self):
        model = StateModel.constant(rho=2.0, lam=0.3, delta=1.5, gamma=0.7)
        c = c_star_pointwise(model, 1.0)
        assert 0.0 < c <= 2.0 * 0.7 / 0.3


class TestBangBang:
    def test_regions(self):
        model = EX2.model()
        # spending pays where delta(x) rho(x) > lam(x), the upper region here
        assert c_star_bangbang(model, EX2.x_star + 0.5) is BangBang.MAX
        assert c_star_bangbang(model, EX2.x_star - 0.5) is BangBang.ZERO

    def test_switch_point(self):
        assert EX2.x_star == pytest.approx(3.0, abs=1e-12)

    def test_policy_threshold(self):
        pol = EX2.policy(1e3)
        assert isinstance(pol, BangBangPolicy)
        assert pol.cap == 1e3
        assert pol.threshold == pytest.approx(3.0, abs=1e-12)


# mpmath (dps = 40): findroot for C0, then quadrature of
# K (1+y) exp(nu y - K (y + y^2/2)) over [x, inf), normalized by [0, inf)
EX1_C0 = 0.8190024875775821945956
EX1_K = 0.552493781056044513511
EX1_VALUES = [
    (0.5, 0.7302189900749298951148),
    (1.0, 0.4668866802527304931493),
    (2.0, 0.1273056045479199776785),
    (4.0, 0.001836544177476611863448),
]


class TestExampleOne:
    def test_constants(self):
        assert EX1.c0 == pytest.approx(EX1_C0, abs=1e-12)
        assert EX1.drift_ratio == pytest.approx(EX1_K, abs=1e-12)
        a, b, c, d = EX1.coefficients
        assert (a, b) == (1.0, 1.0)
        assert c == pytest.approx(0.1 - EX1_K, abs=1e-12)
        assert d == pytest.approx(EX1_K / 2.0, abs=1e-12)

    @pytest.mark.parametrize("x,expected", EX1_VALUES)
    def test_closed_form_reference(self, x, expected):
        assert closed_form_state_ex1(EX1, x) == pytest.approx(expected, rel=1e-12)

    def test_boundary(self):
        assert closed_form_state_ex1(EX1, 0.0) == 1.0

    def test_two_routes_agree(self):
        model = EX1.model()
        ev = StateRuinEvaluator(model, EX1.nu, lambda x: c_star_pointwise(model, x))
        for x in np.linspace(0.25, 5.0, 8):
            assert abs(ev.value(float(x)) - closed_form_state_ex1(EX1, float(x))) < 1e-8


# mpmath (dps = 40): piecewise quadrature with the exact exponent integral,
# unbounded spending limit
EX2_VALUES = [
    (1.0, 0.4684717376375121941238),
    (3.0, 0.2133203362211506422941),
    (5.0, 0.1170726827336574920218),
    (8.0, 0.04759820078394223921248),
]


class TestExampleTwo:
    @pytest.mark.parametrize("x,expected", EX2_VALUES)
    def test_closed_form_reference(self, x, expected):
        assert closed_form_state_ex2(EX2, x) == pytest.approx(expected, rel=1e-11)

    def test_boundary(self):
        assert closed_form_state_ex2(EX2, 0.0) == 1.0

    def test_continuity_at_switch(self):
        xs = EX2.x_star
        below = closed_form_state_ex2(EX2, xs)
        above = closed_form_state_ex2(EX2, np.nextafter(xs, np.inf))
        assert abs(below - above) <= 1e-10

    def test_decay_exponent_above_switch(self):
        # log V is affine with slope -(delta0 - nu) above the switch
        xs = np.linspace(5.0, 15.0, 21)
        logs = [math.log(closed_form_state_ex2(EX2, float(x))) for x in xs]
        slope = np.polyfit(xs, logs, 1)[0]
        assert slope == pytest.approx(-0.3, rel=0.05)

    def test_not_exponential_below_switch(self):
        # below the switch the local log-slope moves; above it is flat
        def local_slope(x, h=1e-4):
            return (
                math.log(closed_form_state_ex2(EX2, x + h))
                - math.log(closed_form_state_ex2(EX2, x - h))
            ) / (2.0 * h)

        lo = local_slope(0.5), local_slope(2.5)
        hi = local_slope(4.0), local_slope(10.0)
        assert abs(lo[0] - lo[1]) / abs(lo[0]) > 0.05
        assert abs(hi[0] - hi[1]) / abs(hi[0]) < 1e-6

    def test_quadrature_matches_unbounded_policy(self):
        ev = StateRuinEvaluator(EX2.model(), EX2.nu, EX2.policy(None))
        for x in (0.5, 2.0, 3.0, 5.0, 8.0):
            assert abs(ev.value(x) - closed_form_state_ex2(EX2, x)) < 1e-8

    def test_capped_policy_close_to_limit(self):
        ev = StateRuinEvaluator(EX2.model(), EX2.nu, EX2.policy(1e3))
        for x in (1.0, 5.0):
            assert abs(ev.value(x) - closed_form_state_ex2(EX2, x)) < 0.01

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            StateExampleIIParams(rho0=1.0, c1=1.0, c2=1.0, lam0=1.0, delta0=0.4, nu=0.1)
        with pytest.raises(ValueError):
            # needs nu < delta0
            StateExampleIIParams(rho0=1.0, c1=1.0, c2=1.0, lam0=1.2, delta0=0.05, nu=0.1)
        with pytest.raises(ValueError):
            # needs delta0 < nu + lam0
            StateExampleIIParams(rho0=1.0, c1=1.0, c2=1.0, lam0=1.2, delta0=1.5, nu=0.1)

    def test_no_spending_comparator(self):
        # t = 1 + x; (nu t^(1-lam0) + (lam0-1) t^(-lam0)) / (lam0 + nu - 1)
        v1 = state_ex2_no_investment(EX2, 1.0)
        t = 2.0
        expected = (0.1 * t**-0.2 + 0.2 * t**-1.2) / 0.3
        assert v1 == pytest.approx(expected, rel=1e-12)
        assert state_ex2_no_investment(EX2, 0.0) == pytest.approx(1.0, rel=1e-12)
        assert v1 > closed_form_state_ex2(EX2, 1.0)


class TestEvaluator:
    def test_boundary_values(self):
        ev = StateRuinEvaluator(EX1.model(), EX1.nu, EX1.c0)
        assert ev.value(0.0) == 1.0
        assert ev.value(1e9) == 0.0

    def test_monotone_decreasing(self):
        ev = StateRuinEvaluator(EX1.model(), EX1.nu, EX1.c0)
        vals = [ev.value(x) for x in np.linspace(0.0, 8.0, 17)]
        assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))

    def test_constant_policy_matches_exponential(self):
        # constant coefficients and a constant rate give exp(-alpha x) with
        # alpha solving (rho + C) a = (lam + delta C^gamma)(1 - L(a))
        model = StateModel.constant(rho=0.1, lam=0.1, delta=1.0, gamma=0.5)
        c = 0.05366750419289197
        ev = StateRuinEvaluator(model, 0.1, c)
        rate = 0.1 + 1.0 * math.sqrt(c)
        drift = 0.1 + c
        # Exp(nu): alpha = rate/drift - nu
        alpha = rate / drift - 0.1
        for x in (0.5, 1.0, 3.0):
            assert ev.value(x) == pytest.approx(math.exp(-alpha * x), rel=1e-7)

    def test_one_shot_wrapper(self):
        got = ruin_probability_quadrature(EX1.model(), EX1.nu, EX1.c0, 1.0)
        ev = StateRuinEvaluator(EX1.model(), EX1.nu, EX1.c0)
        assert got == pytest.approx(ev.value(1.0), rel=1e-12)

    def test_polynomial_tail_rejected(self):
        # zero spending in the rational family leaves r -> nu, which never
        # clears the decay margin; the evaluator refuses rather than truncate
        with pytest.raises(NonIntegrable):
            StateRuinEvaluator(EX2.model(), EX2.nu, 0.0)


class TestStateModelValidation:
    def test_affine(self):
        with pytest.raises(ValueError):
            StateModel.affine(rho0=1.0, lam0=0.1, delta0=1.0, c1=-0.5, c2=1.0, gamma=0.5)
        with pytest.raises(ValueError):
            StateModel.affine(rho0=1.0, lam0=0.1, delta0=1.0, c1=1.0, c2=0.0, gamma=0.5)

    def test_rational(self):
        with pytest.raises(ValueError):
            StateModel.rational(rho0=0.0, c1=1.0, c2=1.0, lam0=1.2, delta0=0.4, nu=0.1)

    def test_constant(self):
        with pytest.raises(ValueError):
            StateModel.constant(rho=1.0, lam=-0.1, delta=1.0, gamma=0.5)
