"""Root finding, half-line quadrature, and the complementary error function."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dualruin.numerics import (
    Bracket,
    NoBracketFound,
    NoSignChange,
    NumericsError,
    Tolerance,
    erfc,
    expand_bracket,
    find_root,
    integrate_semiinf,
)


class TestFindRoot:
    def test_cosine_root(self):
        root = find_root(math.cos, Bracket(1.0, 2.0))
        assert abs(root - math.pi / 2) < 1e-12

    def test_cubic_root(self):
        f = lambda x: x**3 - 2.0 * x - 5.0
        root = find_root(f, Bracket(2.0, 3.0))
        assert abs(f(root)) < 1e-10

    def test_flat_root(self):
        # f' = 0 at the root starves the secant step; bisection must carry it
        root = find_root(lambda x: x**3, Bracket(-1.0, 2.0))
        assert abs(root) < 1e-10

    def test_descending_orientation(self):
        root = find_root(lambda x: 1.0 - x, Bracket(0.0, 5.0))
        assert abs(root - 1.0) < 1e-12

    def test_endpoint_zero_returned(self):
        assert find_root(lambda x: x - 2.0, Bracket(2.0, 3.0)) == 2.0

    def test_no_sign_change(self):
        with pytest.raises(NoSignChange):
            find_root(lambda x: x * x + 1.0, Bracket(-1.0, 1.0))

    def test_nan_rejected(self):
        with pytest.raises(NumericsError):
            find_root(lambda x: math.nan, Bracket(0.0, 1.0))

    def test_tight_tolerance_honored(self):
        tol = Tolerance(abs_x=1e-15, abs_f=1e-14, max_iter=200)
        root = find_root(lambda x: math.expm1(x) - 1.0, Bracket(0.0, 2.0), tol)
        assert abs(root - math.log(2.0)) < 1e-13

    @given(st.floats(-50.0, 50.0), st.floats(0.1, 10.0))
    @settings(max_examples=50, deadline=None)
    def test_recovers_planted_root(self, r, slope):
        f = lambda x: slope * (x - r) ** 3 + slope * (x - r)
        root = find_root(f, Bracket(r - 7.3, r + 11.1))
        assert abs(root - r) < 1e-8

    def test_bracket_validation(self):
        with pytest.raises(ValueError):
            Bracket(2.0, 1.0)
        with pytest.raises(ValueError):
            Bracket(0.0, math.inf)


class TestExpandBracket:
    def test_finds_crossing(self):
        f = lambda x: x - 37.5
        b = expand_bracket(f)
        assert f(b.lo) <= 0.0 < f(b.hi)

    def test_small_root(self):
        f = lambda x: x - 1e-7
        b = expand_bracket(f)
        assert b.lo <= 1e-7 <= b.hi

    def test_no_crossing_raises(self):
        with pytest.raises(NoBracketFound):
            expand_bracket(lambda x: -1.0 - x * 0.0, max_expansions=40)


class TestIntegrateSemiinf:
    # closed forms: int_a^inf exp(-k y) dy = exp(-k a)/k,
    # int_0^inf y exp(-y) dy = 1, int_0^inf exp(-y^2) dy = sqrt(pi)/2
    def test_exponential(self):
        assert integrate_semiinf(lambda y: math.exp(-y), 0.0, rel_tol=1e-12) == pytest.approx(1.0, rel=1e-11)

    def test_shifted_exponential(self):
        got = integrate_semiinf(lambda y: math.exp(-2.0 * y), 3.0, rel_tol=1e-12)
        assert got == pytest.approx(math.exp(-6.0) / 2.0, rel=1e-11)

    def test_gamma_weight(self):
        got = integrate_semiinf(lambda y: y * math.exp(-y), 0.0, rel_tol=1e-12)
        assert got == pytest.approx(1.0, rel=1e-11)

    def test_gaussian(self):
        got = integrate_semiinf(lambda y: math.exp(-y * y), 0.0, rel_tol=1e-12)
        assert got == pytest.approx(math.sqrt(math.pi) / 2.0, rel=1e-11)

    def test_sharp_peak(self):
        # mass concentrated far from the lower limit
        got = integrate_semiinf(lambda y: math.exp(-((y - 8.0) ** 2) * 50.0), 0.0, rel_tol=1e-11)
        assert got == pytest.approx(math.sqrt(math.pi / 50.0), rel=1e-9)

    def test_rel_tol_range(self):
        with pytest.raises(ValueError):
            integrate_semiinf(math.exp, 0.0, rel_tol=1e-15)
        with pytest.raises(ValueError):
            integrate_semiinf(math.exp, 0.0, rel_tol=0.5)

    def test_lower_limit_finite(self):
        with pytest.raises(ValueError):
            integrate_semiinf(lambda y: 0.0, math.inf)


# mpmath (mp.dps = 40): mp.erfc(x)
_ERFC_TABLE = [
    (-8.0, 2.0),
    (-2.5, 1.99959304798255504106),
    (-1.0, 1.842700792949714869341),
    (-0.5, 1.520499877813046537683),
    (0.25, 0.7236736098317630670149),
    (1.0, 0.1572992070502851306588),
    (1.9, 0.007209570764742532762784),
    (2.0, 0.004677734981047265837931),
    (2.1, 0.002979466656332984285691),
    (3.0, 0.00002209049699858544137278),
    (5.0, 1.537459794428034850188e-12),
    (10.0, 2.088487583762544757001e-45),
]


class TestErfc:
    @pytest.mark.parametrize("x,expected", _ERFC_TABLE)
    def test_reference_values(self, x, expected):
        assert erfc(x) == pytest.approx(expected, rel=5e-13, abs=1e-300)

    def test_origin(self):
        assert erfc(0.0) == 1.0

    def test_against_stdlib_dense(self):
        # both branches and the crossover, absolute error target 1e-13
        for i in range(-600, 601):
            x = i / 60.0
            assert abs(erfc(x) - math.erfc(x)) < 1e-13, x

    @given(st.floats(0.0, 10.0))
    @settings(max_examples=200, deadline=None)
    def test_reflection(self, x):
        assert erfc(-x) + erfc(x) == pytest.approx(2.0, abs=1e-13)

    @given(st.floats(-10.0, 10.0), st.floats(-10.0, 10.0))
    @settings(max_examples=100, deadline=None)
    def test_monotone_decreasing(self, a, b):
        lo, hi = min(a, b), max(a, b)
        assert erfc(lo) >= erfc(hi)
