"""Model segment geometry.

The (K=2, N=3) segment has closed forms: L = pi, c = pi/2,
h(t) = 2 sin(t)^2 / pi and H(t) = (t - sin t cos t)/pi.  Frozen decimals
below come from 30-digit mpmath evaluations of those forms.
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from talenti_kit.errors import InvalidParameter, OutOfDomain
from talenti_kit.model_space import make_model


@pytest.fixture(scope="module")
def ms23():
    return make_model(2.0, 3.0)


class TestClosedFormAnchors:
    def test_segment_length(self, ms23):
        assert ms23.L == pytest.approx(math.pi, rel=1e-14)

    def test_normalizing_constant(self, ms23):
        assert ms23.c == pytest.approx(math.pi / 2.0, rel=1e-10)

    def test_density_values(self, ms23):
        assert ms23.density(math.pi / 2.0) == pytest.approx(2.0 / math.pi, rel=1e-10)
        assert ms23.density(math.pi / 4.0) == pytest.approx(1.0 / math.pi, rel=1e-10)
        assert ms23.density(0.0) == 0.0
        assert ms23.density(ms23.L) == 0.0

    def test_cumulative_values(self, ms23):
        assert ms23.cumulative(math.pi / 4.0) == pytest.approx(
            0.0908450569081047, abs=1e-12)
        assert abs(ms23.cumulative(ms23.L / 2.0) - 0.5) <= 1e-10
        assert ms23.cumulative(0.0) == 0.0
        assert ms23.cumulative(ms23.L) == 1.0

    def test_inverse_cumulative_midpoint(self, ms23):
        assert ms23.inverse_cumulative(0.5) == pytest.approx(math.pi / 2.0, abs=1e-11)

    def test_isoperimetric_profile_values(self, ms23):
        # I(v) = h(H^{-1}(v)) via mpmath bisection to 30 digits
        assert ms23.isoperimetric_profile(0.1) == pytest.approx(
            0.336112264527109387, rel=1e-9)
        assert ms23.isoperimetric_profile(0.25) == pytest.approx(
            0.532727254525132060, rel=1e-9)
        assert ms23.isoperimetric_profile(0.4) == pytest.approx(
            0.620780222446247150, rel=1e-9)

    def test_constants(self, ms23):
        cst = ms23.constants()
        assert cst.gamma1 == pytest.approx(2.0 / math.pi, rel=1e-10)
        assert cst.gamma2 == pytest.approx(2.0 / (3.0 * math.pi), rel=1e-10)


class TestInvariants:
    def test_normalization(self, ms23):
        from talenti_kit.numerics import integrate
        total = integrate(ms23.density, 0.0, ms23.L)
        assert abs(total - 1.0) <= 1e-9

    @given(v=st.floats(min_value=0.0, max_value=1.0))
    @settings(max_examples=60, deadline=None)
    def test_round_trip(self, ms23, v):
        t = ms23.inverse_cumulative(v)
        assert abs(ms23.cumulative(t) - v) <= 1e-9

    @given(t=st.floats(min_value=1e-6, max_value=math.pi - 1e-6))
    @settings(max_examples=60, deadline=None)
    def test_small_radius_bounds(self, ms23, t):
        cst = ms23.constants()
        assert ms23.density(t) <= cst.gamma1 * t ** 2.0 * (1.0 + 1e-12)
        assert ms23.cumulative(t) <= cst.gamma2 * t ** 3.0 * (1.0 + 1e-12)

    @given(v=st.floats(min_value=1e-8, max_value=1.0))
    @settings(max_examples=60, deadline=None)
    def test_inverse_lower_bound(self, ms23, v):
        cst = ms23.constants()
        lower = (v / cst.gamma2) ** (1.0 / 3.0)
        assert ms23.inverse_cumulative(v) >= lower * (1.0 - 1e-10)

    def test_density_limit_ratio(self, ms23):
        cst = ms23.constants()
        t = 1e-6
        assert ms23.density(t) / t ** 2.0 == pytest.approx(cst.gamma1, rel=1e-6)
        assert ms23.cumulative(t) / t ** 3.0 == pytest.approx(cst.gamma2, rel=1e-4)

    @given(v=st.floats(min_value=0.001, max_value=0.999))
    @settings(max_examples=40, deadline=None)
    def test_profile_symmetry(self, ms23, v):
        left = ms23.isoperimetric_profile(v)
        right = ms23.isoperimetric_profile(1.0 - v)
        assert abs(left - right) <= 1e-9

    def test_cumulative_symmetry_at_half(self, ms23):
        assert abs(ms23.cumulative(ms23.L / 2.0) - 0.5) <= 1e-10


class TestFractionalDimension:
    def test_non_integer_dimension_normalizes(self):
        ms = make_model(1.0, 2.5)
        assert ms.L == pytest.approx(math.pi * math.sqrt(1.5), rel=1e-14)
        from talenti_kit.numerics import integrate
        assert abs(integrate(ms.density, 0.0, ms.L) - 1.0) <= 1e-9
        assert abs(ms.cumulative(ms.L / 2.0) - 0.5) <= 1e-10

    def test_round_trip_fractional(self):
        ms = make_model(0.7, 4.2)
        for v in [0.01, 0.3, 0.77, 0.99]:
            assert abs(ms.cumulative(ms.inverse_cumulative(v)) - v) <= 1e-9


class TestValidation:
    def test_rejects_nonpositive_curvature(self):
        with pytest.raises(InvalidParameter):
            make_model(0.0, 3.0)
        with pytest.raises(InvalidParameter):
            make_model(-1.0, 3.0)

    def test_rejects_small_dimension(self):
        with pytest.raises(InvalidParameter):
            make_model(2.0, 1.0)

    def test_density_domain_guard(self, ms23):
        with pytest.raises(OutOfDomain):
            ms23.density(-0.5)
        with pytest.raises(OutOfDomain):
            ms23.density(ms23.L + 0.5)

    def test_inverse_domain_guard(self, ms23):
        with pytest.raises(OutOfDomain):
            ms23.inverse_cumulative(1.5)
