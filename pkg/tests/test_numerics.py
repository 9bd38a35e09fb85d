"""Quadrature, root finding and generalized-inverse kernels.

Expected values were frozen from closed forms or 30-digit mpmath
evaluations so the kernels are never compared against themselves.
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from talenti_kit.errors import (
    Divergence,
    InvalidParameter,
    NoBracket,
    OutOfDomain,
)
from talenti_kit.numerics import (
    DEFAULT_TOL,
    Grid,
    MonotoneTable,
    Tolerance,
    find_root,
    generalized_inverse,
    integrate,
)


class Step:
    """Minimal right-continuous nonincreasing step function."""

    def __init__(self, breakpoints, levels):
        self.breakpoints = np.asarray(breakpoints, dtype=float)
        self.levels = np.asarray(levels, dtype=float)


class TestIntegrate:
    def test_sin_squared_over_period(self):
        val = integrate(lambda t: np.sin(t) ** 2, 0.0, math.pi)
        assert val == pytest.approx(math.pi / 2.0, rel=1e-12)

    def test_inverse_sqrt_endpoint_singularity(self):
        val = integrate(lambda t: 1.0 / np.sqrt(t), 0.0, 1.0)
        assert val == pytest.approx(2.0, rel=1e-9)

    def test_right_endpoint_singularity(self):
        val = integrate(lambda t: 1.0 / np.sqrt(1.0 - t), 0.0, 1.0)
        assert val == pytest.approx(2.0, rel=1e-9)

    def test_strong_power_singularity(self):
        # int_0^1 t^-0.9 = 10
        val = integrate(lambda t: t ** -0.9, 0.0, 1.0)
        assert val == pytest.approx(10.0, rel=1e-8)

    def test_log_singularity(self):
        # int_0^1 log(1/t) = 1
        val = integrate(lambda t: -np.log(t), 0.0, 1.0)
        assert val == pytest.approx(1.0, rel=1e-9)

    def test_divergence_detected_for_1_over_t(self):
        with pytest.raises(Divergence):
            integrate(lambda t: 1.0 / t, 0.0, 1.0)

    def test_divergence_detected_for_strong_pole(self):
        with pytest.raises(Divergence):
            integrate(lambda t: t ** -1.5, 0.0, 1.0)

    def test_empty_interval(self):
        assert integrate(np.sin, 1.0, 1.0) == 0.0

    def test_rejects_reversed_interval(self):
        with pytest.raises(InvalidParameter):
            integrate(np.sin, 1.0, 0.0)

    def test_smooth_oscillatory(self):
        # int_0^1 cos(20 t) = sin(20)/20
        val = integrate(lambda t: np.cos(20.0 * t), 0.0, 1.0)
        assert val == pytest.approx(math.sin(20.0) / 20.0, abs=1e-12)

    @given(split=st.floats(min_value=0.1, max_value=0.9))
    @settings(max_examples=25, deadline=None)
    def test_additivity_over_subintervals(self, split):
        f = lambda t: np.exp(-t) * np.cos(3.0 * t)
        whole = integrate(f, 0.0, 1.0)
        parts = integrate(f, 0.0, split) + integrate(f, split, 1.0)
        assert abs(whole - parts) <= 2.0 * DEFAULT_TOL.abs + 1e-11 * abs(whole)


class TestFindRoot:
    def test_cube_root_of_two(self):
        root = find_root(lambda x: x ** 3 - 2.0, 0.0, 2.0)
        assert root == pytest.approx(2.0 ** (1.0 / 3.0), rel=1e-12)

    def test_no_bracket_raises(self):
        with pytest.raises(NoBracket):
            find_root(lambda x: x ** 2 + 1.0, -1.0, 1.0)

    def test_endpoint_root_returned_directly(self):
        assert find_root(lambda x: x - 1.0, 1.0, 2.0) == 1.0

    @given(target=st.floats(min_value=-0.9, max_value=0.9))
    @settings(max_examples=50, deadline=None)
    def test_root_stays_bracketed(self, target):
        g = lambda x: math.tanh(x) - target
        root = find_root(g, -5.0, 5.0)
        assert -5.0 <= root <= 5.0
        assert abs(g(root)) < 1e-9


class TestGeneralizedInverse:
    def setup_method(self):
        # 1 on [0,1), 0.3 on [1,2), 0 beyond
        self.m = Step([1.0, 2.0], [1.0, 0.3, 0.0])

    def test_mid_level(self):
        assert generalized_inverse(self.m, 0.5) == 1.0

    def test_level_hit_exactly(self):
        assert generalized_inverse(self.m, 0.3) == 2.0

    def test_ess_sup_convention_at_zero(self):
        assert generalized_inverse(self.m, 0.0) == 2.0

    def test_above_total_gives_zero(self):
        assert generalized_inverse(self.m, 1.5) == 0.0

    def test_negative_s_rejected(self):
        with pytest.raises(InvalidParameter):
            generalized_inverse(self.m, -0.1)

    def test_never_vanishing_level(self):
        m = Step([1.0], [2.0, 0.5])
        assert generalized_inverse(m, 0.25) == math.inf
        assert generalized_inverse(m, 0.0) == math.inf

    @given(st.lists(st.floats(min_value=0.01, max_value=10.0), min_size=1, max_size=8))
    @settings(max_examples=60, deadline=None)
    def test_nonincreasing_and_left_continuous(self, drops):
        # build a strictly decreasing staircase hitting zero
        bps = np.cumsum(np.abs(drops)) / 2.0
        lvs = np.concatenate([np.sort(np.abs(drops))[::-1], [0.0]])
        lvs = np.maximum.accumulate(lvs[::-1])[::-1]  # enforce nonincreasing
        m = Step(bps, lvs)
        svals = np.linspace(0.0, float(lvs[0]) * 1.1, 37)
        out = [generalized_inverse(m, s) for s in svals]
        finite = [o for o in out if math.isfinite(o)]
        assert all(x >= y for x, y in zip(finite, finite[1:]))


class TestGrid:
    def test_cosine_grid_clusters_at_ends(self):
        g = Grid.cosine(0.0, 1.0, 64)
        assert len(g) == 65
        assert g.spacing[0] < g.spacing[31]

    def test_rejects_non_monotone(self):
        with pytest.raises(InvalidParameter):
            Grid(np.array([0.0, 1.0, 1.0]))


class TestTolerance:
    def test_defaults(self):
        t = Tolerance()
        assert t.rel == 1e-10 and t.abs == 1e-12 and t.max_subdivisions == 60

    def test_rejects_tiny_rel(self):
        with pytest.raises(InvalidParameter):
            Tolerance(rel=1e-17)

    def test_rejects_nonpositive_abs(self):
        with pytest.raises(InvalidParameter):
            Tolerance(abs=0.0)


class TestMonotoneTable:
    def setup_method(self):
        self.table = MonotoneTable(lambda t: np.sin(t) ** 2 * (2.0 / math.pi),
                                   math.pi, n_cells=1024)

    def test_cumulative_against_closed_form(self):
        for t in [0.3, math.pi / 4.0, 1.5, 2.9]:
            exact = (t - math.sin(t) * math.cos(t)) / math.pi
            assert self.table.cumulative(t) == pytest.approx(exact, abs=1e-13)

    def test_total_is_one(self):
        assert self.table.total == pytest.approx(1.0, abs=1e-13)

    def test_inverse_round_trip(self):
        vs = np.linspace(0.0, 1.0, 23)
        ts = self.table.inverse(vs)
        back = self.table.cumulative(ts)
        assert np.max(np.abs(back - vs)) < 1e-12

    def test_out_of_domain(self):
        with pytest.raises(OutOfDomain):
            self.table.cumulative(math.pi + 0.1)
        with pytest.raises(OutOfDomain):
            self.table.inverse(1.1)
