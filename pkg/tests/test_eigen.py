"""Eigenpair shooting, eigenvalue comparison and norm-ratio checks.

The analytic anchor is the model with K = N-1 at half mass, where the
first eigenfunction is cos(t) with eigenvalue N; everything else is
cross-checked against the independent finite-element minimizer or pinned
by frozen shooting values reproduced at build time.
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from talenti_kit import eigen
from talenti_kit.errors import (
    InvalidMass,
    InvalidParameter,
    NoBracket,
    NoCrossing,
)
from talenti_kit.eigen import (
    EigenPair,
    alpha_from_lambda,
    chiti_compare,
    faber_krahn_check,
    first_eigenpair,
    lp_norm,
    model_eigenpair,
    rayleigh_fem,
    reverse_holder,
    stability_deficit,
)
from talenti_kit.radial_poisson import (
    RadialSolution,
    WeightedInterval,
    weak_residual,
)
from talenti_kit.talenti_check import make_shifted_cap, model_for

# frozen shooting eigenvalues, reproduced by the FEM oracle to its
# O(h^2) bias in the cross-check tests below
LAM_CAP_P15 = 3.0751053538814097
LAM_CAP_P2 = 4.1252406292185455
LAM_CAP_P3 = 6.007383560303177
LAM_MODEL_04_P2 = 3.947492993543478


@pytest.fixture(scope="module")
def cap():
    return make_shifted_cap(2.0, 3.0, 0.3)


@pytest.fixture(scope="module")
def cap_pair_p2(cap):
    return first_eigenpair(cap, 0.4, 2.0)


@pytest.fixture(scope="module")
def chiti_pipeline(cap_pair_p2):
    """Instance pair, matched mass and the model pair at that mass."""
    u = cap_pair_p2
    alpha = alpha_from_lambda(model_for(2.0, 3.0), 2.0, u.lam, 0.4)
    z = model_eigenpair(2.0, 3.0, 2.0, alpha)
    return u, alpha, z


class TestAnalyticAnchor:
    @pytest.mark.parametrize("N", [3.0, 4.0, 5.0])
    def test_half_mass_eigenvalue_is_dimension(self, N):
        pair = model_eigenpair(N - 1.0, N, 2.0, 0.5)
        assert pair.lam == pytest.approx(N, rel=1e-7)

    @pytest.mark.parametrize("N", [3.0, 4.0, 5.0])
    def test_half_mass_eigenfunction_is_cosine(self, N):
        pair = model_eigenpair(N - 1.0, N, 2.0, 0.5)
        grid = np.linspace(0.0, pair.r_alpha, 801)
        assert np.max(np.abs(pair.z_at(grid) - np.cos(grid))) < 1e-6

    def test_frozen_cap_eigenvalues(self, cap):
        for p, lam in [(1.5, LAM_CAP_P15), (2.0, LAM_CAP_P2),
                       (3.0, LAM_CAP_P3)]:
            pair = first_eigenpair(cap, 0.4, p)
            assert pair.lam == pytest.approx(lam, rel=5e-11)

    def test_profile_shape(self, cap_pair_p2):
        pair = cap_pair_p2
        grid = pair.sol.grid
        assert pair.z_at(0.0) == pytest.approx(1.0, abs=1e-12)
        assert pair.zprime_at(0.0) == 0.0
        assert pair.z_at(pair.r_alpha) == 0.0
        assert np.all(np.diff(pair.sol.w) <= 1e-12)
        assert np.all(pair.sol.w >= 0.0)


class TestConsistency:
    @pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
    def test_rayleigh_quotient_matches_eigenvalue(self, p):
        pair = model_eigenpair(2.0, 3.0, p, 0.4)
        assert abs(pair.rayleigh() - pair.lam) <= 1e-6 * pair.lam

    def test_rayleigh_on_instance(self, cap_pair_p2):
        pair = cap_pair_p2
        assert abs(pair.rayleigh() - pair.lam) <= 1e-6 * pair.lam

    @pytest.mark.parametrize("p", [2.0, 3.0])
    def test_weak_residual_of_eigen_datum(self, cap, p):
        pair = first_eigenpair(cap, 0.4, p)
        assert weak_residual(pair.sol, pair.problem()) <= 1e-6

    def test_mass_at_is_flux(self, cap_pair_p2):
        # int_0^rho lam z^{p-1} dm recomputed by quadrature
        from talenti_kit import numerics
        pair = cap_pair_p2
        dens = pair.space.density

        def datum(t):
            return pair.lam * np.asarray(pair.z_at(t), dtype=float) * \
                np.asarray(dens(t), dtype=float)

        for rho in (0.3, 0.7, pair.r_alpha):
            direct = numerics.integrate(datum, 0.0, rho,
                                        numerics.Tolerance(rel=1e-11, abs=1e-15))
            assert pair.sol.mass_at(rho) == pytest.approx(direct, rel=1e-8)

    def test_density_scaling_invariance(self, cap):
        scaled_space = WeightedInterval(lambda t: 3.0 * cap.density(t),
                                        cap.length, cd=cap.cd)
        a = first_eigenpair(cap, 0.4, 2.0)
        b = first_eigenpair(scaled_space, 0.4, 2.0)
        assert b.lam == pytest.approx(a.lam, rel=1e-9)

    def test_scaled_profile_keeps_lambda_and_rayleigh(self):
        pair = model_eigenpair(2.0, 3.0, 2.0, 0.5)
        big = pair.scaled(3.7)
        assert big.lam == pair.lam
        assert big.rayleigh() == pytest.approx(pair.rayleigh(), rel=1e-12)
        assert lp_norm(big, 2.0) == pytest.approx(3.7 * lp_norm(pair, 2.0),
                                                  rel=1e-12)
        with pytest.raises(InvalidParameter):
            pair.scaled(-1.0)

    def test_validation(self, cap):
        with pytest.raises(InvalidMass):
            first_eigenpair(cap, 0.0, 2.0)
        with pytest.raises(InvalidMass):
            first_eigenpair(cap, 1.0, 2.0)
        with pytest.raises(InvalidParameter):
            first_eigenpair(cap, 0.4, 1.0)


class TestFemCrossCheck:
    def test_linear_case_agrees(self, cap):
        fem = rayleigh_fem(cap, 0.4, 2.0)
        assert fem == pytest.approx(LAM_CAP_P2, rel=1e-3)
        # first-order elements should do much better than the band
        assert fem == pytest.approx(LAM_CAP_P2, rel=1e-5)

    @pytest.mark.parametrize("p,lam", [(1.5, LAM_CAP_P15), (3.0, LAM_CAP_P3)])
    def test_nonlinear_descent_agrees(self, cap, p, lam):
        assert rayleigh_fem(cap, 0.4, p) == pytest.approx(lam, rel=1e-3)

    def test_model_case(self):
        fem = rayleigh_fem(WeightedInterval.from_model(model_for(2.0, 3.0)),
                           0.5, 2.0)
        assert fem == pytest.approx(3.0, rel=1e-4)


class TestAlphaFromLambda:
    def test_fixed_point(self):
        lam = model_eigenpair(2.0, 3.0, 2.0, 0.45).lam
        assert alpha_from_lambda(model_for(2.0, 3.0), 2.0, lam, 0.45) == 0.45

    def test_half_mass_anchor(self):
        alpha = alpha_from_lambda(model_for(2.0, 3.0), 2.0, 3.0, 0.7)
        assert alpha == pytest.approx(0.5, abs=1e-6)

    def test_larger_target_means_smaller_mass(self):
        lam_up = model_eigenpair(2.0, 3.0, 2.0, 0.6).lam
        alpha = alpha_from_lambda(model_for(2.0, 3.0), 2.0, 2.0 * lam_up, 0.6)
        assert 0.0 < alpha < 0.6
        check = model_eigenpair(2.0, 3.0, 2.0, alpha).lam
        assert check == pytest.approx(2.0 * lam_up, rel=1e-8)

    def test_no_bracket_below_upper_eigenvalue(self):
        lam_up = model_eigenpair(2.0, 3.0, 2.0, 0.7).lam
        with pytest.raises(NoBracket):
            alpha_from_lambda(model_for(2.0, 3.0), 2.0, 0.5 * lam_up, 0.7)


class TestFaberKrahn:
    def test_model_instance_equality(self):
        cap0 = make_shifted_cap(2.0, 3.0, 0.0)
        fk = faber_krahn_check(cap0, 0.4, 2.0)
        assert abs(fk.margin) <= 1e-6

    @pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
    def test_cap_margin_nonnegative(self, cap, p):
        fk = faber_krahn_check(cap, 0.4, p)
        assert fk.margin >= -1e-8
        assert fk.lambda_instance >= fk.lambda_model - 1e-8

    def test_cap_margin_strict(self, cap):
        fk = faber_krahn_check(cap, 0.4, 2.0)
        assert fk.margin > 0.1
        assert fk.lambda_model == pytest.approx(LAM_MODEL_04_P2, rel=1e-10)

    def test_untagged_space_rejected(self):
        plain = WeightedInterval(lambda t: np.exp(-np.asarray(t, dtype=float)),
                                 1.0)
        with pytest.raises(InvalidParameter):
            faber_krahn_check(plain, 0.4, 2.0)


class TestChiti:
    def test_single_crossing_on_cap(self, chiti_pipeline):
        u, alpha, z = chiti_pipeline
        r1, viol = chiti_compare(u, z, 1.0)
        assert 0.0 < r1 < z.r_alpha
        assert viol <= 1e-6

    def test_two_sided_ordering(self, chiti_pipeline):
        u, alpha, z = chiti_pipeline
        r1, _ = chiti_compare(u, z, 1.0)
        c = lp_norm(u, 1.0) / lp_norm(z, 1.0)
        x = np.linspace(0.0, z.r_alpha, 2001)
        s = np.minimum(np.asarray(z.space.cumulative(x)), u.v)
        ustar = np.asarray(u.sol.w_at(u.space.inverse_cumulative(s)))
        d = ustar - c * np.asarray(z.z_at(x))
        assert np.max(d[x <= r1]) <= 1e-6
        assert np.min(d[x >= r1]) >= -1e-6

    def test_model_degenerate_equality(self):
        cap0 = make_shifted_cap(2.0, 3.0, 0.0)
        u = first_eigenpair(cap0, 0.4, 2.0)
        alpha = alpha_from_lambda(model_for(2.0, 3.0), 2.0, u.lam, 0.4)
        z = model_eigenpair(2.0, 3.0, 2.0, alpha)
        r1, viol = chiti_compare(u, z, 1.0)
        assert r1 == z.r_alpha
        assert viol == 0.0

    def test_one_sided_difference_raises(self):
        z = model_eigenpair(2.0, 3.0, 2.0, 0.4)
        mid, wid, amp = 0.5 * z.r_alpha, 0.02 * z.r_alpha, 5e-6
        base = z.sol

        def w_at(t):
            arr = np.asarray(base.w_at(t), dtype=float)
            tt = np.asarray(t, dtype=float)
            return arr + amp * np.exp(-(((tt - mid) / wid) ** 2))

        sol = RadialSolution(grid=base.grid, w=np.asarray(w_at(base.grid)),
                             wprime=base.wprime, p=2.0, r1=base.r1,
                             w_at=w_at, wprime_at=base.wprime_at,
                             mass_at=base.mass_at)
        bumped = EigenPair(z.lam, sol, 2.0, z.space, z.v, ("sup", 1.0))
        with pytest.raises(NoCrossing):
            chiti_compare(bumped, z, 1.0)

    def test_validation(self, chiti_pipeline):
        u, _, z = chiti_pipeline
        with pytest.raises(InvalidParameter):
            chiti_compare(u, z, 0.0)
        mismatched = model_eigenpair(2.0, 3.0, 3.0, 0.4)
        with pytest.raises(InvalidParameter):
            chiti_compare(u, mismatched, 1.0)


class TestReverseHolder:
    def test_instance_dominated_by_model(self, chiti_pipeline):
        u, _, z = chiti_pipeline
        rep = reverse_holder(u, z, 1.0, [1.0, 2.0, 5.0])
        for t in rep.t_grid:
            assert rep.ratios_instance[t] <= rep.ratios_model[t] + 1e-8
        # strict gap once t exceeds the base exponent
        assert rep.ratios_model[2.0] - rep.ratios_instance[2.0] > 1e-6
        assert rep.ratios_model[5.0] - rep.ratios_instance[5.0] > 1e-6

    def test_base_exponent_ratio_is_one(self, chiti_pipeline):
        u, _, z = chiti_pipeline
        rep = reverse_holder(u, z, 1.0, [1.0, 2.0])
        assert rep.ratios_instance[1.0] == 1.0
        assert rep.ratios_model[1.0] == 1.0

    def test_model_against_itself_is_equality(self):
        z = model_eigenpair(2.0, 3.0, 2.0, 0.4)
        rep = reverse_holder(z, z, 1.0, [1.0, 2.0, 5.0])
        for t in rep.t_grid:
            assert rep.ratios_instance[t] == pytest.approx(
                rep.ratios_model[t], abs=1e-8)

    def test_delta_only_for_matching_base(self, chiti_pipeline):
        u, _, z = chiti_pipeline
        assert reverse_holder(u, z, 1.0, [2.0]).delta >= 0.0
        assert math.isnan(reverse_holder(u, z, 2.0, [2.0, 3.0]).delta)

    def test_exponent_below_base_rejected(self, chiti_pipeline):
        u, _, z = chiti_pipeline
        with pytest.raises(InvalidParameter):
            reverse_holder(u, z, 2.0, [1.0])


class TestStabilityDeficit:
    def test_model_self_deficit_vanishes(self):
        z = model_eigenpair(2.0, 3.0, 2.0, 0.4)
        assert stability_deficit(z, z, 2.0, [2.0, 3.0]) <= 1e-10

    def test_grows_with_shift(self):
        model = model_for(2.0, 3.0)
        deltas = []
        for a in (0.1, 0.25, 0.4):
            space = make_shifted_cap(2.0, 3.0, a)
            u = first_eigenpair(space, 0.4, 2.0)
            alpha = alpha_from_lambda(model, 2.0, u.lam, 0.4)
            z = model_eigenpair(2.0, 3.0, 2.0, alpha)
            deltas.append(stability_deficit(u, z, 2.0, [2.0, 3.0]))
        assert deltas[0] > 0.0
        assert deltas[0] < deltas[1] < deltas[2]

    def test_subquadratic_branch_formula(self, cap):
        p = 1.5
        u = first_eigenpair(cap, 0.4, p)
        alpha = alpha_from_lambda(model_for(2.0, 3.0), p, u.lam, 0.4)
        z = model_eigenpair(2.0, 3.0, p, alpha)
        got = stability_deficit(u, z, p, [1.0, 2.0])
        c = lp_norm(u, p - 1.0) / lp_norm(z, p - 1.0)
        want = max(
            max(c * lp_norm(z, t) - lp_norm(u, t), 0.0) ** (p - 1.0)
            for t in (1.0, 2.0))
        assert got == pytest.approx(max(want, 0.0), rel=1e-12)

    def test_exponents_must_exceed_p_minus_one(self, chiti_pipeline):
        u, _, z = chiti_pipeline
        with pytest.raises(InvalidParameter):
            stability_deficit(u, z, 2.0, [1.0, 2.0])
        with pytest.raises(InvalidParameter):
            stability_deficit(u, z, 2.0, [])


class TestMassCoordinateDerivative:
    """The rearranged eigenfunction against its isoperimetric bound.

    In mass coordinates the model eigenfunction saturates
    -dz/ds = M(s)^{1/(p-1)} / I(s)^{p/(p-1)} with M the cumulative
    datum mass, and instance eigenfunctions sit below the same
    right-hand side built from the model profile.
    """

    @pytest.mark.parametrize("p", [2.0, 3.0])
    def test_model_equality(self, p):
        pair = model_eigenpair(2.0, 3.0, p, 0.4)
        model = model_for(2.0, 3.0)
        e = 1.0 / (p - 1.0)
        s = np.linspace(0.05 * 0.4, 0.95 * 0.4, 300)
        I = np.asarray(model.isoperimetric_profile(s))
        rho = np.asarray(model.inverse_cumulative(s))
        rhs = np.asarray(pair.sol.mass_at(rho)) ** e / I ** (1.0 + e)
        ds = 1e-6 * 0.4
        up = np.asarray(pair.z_at(model.inverse_cumulative(s + ds)))
        dn = np.asarray(pair.z_at(model.inverse_cumulative(s - ds)))
        lhs = -(up - dn) / (2.0 * ds)
        assert np.max(np.abs(lhs - rhs) / rhs) < 1e-4

    def test_instance_inequality(self, cap, cap_pair_p2):
        pair = cap_pair_p2
        model = model_for(2.0, 3.0)
        s = np.linspace(0.02 * 0.4, 0.98 * 0.4, 300)
        I = np.asarray(model.isoperimetric_profile(s))
        rho = np.asarray(cap.inverse_cumulative(s))
        rhs = np.asarray(pair.sol.mass_at(rho)) / I ** 2.0
        ds = 1e-6 * 0.4
        up = np.asarray(pair.z_at(cap.inverse_cumulative(s + ds)))
        dn = np.asarray(pair.z_at(cap.inverse_cumulative(s - ds)))
        lhs = -(up - dn) / (2.0 * ds)
        assert np.max(lhs - rhs) <= 1e-6


class TestPropertySweep:
    @settings(max_examples=5, deadline=None)
    @given(shift=st.floats(0.0, 0.5), v=st.floats(0.25, 0.6),
           p=st.floats(1.4, 3.2))
    def test_shooting_pairs_are_consistent(self, shift, v, p):
        space = make_shifted_cap(2.0, 3.0, shift)
        fk = faber_krahn_check(space, v, p)
        assert fk.margin >= -1e-8
        pair = first_eigenpair(space, v, p, seed=fk.lambda_instance)
        assert pair.z_at(0.0) == pytest.approx(1.0, abs=1e-12)
        assert np.all(np.diff(pair.sol.w) <= 1e-12)
        assert abs(pair.rayleigh() - pair.lam) <= 1e-6 * pair.lam
