"""First Dirichlet eigenpairs of the weighted p-Laplacian on an interval.

On a weighted interval with density w the first eigenfunction is the
positive, nonincreasing solution of

    -(w * Phi_p(z'))' = lam * w * Phi_p(z),   Phi_p(x) = |x|^{p-2} x,

with z(0) = 1, z'(0) = 0 and z(r_v) = 0 at the radius enclosing the
prescribed mass fraction v.  Writing m = w * Phi_p(z') for the flux
turns this into the first-order system

    z' = sign(m) |m / w|^{1/(p-1)},    m' = -lam * w * Phi_p(z),

whose first zero moves continuously and monotonically with lam, so the
eigenvalue is the unique lam placing that zero exactly at r_v; a
regula-falsi loop with bisection fallback finds it from a bracket.

The remaining routines compare an instance eigenpair against the model
one: eigenvalue domination, the single-crossing ordering of the
symmetrized eigenfunction, reverse Hoelder norm ratios and the norm
deficit used as a closeness diagnostic.  Model eigenpairs are memoized
per (K, N, p, v) in plain per-process dicts; concurrent suites at worst
duplicate a solve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.integrate import solve_ivp
from scipy.sparse import diags
from scipy.sparse.linalg import eigsh, splu

from . import numerics
from .errors import (
    CheckFailure,
    InvalidMass,
    InvalidParameter,
    NoBracket,
    NoCrossing,
    NonConvergence,
)
from .model_space import ModelSpace
from .radial_poisson import (
    RadialProblem,
    RadialSolution,
    WeightedInterval,
    power_signed,
)
from .talenti_check import model_for

_ATOL = (1e-14, 1e-18)
_NORM_TOL = numerics.Tolerance(rel=1e-11, abs=1e-15)


@dataclass
class EigenPair:
    """Eigenvalue plus the shooting profile and the space it lives on.

    The profile is packaged as a RadialSolution so the weak-residual and
    gradient-norm checks from the Poisson module apply verbatim; its
    mass_at returns the cumulative datum mass int_0^rho lam*z^{p-1} dm,
    which equals minus the flux m and therefore comes straight from the
    integrated system rather than a second quadrature.
    """

    lam: float
    sol: RadialSolution
    p: float
    space: WeightedInterval
    v: float
    normalization: tuple[str, float]

    @property
    def r_alpha(self) -> float:
        return self.sol.r1

    def z_at(self, t):
        return self.sol.w_at(t)

    def zprime_at(self, t):
        return self.sol.wprime_at(t)

    def problem(self) -> RadialProblem:
        """The Poisson problem the eigenfunction solves (datum lam*Phi_p(z))."""
        lam, p, zf = self.lam, self.p, self.sol.w_at

        def datum(t):
            return lam * np.asarray(zf(t), dtype=float) ** (p - 1.0)

        return RadialProblem(space=self.space, p=p, f=datum, r1=self.sol.r1)

    def rayleigh(self) -> float:
        """Rayleigh quotient of the stored profile, for consistency checks."""
        dens = self.space.density
        zp, zf, p = self.sol.wprime_at, self.sol.w_at, self.p
        num = numerics.integrate(
            lambda t: np.abs(zp(t)) ** p * np.asarray(dens(t), dtype=float),
            0.0, self.sol.r1, _NORM_TOL)
        den = numerics.integrate(
            lambda t: np.asarray(zf(t), dtype=float) ** p *
            np.asarray(dens(t), dtype=float),
            0.0, self.sol.r1, _NORM_TOL)
        return num / den

    def scaled(self, c: float) -> "EigenPair":
        """Same eigenpair with the profile multiplied by c > 0."""
        if not (c > 0.0 and math.isfinite(c)):
            raise InvalidParameter(f"scale factor c={c} must be positive")
        base, cp = self.sol, c ** (self.p - 1.0)
        sol = RadialSolution(
            grid=base.grid.copy(), w=c * base.w, wprime=c * base.wprime,
            p=self.p, r1=base.r1,
            w_at=lambda t: c * np.asarray(base.w_at(t), dtype=float),
            wprime_at=lambda t: c * np.asarray(base.wprime_at(t), dtype=float),
            mass_at=lambda t: cp * np.asarray(base.mass_at(t), dtype=float))
        tag, val = self.normalization
        return EigenPair(self.lam, sol, self.p, self.space, self.v,
                         (tag, val * c))


class FaberKrahnResult(NamedTuple):
    lambda_instance: float
    lambda_model: float
    margin: float


@dataclass(frozen=True)
class HolderReport:
    """Norm-ratio comparison between an instance eigenfunction and the model.

    ratios map each exponent t to ||.||_t / ||.||_r; delta is the norm
    deficit over the exponents of t_grid lying above p-1, evaluated only
    when r = p-1 (the normalization the deficit is defined for), else nan.
    """

    t_grid: tuple[float, ...]
    ratios_instance: dict[float, float]
    ratios_model: dict[float, float]
    delta: float
    r: float


def _rhs_factory(space: WeightedInterval, p: float, lam: float):
    dens = space.density
    e = 1.0 / (p - 1.0)
    pm1 = p - 1.0

    def rhs(t, y):
        z, m = y
        w = float(dens(t))
        if w <= 0.0:
            return (0.0, 0.0)
        zp = math.copysign(abs(m / w) ** e, m)
        mp = -lam * w * math.copysign(abs(z) ** pm1, z)
        return (zp, mp)

    return rhs


def _series_start(space: WeightedInterval, p: float, lam: float, eps: float):
    """Initial data at t = eps from the leading-order expansion.

    Near the origin m ~ -lam*W(t) while z stays at 1, and for any
    density behaving like a power the resulting slope integrates to
    (p-1)/p * t * (lam*W/w)^{1/(p-1)} exactly, so the truncation error
    is O(eps^2) relative to the distance from 1.
    """
    W0 = float(space.cumulative(eps))
    w0 = float(np.atleast_1d(np.asarray(space.density(eps), dtype=float))[0])
    z0 = 1.0 - (p - 1.0) / p * eps * (lam * W0 / w0) ** (1.0 / (p - 1.0))
    return z0, -lam * W0


def _first_zero(space: WeightedInterval, p: float, lam: float, eps: float,
                horizon: float, rtol: float) -> float:
    z0, m0 = _series_start(space, p, lam, eps)
    if z0 <= 0.0:
        return eps
    ev = lambda t, y: y[0]
    ev.terminal = True
    ev.direction = -1
    out = solve_ivp(_rhs_factory(space, p, lam), (eps, horizon), (z0, m0),
                    method="DOP853", rtol=rtol, atol=_ATOL, events=ev)
    if out.t_events[0].size:
        return float(out.t_events[0][0])
    return math.inf


def _shooting_lambda(space: WeightedInterval, p: float, r_v: float,
                     seed: float) -> float:
    """Regula falsi with Illinois damping on (first zero of z) - r_v."""
    eps = 1e-6 * r_v
    horizon = r_v + min(0.25 * r_v, 0.9 * (space.length - r_v))
    g = lambda lam: _first_zero(space, p, lam, eps, horizon, 1e-11) - r_v

    lo, hi = 0.1 * seed, 100.0 * seed
    flo, fhi = g(lo), g(hi)
    grow = 0
    while flo <= 0.0:
        # zero already fires below r_v: the true eigenvalue sits lower
        hi, fhi = lo, flo
        lo *= 0.125
        flo = g(lo)
        grow += 1
        if grow > 40:
            raise NonConvergence("no lower bracket for the shooting eigenvalue")
    while fhi > 0.0:
        lo, flo = hi, fhi
        hi *= 8.0
        fhi = g(hi)
        grow += 1
        if grow > 40:
            raise NonConvergence("no upper bracket for the shooting eigenvalue")

    side = 0
    for _ in range(90):
        if hi - lo <= 5e-13 * hi:
            break
        if math.isfinite(flo) and math.isfinite(fhi):
            lam = (lo * fhi - hi * flo) / (fhi - flo)
            if not (lo < lam < hi):
                lam = 0.5 * (lo + hi)
        else:
            lam = 0.5 * (lo + hi)
        f = g(lam)
        if f == 0.0:
            return lam
        if f > 0.0:
            if side > 0 and math.isfinite(fhi):
                fhi *= 0.5
            lo, flo, side = lam, f, 1
        else:
            if side < 0 and math.isfinite(flo):
                flo *= 0.5
            hi, fhi, side = lam, f, -1
    return 0.5 * (lo + hi)


def first_eigenpair(space: WeightedInterval, v: float, p: float,
                    n_grid: int = 2048, seed: float | None = None) -> EigenPair:
    """Shooting solve for the first Dirichlet eigenpair at mass fraction v.

    v is the fraction of the total mass, so the answer is invariant
    under rescaling the density by a constant.  seed anchors the
    eigenvalue bracket [seed/10, 100*seed]; callers holding a nearby
    eigenvalue (model comparisons, parameter sweeps) pass it to skip
    the bracket expansion.
    """
    if not (p > 1.0 and math.isfinite(p)):
        raise InvalidParameter(f"exponent p={p} must exceed 1")
    if not (0.0 < v < 1.0 and math.isfinite(v)):
        raise InvalidMass(f"mass fraction v={v} must lie in (0, 1)")
    r_v = float(space.inverse_cumulative(v * space.total))
    probes = np.linspace(0.0, r_v, 258)[1:]
    if np.any(np.asarray(space.density(probes), dtype=float) <= 0.0):
        raise InvalidParameter("density must stay positive on (0, r_v]")

    if seed is None:
        seed = (math.pi / (2.0 * r_v)) ** p
    lam = _shooting_lambda(space, p, r_v, float(seed))

    eps = 1e-6 * r_v
    z0, m0 = _series_start(space, p, lam, eps)
    out = solve_ivp(_rhs_factory(space, p, lam), (eps, r_v), (z0, m0),
                    method="DOP853", rtol=1e-11, atol=_ATOL,
                    dense_output=True)
    if not out.success:
        raise NonConvergence("final eigenfunction integration failed")
    interp = out.sol
    end = float(interp(r_v)[0])
    if abs(end) > 1e-6:
        raise NonConvergence(
            f"shooting left a boundary mismatch z(r_v)={end:.3e}")

    e = 1.0 / (p - 1.0)
    coef = (p - 1.0) / p
    cum, dens = space.cumulative, space.density

    def _ratio(arr):
        W = np.asarray(cum(arr), dtype=float)
        w = np.asarray(dens(arr), dtype=float)
        return np.where(arr > 0.0, lam * W / np.where(w > 0.0, w, 1.0), 0.0)

    def z_at(t):
        arr = np.atleast_1d(np.asarray(t, dtype=float))
        val = np.zeros_like(arr)
        small = arr <= eps
        if np.any(small):
            a = arr[small]
            val[small] = 1.0 - coef * a * _ratio(a) ** e
        mid = ~small & (arr < r_v)
        if np.any(mid):
            val[mid] = interp(arr[mid])[0]
        val[arr >= r_v] = 0.0
        np.maximum(val, 0.0, out=val)
        return val if np.ndim(t) else float(val[0])

    def zprime_at(t):
        arr = np.atleast_1d(np.asarray(t, dtype=float))
        clipped = np.minimum(arr, r_v)
        val = np.empty_like(clipped)
        small = clipped <= eps
        if np.any(small):
            val[small] = -_ratio(clipped[small]) ** e
        rest = ~small
        if np.any(rest):
            m = interp(clipped[rest])[1]
            w = np.asarray(dens(clipped[rest]), dtype=float)
            val[rest] = power_signed(m / w, e)
        return val if np.ndim(t) else float(val[0])

    def mass_at(rho):
        arr = np.atleast_1d(np.asarray(rho, dtype=float))
        clipped = np.clip(arr, 0.0, r_v)
        val = np.empty_like(clipped)
        small = clipped <= eps
        if np.any(small):
            val[small] = lam * np.asarray(cum(clipped[small]), dtype=float)
        rest = ~small
        if np.any(rest):
            val[rest] = -interp(clipped[rest])[1]
        return val if np.ndim(rho) else float(val[0])

    grid = numerics.Grid.cosine(0.0, r_v, n_grid).nodes
    w = np.asarray(z_at(grid), dtype=float)
    raw = interp(grid[(grid > eps) & (grid < r_v)])[0]
    if raw.size and float(np.min(raw)) < -1e-6:
        raise NonConvergence("eigenfunction went negative inside the domain")
    sol = RadialSolution(grid=grid, w=w,
                         wprime=np.asarray(zprime_at(grid), dtype=float),
                         p=p, r1=r_v, w_at=z_at, wprime_at=zprime_at,
                         mass_at=mass_at)
    return EigenPair(lam=lam, sol=sol, p=p, space=space, v=float(v),
                     normalization=("sup", 1.0))


_PAIR_CACHE: dict[tuple, EigenPair] = {}
_MODEL_IVALS: dict[tuple[float, float], WeightedInterval] = {}


def model_eigenpair(K: float, N: float, p: float, v: float) -> EigenPair:
    """Memoized first eigenpair of the model segment at mass fraction v."""
    key = (float(K), float(N), float(p), round(float(v), 12))
    pair = _PAIR_CACHE.get(key)
    if pair is None:
        mk = (float(K), float(N))
        ival = _MODEL_IVALS.get(mk)
        if ival is None:
            ival = WeightedInterval.from_model(model_for(K, N))
            _MODEL_IVALS[mk] = ival
        pair = first_eigenpair(ival, v, p)
        _PAIR_CACHE[key] = pair
    return pair


def alpha_from_lambda(model: ModelSpace, p: float, lambda_target: float,
                      v_upper: float, rel: float = 1e-9) -> float:
    """Mass fraction alpha <= v_upper whose model eigenvalue hits the target.

    Uses the strict decrease of v -> lambda(v) and its blowup as v -> 0:
    halve alpha until the eigenvalue exceeds the target, then regula
    falsi down to |lambda(alpha) - target| <= rel * target.
    """
    if not (p > 1.0 and math.isfinite(p)):
        raise InvalidParameter(f"exponent p={p} must exceed 1")
    if not (0.0 < v_upper < 1.0):
        raise InvalidMass(f"v_upper={v_upper} must lie in (0, 1)")
    if not (lambda_target > 0.0 and math.isfinite(lambda_target)):
        raise InvalidParameter("lambda_target must be positive and finite")

    lamf = lambda a: model_eigenpair(model.K, model.N, p, a).lam
    lam_up = lamf(v_upper)
    gate = max(1e-6 * lambda_target, 1e-9)
    if lambda_target < lam_up - gate:
        raise NoBracket(
            f"target eigenvalue {lambda_target:.6g} lies below the value "
            f"{lam_up:.6g} at v_upper={v_upper}; no mass in (0, v_upper] "
            "attains it")
    if lambda_target <= lam_up or abs(lam_up - lambda_target) <= rel * lambda_target:
        return v_upper

    a_lo = a_hi = v_upper
    f_lo = f_hi = lam_up - lambda_target
    n = 0
    while f_lo < 0.0:
        a_hi, f_hi = a_lo, f_lo
        a_lo *= 0.5
        f_lo = lamf(a_lo) - lambda_target
        n += 1
        if n > 60:
            raise NonConvergence(
                "model eigenvalue failed to exceed the target as mass shrank")

    side = 0
    for _ in range(80):
        if a_hi - a_lo <= 1e-13:
            break
        alpha = (a_lo * f_hi - a_hi * f_lo) / (f_hi - f_lo)
        if not (a_lo < alpha < a_hi):
            alpha = 0.5 * (a_lo + a_hi)
        f = lamf(alpha) - lambda_target
        if abs(f) <= rel * lambda_target:
            return float(alpha)
        if f > 0.0:
            if side > 0:
                f_hi *= 0.5
            a_lo, f_lo, side = alpha, f, 1
        else:
            if side < 0:
                f_lo *= 0.5
            a_hi, f_hi, side = alpha, f, -1
    return float(0.5 * (a_lo + a_hi))


def faber_krahn_check(space: WeightedInterval, v: float,
                      p: float) -> FaberKrahnResult:
    """Instance eigenvalue versus the model one at equal mass fraction."""
    if space.cd is None:
        raise InvalidParameter("instance carries no curvature-dimension tag")
    K, N = space.cd
    zm = model_eigenpair(K, N, p, v)
    zi = first_eigenpair(space, v, p, seed=zm.lam)
    return FaberKrahnResult(lambda_instance=zi.lam, lambda_model=zm.lam,
                            margin=zi.lam - zm.lam)


def lp_norm(pair: EigenPair, t: float) -> float:
    """(int z^t dm)^{1/t} over the pair's own weighted interval."""
    if not (t > 0.0 and math.isfinite(t)):
        raise InvalidParameter(f"norm exponent t={t} must be positive")
    dens, zf = pair.space.density, pair.sol.w_at

    def integrand(x):
        return np.asarray(zf(x), dtype=float) ** t * \
            np.asarray(dens(x), dtype=float)

    val = numerics.integrate(integrand, 0.0, pair.sol.r1, _NORM_TOL)
    return val ** (1.0 / t)


def _require_unit_mass(pair: EigenPair, who: str) -> None:
    if abs(pair.space.total - 1.0) > 1e-8:
        raise InvalidParameter(
            f"{who} must live on a unit-mass space (total = "
            f"{pair.space.total:.6g}); norm comparisons assume it")


def _matched_scale(u: EigenPair, z: EigenPair, r: float) -> float:
    """Factor c with ||c*z||_r = ||u||_r, the shared normalization."""
    return lp_norm(u, r) / lp_norm(z, r)


def chiti_compare(u: EigenPair, z: EigenPair, r: float,
                  n_grid: int = 4097) -> tuple[float, float]:
    """Single-crossing comparison of the symmetrized instance eigenfunction.

    u is symmetrized onto the model segment underlying z, z is rescaled
    so both have the same L^r norm, and the difference is scanned for
    its sign change: the comparison predicts u* <= z before the crossing
    and z <= u* after.  Returns the crossing abscissa (refined by linear
    interpolation between grid points) and the worst violation of that
    two-sided ordering.  Differences within a 1e-6 band count as
    equality; if the whole difference stays inside the band the pair is
    degenerate-equal and (r_alpha, 0) is returned, while a genuinely
    one-sided difference raises NoCrossing.
    """
    if not (r > 0.0 and math.isfinite(r)):
        raise InvalidParameter(f"norm exponent r={r} must be positive")
    if abs(u.p - z.p) > 1e-12:
        raise InvalidParameter("eigenpairs solve different p-Laplacians")
    _require_unit_mass(u, "instance eigenpair")
    _require_unit_mass(z, "model eigenpair")

    c = _matched_scale(u, z, r)
    r_alpha = z.sol.r1
    x = np.linspace(0.0, r_alpha, n_grid)

    Hm = z.space.cumulative
    inv = u.space.inverse_cumulative
    vmass = u.v * u.space.total
    s = np.minimum(np.asarray(Hm(x), dtype=float), vmass)
    ustar = np.asarray(u.sol.w_at(inv(s)), dtype=float)
    ztil = c * np.asarray(z.sol.w_at(x), dtype=float)
    d = ustar - ztil

    band = 1e-6 * max(1.0, float(np.max(ztil)))
    sg = np.where(d > band, 1, np.where(d < -band, -1, 0))
    nz = np.nonzero(sg)[0]
    if nz.size == 0:
        return float(r_alpha), 0.0
    first = sg[nz[0]]
    flips = np.nonzero(sg[nz] != first)[0]
    if flips.size == 0:
        raise NoCrossing(
            "difference keeps one sign beyond the equality band; "
            "profiles do not cross")
    j = nz[flips[0] - 1]
    k = nz[flips[0]]
    r1 = x[j] + d[j] * (x[k] - x[j]) / (d[j] - d[k])

    left = x <= r1
    viol = max(float(np.max(d[left], initial=0.0)),
               float(np.max(-d[~left], initial=0.0)), 0.0)
    return float(r1), viol


def reverse_holder(u: EigenPair, z: EigenPair, r: float,
                   t_grid) -> HolderReport:
    """Norm-ratio report ||.||_t / ||.||_r for instance versus model.

    The ratios are scale-invariant, so the matched-norm normalization
    cancels out of them; it enters only the deficit delta, which is
    evaluated when r = p-1 over the exponents of t_grid above p-1.
    """
    if not (r > 0.0 and math.isfinite(r)):
        raise InvalidParameter(f"base exponent r={r} must be positive")
    if abs(u.p - z.p) > 1e-12:
        raise InvalidParameter("eigenpairs solve different p-Laplacians")
    _require_unit_mass(u, "instance eigenpair")
    _require_unit_mass(z, "model eigenpair")
    ts = tuple(float(t) for t in t_grid)
    if not ts:
        raise InvalidParameter("t_grid must be nonempty")
    if any(t < r - 1e-12 for t in ts):
        raise InvalidParameter("every exponent in t_grid must be >= r")

    nu_r, nz_r = lp_norm(u, r), lp_norm(z, r)
    ratios_u: dict[float, float] = {}
    ratios_z: dict[float, float] = {}
    for t in ts:
        ratios_u[t] = lp_norm(u, t) / nu_r
        ratios_z[t] = lp_norm(z, t) / nz_r
    vals = list(ratios_u.values()) + list(ratios_z.values())
    if not all(math.isfinite(x) and x > 0.0 for x in vals):
        raise CheckFailure("norm ratios must be finite and positive")

    p = u.p
    if abs(r - (p - 1.0)) <= 1e-12:
        delta = _deficit(u, z, p, [t for t in ts if t > p - 1.0 + 1e-12])
    else:
        delta = math.nan
    return HolderReport(t_grid=ts, ratios_instance=ratios_u,
                        ratios_model=ratios_z, delta=delta, r=r)


def _deficit(u: EigenPair, z: EigenPair, p: float, ts) -> float:
    c = _matched_scale(u, z, p - 1.0)
    worst = 0.0
    for t in ts:
        a = c * lp_norm(z, t)
        b = lp_norm(u, t)
        if p >= 2.0:
            d = a ** (p - 1.0) - b ** (p - 1.0)
        else:
            d = max(a - b, 0.0) ** (p - 1.0)
        worst = max(worst, d)
    return worst


def stability_deficit(u: EigenPair, z: EigenPair, p: float, Q) -> float:
    """Worst norm deficit over Q under the matched (p-1)-norm normalization.

    For p >= 2 each term is ||z||_t^{p-1} - ||u||_t^{p-1}; for p in
    (1, 2) it is the clamped difference raised to p-1.  Zero means the
    instance eigenfunction is norm-indistinguishable from the model one;
    the value grows with the geometric gap in shifted-family sweeps and
    is reported as a diagnostic, not a certified bound.
    """
    if not (p > 1.0 and math.isfinite(p)):
        raise InvalidParameter(f"exponent p={p} must exceed 1")
    if abs(u.p - p) > 1e-12 or abs(z.p - p) > 1e-12:
        raise InvalidParameter("eigenpairs were solved for a different p")
    _require_unit_mass(u, "instance eigenpair")
    _require_unit_mass(z, "model eigenpair")
    ts = tuple(float(t) for t in Q)
    if not ts:
        raise InvalidParameter("Q must be nonempty")
    if any(t <= p - 1.0 + 1e-12 for t in ts):
        raise InvalidParameter("every exponent in Q must lie strictly above p-1")
    return max(0.0, _deficit(u, z, p, ts))


def rayleigh_fem(space: WeightedInterval, v: float, p: float,
                 n_cells: int = 2048, max_iter: int = 800) -> float:
    """Independent eigenvalue estimate from piecewise-linear elements.

    Uniform cells with exact per-cell masses from the cumulative table;
    for p = 2 the generalized tridiagonal eigenproblem, otherwise
    Rayleigh-quotient descent with Armijo backtracking seeded by the
    p = 2 eigenvector.  The raw gradient is preconditioned by the p = 2
    stiffness matrix (gradient descent in the energy metric); without it
    the 1/h^2 stiffness spectrum forces micro-steps and the quotient
    creeps.  Cross-check only: first-order elements carry an O(h^2)
    bias, far above the shooting accuracy.
    """
    if not (p > 1.0 and math.isfinite(p)):
        raise InvalidParameter(f"exponent p={p} must exceed 1")
    if not (0.0 < v < 1.0 and math.isfinite(v)):
        raise InvalidMass(f"mass fraction v={v} must lie in (0, 1)")
    if n_cells < 16:
        raise InvalidParameter("need at least 16 cells")
    r_v = float(space.inverse_cumulative(v * space.total))
    nodes = np.linspace(0.0, r_v, n_cells + 1)
    wc = np.diff(np.asarray(space.cumulative(nodes), dtype=float))
    h = r_v / n_cells
    n = n_cells  # free nodes 0..n-1, node n pinned to zero

    diag_k = np.empty(n)
    diag_k[0] = wc[0]
    diag_k[1:] = wc[:-1] + wc[1:]
    off_k = -wc[:-1]
    K = diags([off_k, diag_k, off_k], (-1, 0, 1), format="csc") / h ** 2
    diag_m = np.empty(n)
    diag_m[0] = wc[0] / 3.0
    diag_m[1:] = (wc[:-1] + wc[1:]) / 3.0
    off_m = wc[:-1] / 6.0
    M = diags([off_m, diag_m, off_m], (-1, 0, 1), format="csc")
    vals, vecs = eigsh(K, k=1, M=M, sigma=0.0, which="LM")
    if p == 2.0:
        return float(vals[0])

    lu = splu(K)
    ml = np.empty(n)
    ml[0] = wc[0] / 2.0
    ml[1:] = (wc[:-1] + wc[1:]) / 2.0
    zf = np.abs(vecs[:, 0])
    zf /= float(np.max(zf))

    def quotient(zv):
        g = (np.append(zv[1:], 0.0) - zv) / h
        num = float(wc @ np.abs(g) ** p)
        den = float(ml @ np.abs(zv) ** p)
        return num, den, g

    num, den, g = quotient(zf)
    R = num / den
    step, stall = 1.0, 0
    for _ in range(max_iter):
        flux = wc * power_signed(g, p - 1.0) / h
        dnum = p * (np.concatenate(([0.0], flux[:-1])) - flux)
        dden = p * ml * power_signed(zf, p - 1.0)
        grad = (dnum - R * dden) / den
        direction = lu.solve(grad)
        slope = float(grad @ direction)
        if slope <= 0.0:
            break
        accepted = False
        while step > 1e-16:
            trial = zf - step * direction
            num_t, den_t, _ = quotient(trial)
            if den_t > 0.0 and num_t / den_t <= R - 1e-4 * step * slope:
                zf = trial / float(np.max(np.abs(trial)))
                num, den, g = quotient(zf)
                r_new = num / den
                step *= 1.3
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        if R - r_new <= 1e-13 * max(R, 1.0):
            stall += 1
            if stall >= 10:
                R = r_new
                break
        else:
            stall = 0
        R = r_new
    return float(R)
