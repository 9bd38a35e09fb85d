"""End-to-end symmetrization comparison for radial p-Poisson problems.

Given a weighted interval carrying a curvature-dimension tag, solve
-div(|u'|^{p-2} u') = f there, push the solution to the matching model
space by decreasing rearrangement, solve the model problem with the
rearranged datum, and certify the orderings that symmetrization
predicts: u* <= w pointwise, gradient norms dominated for every
exponent r in [1, p], and the per-level inequality chain (isoperimetry
applied to superlevel sets) staying on the correct side of 1.

Shifted caps are the workhorse nontrivial instances: truncating the
model density at a positive offset keeps the curvature criterion exact
while breaking the equality case, so every comparison has something to
measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import numerics
from .errors import (
    CheckFailure,
    DegenerateLevel,
    InvalidMass,
    InvalidParameter,
    InvalidShift,
)
from .model_space import ModelSpace, make_model
from .radial_poisson import (
    RadialProblem,
    RadialSolution,
    WeightedInterval,
    gradient_norm,
    solve_explicit,
)
from .rearrangement import decreasing_rearrangement, sample_on_cells

_MODELS: dict[tuple[float, float], ModelSpace] = {}


def model_for(K: float, N: float) -> ModelSpace:
    """Shared, lazily built model space for a curvature-dimension pair."""
    key = (float(K), float(N))
    if key not in _MODELS:
        _MODELS[key] = make_model(*key)
    return _MODELS[key]


def make_shifted_cap(K: float, N: float, shift: float,
                     v: float | None = None,
                     n_cells: int = 4096) -> WeightedInterval:
    """Model density truncated at a positive offset, renormalized.

    The density sin^{N-1}(scale*(t + shift)) on [0, L - shift] inherits
    the curvature criterion from the model exactly; shift = 0 returns a
    space indistinguishable from the model itself.  Passing the target
    mass v checks up front that the domain radius stays inside the
    support.
    """
    scale = math.sqrt(K / (N - 1.0))
    L = math.pi / scale
    if not (0.0 <= shift < 0.5 * L and math.isfinite(shift)):
        raise InvalidShift(f"shift {shift} outside [0, {0.5 * L:.6g})")
    length = L - shift
    expo = N - 1.0

    def raw(t):
        arr = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.maximum(np.sin(scale * (arr + shift)), 0.0) ** expo
        out[arr >= length] = 0.0  # sin(pi) rounds to ~1e-16, pin the limit
        return out if np.ndim(t) else float(out[0])

    c = numerics.integrate(raw, 0.0, length)
    dens = lambda t: raw(t) / c
    cap = WeightedInterval(dens, length, cd=(float(K), float(N)),
                           n_cells=n_cells)
    if v is not None:
        if not (0.0 < v < 1.0):
            raise InvalidMass(f"domain mass v={v} must lie in (0, 1)")
        r1 = float(cap.inverse_cumulative(min(v, cap.total)))
        if shift + r1 >= L:
            raise InvalidShift(
                f"shift {shift} leaves no room for a domain of mass {v}")
    return cap


@dataclass(frozen=True)
class ProblemInstance:
    """A comparison instance: tagged space, exponent, source, domain mass.

    The domain is the interval [0, r1) holding mass v; f_knots lists
    known discontinuities of the source so both solves can pin them to
    quadrature cell edges.
    """

    space: WeightedInterval
    p: float
    f: Callable
    v: float
    label: str = "custom"
    f_knots: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.space.cd is None:
            raise InvalidParameter(
                "instance space carries no curvature-dimension tag")
        if not (self.p > 1.0 and math.isfinite(self.p)):
            raise InvalidParameter(f"exponent p={self.p} must exceed 1")
        if not (0.0 < self.v < 1.0):
            raise InvalidMass(f"domain mass v={self.v} must lie in (0, 1)")
        if self.v > self.space.total:
            raise InvalidMass(
                f"domain mass v={self.v} exceeds the space total "
                f"{self.space.total}")

    @property
    def model(self) -> ModelSpace:
        K, N = self.space.cd
        return model_for(K, N)

    @property
    def r1(self) -> float:
        return float(self.space.inverse_cumulative(self.v))

    @property
    def model_radius(self) -> float:
        return float(self.model.inverse_cumulative(self.v))

    def problem(self) -> RadialProblem:
        return RadialProblem(self.space, self.p, self.f, self.r1,
                             f_knots=self.f_knots)


@dataclass
class ComparisonReport:
    """Outcome of one symmetrization comparison."""

    label: str
    p: float
    v: float
    pointwise_violation: float
    grid_bound: float
    gradient_gaps: dict[float, tuple[float, float]]
    levy_gromov_min_ratio: float
    sharpness_gap: float
    sup_u: float
    origin_gap: float

    def gradient_ok(self, slack: float = 1e-8) -> bool:
        return all(lhs <= rhs + slack for lhs, rhs in
                   self.gradient_gaps.values())


@dataclass
class ChainTrace:
    """Per-level right-hand sides of the isoperimetric chain."""

    levels: np.ndarray
    mass: np.ndarray
    entries: np.ndarray

    @property
    def min_entry(self) -> float:
        return float(np.min(self.entries))


def _rearranged_source(inst: ProblemInstance):
    """Decreasing rearrangement of the source in mass coordinates.

    Returns (pointwise callable on [0, v], step or None, knot masses,
    monotone flag).  Sources that are already nonincreasing compose
    exactly with the inverse volume map; anything else goes through
    cell sampling into a step function, which is first-order accurate
    and flagged as such.
    """
    r1 = inst.r1
    probes = np.linspace(0.0, r1, 2049)
    fv = np.asarray(inst.f(probes), dtype=float)
    scale = float(np.max(np.abs(fv)))
    slack = 1e-12 * (scale if scale > 0.0 else 1.0)
    monotone = bool(np.all(np.diff(fv) <= slack))
    if monotone:
        def fsharp_at(s):
            arr = np.atleast_1d(np.asarray(s, dtype=float))
            rho = inst.space.inverse_cumulative(np.clip(arr, 0.0, inst.v))
            out = np.asarray(inst.f(rho), dtype=float)
            return out if np.ndim(s) else float(out[0])

        knot_masses = tuple(
            float(inst.space.cumulative(k)) for k in inst.f_knots
            if 0.0 < k < r1)
        return fsharp_at, None, knot_masses, True
    sampled = sample_on_cells(inst.f, inst.space.cumulative, r1,
                              n_cells=4096)
    step = decreasing_rearrangement(sampled)

    def fsharp_at(s):
        return step(np.clip(np.asarray(s, dtype=float), 0.0, inst.v))

    return fsharp_at, step, (), False


def _source_cumulative(inst: ProblemInstance, u: RadialSolution, step):
    """Running integral of the rearranged source on [0, v], exact.

    For monotone sources the change of variables s = W(rho) turns
    int_0^s fsharp into the instance mass M(W^{-1}(s)), already owned
    by the solution; step sources integrate in closed form.
    """
    if step is None:
        return lambda s: u.mass_at(
            inst.space.inverse_cumulative(np.clip(s, 0.0, inst.v)))
    return lambda s: step.integral(np.clip(s, 0.0, inst.v))


def _symmetrized(inst: ProblemInstance, u: RadialSolution):
    """u* as a callable on the model segment [0, model_radius]."""
    model = inst.model
    space = inst.space
    v = inst.v

    def ustar(x):
        arr = np.atleast_1d(np.asarray(x, dtype=float))
        s = np.asarray(model.cumulative(arr), dtype=float)
        rho = np.asarray(space.inverse_cumulative(np.minimum(s, v)),
                         dtype=float)
        out = np.asarray(u.w_at(rho), dtype=float)
        out[s >= v] = 0.0
        return out if np.ndim(x) else float(out[0])

    return ustar


def _radius_of_level(u: RadialSolution, levels: np.ndarray) -> np.ndarray:
    """Vectorized inverse of the nonincreasing solution profile."""
    lo = np.zeros_like(levels)
    hi = np.full_like(levels, u.r1)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        above = np.asarray(u.w_at(mid), dtype=float) > levels
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    return 0.5 * (lo + hi)


def run_comparison(inst: ProblemInstance,
                   r_list: list[float] | None = None,
                   n_check: int = 2048,
                   n_levels: int = 16,
                   n_cells: int = 4096,
                   tol: numerics.Tolerance | None = None) -> ComparisonReport:
    """Solve both problems and fill a ComparisonReport.

    The pointwise check runs on a shared cosine grid; grid_bound is a
    first-order Lipschitz estimate of how much either side can move
    between neighboring nodes, so violations below it are attributable
    to sampling rather than to the inequality failing.
    """
    p = inst.p
    if r_list is None:
        r_list = [1.0, 0.5 * (1.0 + p), p]
    for r in r_list:
        if not (1.0 <= r <= p):
            raise InvalidParameter(f"gradient exponent r={r} outside [1, p]")
    resid = inst.space.cd_violation()
    if resid > 1e-6:
        raise CheckFailure(
            f"instance density violates the curvature criterion by {resid:.3e}")

    prob_u = inst.problem()
    u = solve_explicit(prob_u, n_cells=n_cells, tol=tol)
    fsharp_at, step, knot_masses, monotone = _rearranged_source(inst)
    F_at = _source_cumulative(inst, u, step)

    model = inst.model
    miv = WeightedInterval.from_model(model)
    r_v = inst.model_radius
    fstar = lambda x: fsharp_at(model.cumulative(x))
    star_knots = tuple(float(model.inverse_cumulative(s))
                       for s in knot_masses if 0.0 < s < inst.v)
    prob_w = RadialProblem(miv, p, fstar, r_v, f_knots=star_knots)
    # the model mass of f* is F(H(rho)) exactly, so the model solve can
    # skip re-integrating the composed source
    mass_w = lambda rho: F_at(model.cumulative(rho))
    w = solve_explicit(prob_w, n_cells=n_cells, tol=tol, mass_at=mass_w)

    ustar = _symmetrized(inst, u)
    grid = numerics.Grid.cosine(0.0, r_v, n_check).nodes
    du = np.asarray(ustar(grid), dtype=float)
    dw = np.asarray(w.w_at(grid), dtype=float)
    diff = du - dw
    pointwise_violation = float(max(np.max(diff), 0.0))

    # first-order sampling bound: max spacing times the larger slope
    spacing = float(np.max(np.diff(grid)))
    s_grid = np.asarray(model.cumulative(grid), dtype=float)
    rho = np.asarray(inst.space.inverse_cumulative(np.minimum(s_grid, inst.v)),
                     dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        star_slope = np.abs(np.asarray(u.wprime_at(rho), dtype=float)) * \
            np.asarray(model.density(grid), dtype=float) / \
            np.asarray(inst.space.density(rho), dtype=float)
    star_slope = star_slope[np.isfinite(star_slope)]
    lip = max(float(np.max(np.abs(w.wprime))),
              float(np.max(star_slope)) if star_slope.size else 0.0)
    grid_bound = spacing * lip

    gradient_gaps = {
        float(r): (float(gradient_norm(u, prob_u, r)),
                   float(gradient_norm(w, prob_w, r)))
        for r in r_list
    }

    sup_u = float(u.w_at(0.0))
    levels = np.linspace(0.05, 0.95, n_levels) * sup_u
    lg = levy_gromov_radial(inst, u, levels)

    sharpness_gap = float("nan")
    if inst.label == "model" and monotone:
        sharpness_gap = float(np.max(np.abs(diff)))

    return ComparisonReport(
        label=inst.label, p=p, v=inst.v,
        pointwise_violation=pointwise_violation,
        grid_bound=grid_bound,
        gradient_gaps=gradient_gaps,
        levy_gromov_min_ratio=lg,
        sharpness_gap=sharpness_gap,
        sup_u=sup_u,
        origin_gap=float(w.w_at(0.0)) - float(ustar(0.0)),
    )


def levy_gromov_radial(inst: ProblemInstance, u: RadialSolution,
                       levels) -> float:
    """Min over levels of perimeter(superlevel set) / model profile.

    Superlevel sets of a nonincreasing radial function are intervals
    [0, rho_t), so their perimeter is the instance density at rho_t;
    isoperimetry says the ratio to the model profile at the same mass
    never drops below 1.  Levels at or above sup u are skipped.
    """
    lv = np.atleast_1d(np.asarray(levels, dtype=float))
    if np.any(lv < 0.0):
        raise InvalidParameter("levels must be nonnegative")
    sup_u = float(u.w_at(0.0))
    keep = lv < sup_u
    if not np.any(keep):
        raise DegenerateLevel("every level is at or above sup u")
    rho = _radius_of_level(u, lv[keep])
    per = np.asarray(inst.space.density(rho), dtype=float)
    mass = np.asarray(inst.space.cumulative(rho), dtype=float)
    ref = np.asarray(inst.model.isoperimetric_profile(mass), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = per / ref
    ratios = ratios[np.isfinite(ratios)]
    if ratios.size == 0:
        raise DegenerateLevel("no level produced a finite perimeter ratio")
    return float(np.min(ratios))


def chain_inequality_trace(inst: ProblemInstance, u: RadialSolution,
                           n_levels: int = 256) -> ChainTrace:
    """Per-level check that -mu'(t) dominates the isoperimetric bound.

    For each level t, the entry is
        -mu'(t) * F(mu(t))^{1/(p-1)} / I(mu(t))^{p/(p-1)}
    with mu the distribution function of u, F the running integral of
    the rearranged source and I the model profile; every entry must be
    >= 1 up to the finite-difference budget.  The top 1% of levels is
    excluded, where mu' degenerates.
    """
    sup_u = float(u.w_at(0.0))
    if not (sup_u > 0.0):
        raise InvalidParameter("solution has no positive levels to trace")
    _, step, _, _ = _rearranged_source(inst)
    F_at = _source_cumulative(inst, u, step)

    top = 0.99 * sup_u
    levels = np.linspace(top / n_levels, top, n_levels)
    # mu behaves like (sup - t)^{3/2} at the top, so the difference step
    # must shrink with the distance from sup to keep the bias flat
    delta = np.minimum(1e-4 * sup_u, 1.5e-3 * (sup_u - levels))
    mu_of = lambda t: np.asarray(
        inst.space.cumulative(_radius_of_level(u, t)), dtype=float)
    mu = mu_of(levels)
    dmu = (mu_of(levels + delta) - mu_of(levels - delta)) / (2.0 * delta)

    q = 1.0 / (inst.p - 1.0)
    F = np.asarray(F_at(mu), dtype=float)
    I = np.asarray(inst.model.isoperimetric_profile(mu), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        entries = (-dmu) * F ** q / I ** (q + 1.0)
    return ChainTrace(levels=levels, mass=mu, entries=entries)
