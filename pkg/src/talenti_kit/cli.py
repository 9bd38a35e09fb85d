"""Command-line front end: scenario files in, records and tables out.

A scenario file is flat INI text, one section per scenario:

    [cap-example]
    kind = talenti
    K = 2
    N = 3
    p = 2
    v = 0.4
    a = 0.3
    f = twolevel 2 0.5 0.25

``talenti-kit run FILE`` executes every section and writes, per
scenario, CSV tables (17 significant digits, byte-identical across
reruns) plus a key = value run record listing each check exactly once
with its measured slack; a summary record closes the run.  Exit status
is 0 when every check of every scenario passes, 1 when any check fails
or a scenario aborts inside the library (the record is still written),
and 2 when the input cannot be parsed; parse errors name the offending
section and key.

Sources use a three-word mini language: ``const c`` for a constant
level, ``cospos`` for the positive part of the cosine, and
``twolevel h1 h2 split`` for a two-level step jumping at radius
``split``.  Check slack is reported so that nonnegative means the
check passed; budgets scale with the optional per-scenario
``tol_scale`` key and with the ``TALENTI_SEED_TOL`` environment
variable.  ``talenti-kit suite NAME`` runs a built-in scenario pack
(``talenti-kit list`` prints the names), ``--jobs N`` runs scenarios
in parallel threads, ``--out DIR`` picks the output folder.
"""

from __future__ import annotations

import argparse
import configparser
import math
import os
import re
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.stats import spearmanr

from . import __version__
from .eigen import (alpha_from_lambda, chiti_compare, first_eigenpair,
                    model_eigenpair, reverse_holder, stability_deficit)
from .radial_poisson import (RadialProblem, WeightedInterval, gradient_norm,
                             gradient_norm_mass, solve_explicit,
                             solve_mass_form, weak_residual)
from .rearrangement import StepFunction, decreasing_rearrangement, lp_norm, \
    sample_on_cells
from .sobolev_embed import c1_constant, check_embedding, \
    embedding_constants, is_divergent
from .talenti_check import ProblemInstance, make_shifted_cap, model_for, \
    run_comparison

_KERNEL = f"talenti-kit {__version__}"
_NAME_RE = re.compile(r"[A-Za-z0-9][A-Za-z0-9._-]*\Z")


class ParseError(ValueError):
    """Scenario text or environment that cannot produce a valid run."""


def _fmt(x) -> str:
    """17 significant digits for floats, plain text otherwise."""
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def _bad(name: str, key: str, raw, why: str) -> ParseError:
    return ParseError(f"[{name}] {key} = {raw}: {why}")


def _num(name: str, key: str, raw, cond, why: str,
         allow_inf: bool = False) -> float:
    try:
        val = float(str(raw).strip())
    except ValueError:
        raise _bad(name, key, raw, "not a number") from None
    if math.isnan(val) or (math.isinf(val) and not allow_inf):
        raise _bad(name, key, raw, "not a finite number")
    if not cond(val):
        raise _bad(name, key, raw, why)
    return val


def _int_of(name: str, key: str, raw, lo: int) -> int:
    try:
        val = int(str(raw).strip())
    except ValueError:
        raise _bad(name, key, raw, "not an integer") from None
    if val < lo:
        raise _bad(name, key, raw, f"must be at least {lo}")
    return val


def _pull(name: str, kv: dict, key: str) -> str:
    if key not in kv:
        raise ParseError(f"[{name}] {key}: required key is missing")
    return kv.pop(key)


def _float_list(name: str, key: str, raw: str, cond, why: str):
    toks = raw.replace(",", " ").split()
    if not toks:
        raise _bad(name, key, raw, "must list at least one number")
    vals = tuple(_num(name, key, tok, cond, why) for tok in toks)
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise _bad(name, key, raw, "entries must increase strictly")
    return vals


@dataclass(frozen=True)
class SourceSpec:
    """Parsed right-hand side from the f key of a scenario."""

    text: str
    form: str
    values: tuple[float, ...]

    def fn(self):
        """The source as a vectorized radial callable."""
        if self.form == "const":
            c = self.values[0]

            def f(t):
                arr = np.atleast_1d(np.asarray(t, dtype=float))
                out = np.full(arr.shape, c)
                return out if np.ndim(t) else float(out[0])

        elif self.form == "cospos":

            def f(t):
                arr = np.atleast_1d(np.asarray(t, dtype=float))
                out = np.maximum(np.cos(arr), 0.0)
                return out if np.ndim(t) else float(out[0])

        else:
            h1, h2, split = self.values

            def f(t):
                arr = np.atleast_1d(np.asarray(t, dtype=float))
                out = np.where(arr < split, h1, h2)
                return out if np.ndim(t) else float(out[0])

        return f

    @property
    def knots(self) -> tuple[float, ...]:
        if self.form == "cospos":
            return (0.5 * math.pi,)
        if self.form == "twolevel":
            return (self.values[2],)
        return ()

    @property
    def nonincreasing(self) -> bool:
        if self.form == "twolevel":
            return self.values[0] >= self.values[1]
        return True

    @property
    def step_exact(self) -> bool:
        return self.form in ("const", "twolevel")

    def mass_step(self, space: WeightedInterval, r1: float) -> StepFunction:
        """The source transported to mass coordinates; step data only."""
        if not self.step_exact:
            raise ValueError("mass transport is exact for step data only")
        ball = float(space.cumulative(r1))
        if self.form == "twolevel" and self.values[2] < r1:
            h1, h2, split = self.values
            m1 = float(space.cumulative(split))
            return StepFunction((m1, ball), (h1, h2, 0.0), side="left")
        return StepFunction((ball,), (self.values[0], 0.0), side="left")


def _parse_source(name: str, raw: str) -> SourceSpec:
    toks = raw.split()
    form = toks[0] if toks else ""
    if form == "const" and len(toks) == 2:
        c = _num(name, "f", toks[1], lambda x: x >= 0.0,
                 "constant level must be nonnegative")
        return SourceSpec(" ".join(toks), "const", (c,))
    if form == "cospos" and len(toks) == 1:
        return SourceSpec("cospos", "cospos", ())
    if form == "twolevel" and len(toks) == 4:
        h1 = _num(name, "f", toks[1], lambda x: x >= 0.0,
                  "levels must be nonnegative")
        h2 = _num(name, "f", toks[2], lambda x: x >= 0.0,
                  "levels must be nonnegative")
        split = _num(name, "f", toks[3], lambda x: x > 0.0,
                     "jump radius must be positive")
        return SourceSpec(" ".join(toks), "twolevel", (h1, h2, split))
    raise _bad(name, "f", raw,
               "expected 'const c', 'cospos' or 'twolevel h1 h2 split'")


def _geometry(name: str, kv: dict, need_p: bool = True,
              need_v: bool = True) -> dict:
    params = {
        "K": _num(name, "K", _pull(name, kv, "K"),
                  lambda x: x > 0.0, "must be positive"),
        "N": _num(name, "N", _pull(name, kv, "N"),
                  lambda x: x > 1.0, "must exceed 1"),
    }
    if need_p:
        params["p"] = _num(name, "p", _pull(name, kv, "p"),
                           lambda x: x > 1.0, "must exceed 1")
    if need_v:
        params["v"] = _num(name, "v", _pull(name, kv, "v"),
                           lambda x: 0.0 < x < 1.0,
                           "must lie strictly between 0 and 1")
    return params


def _half_length(K: float, N: float) -> float:
    return 0.5 * math.pi * math.sqrt((N - 1.0) / K)


def _shift(name: str, kv: dict, K: float, N: float) -> float:
    raw = kv.pop("a", None)
    if raw is None:
        return 0.0
    half = _half_length(K, N)
    return _num(name, "a", raw, lambda x: 0.0 <= x < half,
                f"must lie in [0, {half:.6g}) for this K, N")


def _parse_model_probe(name: str, kv: dict) -> dict:
    params = _geometry(name, kv, need_p=False, need_v=False)
    raw = kv.pop("n", None)
    params["n"] = 33 if raw is None else _int_of(name, "n", raw, 2)
    return params


def _parse_symmetrize(name: str, kv: dict) -> dict:
    params = _geometry(name, kv, need_p=False)
    params["f"] = _parse_source(name, _pull(name, kv, "f"))
    raw = kv.pop("n", None)
    params["n"] = 2048 if raw is None else _int_of(name, "n", raw, 16)
    return params


def _parse_poisson(name: str, kv: dict) -> dict:
    params = _geometry(name, kv)
    params["a"] = _shift(name, kv, params["K"], params["N"])
    params["f"] = _parse_source(name, _pull(name, kv, "f"))
    p = params["p"]
    raw = kv.pop("r_list", None)
    if raw is None:
        params["r_list"] = (1.0, 0.5 * (1.0 + p), p)
    else:
        params["r_list"] = _float_list(name, "r_list", raw,
                                       lambda x: 1.0 <= x <= p,
                                       "entries must lie in [1, p]")
    return params


def _parse_talenti(name: str, kv: dict) -> dict:
    params = _parse_poisson(name, kv)
    raw = kv.pop("n", None)
    params["n"] = 2048 if raw is None else _int_of(name, "n", raw, 64)
    return params


def _parse_eigen(name: str, kv: dict) -> dict:
    params = _geometry(name, kv)
    params["a"] = _shift(name, kv, params["K"], params["N"])
    return params


def _parse_holder(name: str, kv: dict) -> dict:
    params = _geometry(name, kv)
    params["a"] = _shift(name, kv, params["K"], params["N"])
    r = params["p"] - 1.0
    raw = kv.pop("t_grid", None)
    if raw is None:
        params["t_grid"] = (r, 2.0 * r, 5.0 * r)
    else:
        params["t_grid"] = _float_list(name, "t_grid", raw,
                                       lambda x: x >= r,
                                       "entries must be at least p - 1")
    return params


def _parse_sobolev(name: str, kv: dict) -> dict:
    params = _geometry(name, kv)
    params["a"] = _shift(name, kv, params["K"], params["N"])
    params["f"] = _parse_source(name, _pull(name, kv, "f"))
    params["s"] = _num(name, "s", _pull(name, kv, "s"),
                       lambda x: x > 0.0, "must be positive", allow_inf=True)
    raw = kv.pop("t", None)
    if raw is not None:
        params["t"] = _num(name, "t", raw, lambda x: x > 0.0,
                           "must be positive")
    return params


def _parse_sweep(name: str, kv: dict) -> dict:
    params = _geometry(name, kv)
    p = params["p"]
    half = _half_length(params["K"], params["N"])
    raw = kv.pop("a_list", None)
    if raw is None:
        params["a_list"] = tuple(0.05 * k for k in range(1, 11))
        if params["a_list"][-1] >= half:
            raise ParseError(f"[{name}] a_list: default sweep reaches the "
                             f"shift bound {half:.6g}; pass a_list explicitly")
    else:
        params["a_list"] = _float_list(name, "a_list", raw,
                                       lambda x: 0.0 <= x < half,
                                       f"entries must lie in [0, {half:.6g})")
    if len(params["a_list"]) < 2:
        raise ParseError(f"[{name}] a_list: need at least two shifts "
                         "to rank the sweep")
    raw = kv.pop("Q", None)
    if raw is None:
        params["Q"] = (p, 2.0 * p)
    else:
        params["Q"] = _float_list(name, "Q", raw, lambda x: x > p - 1.0,
                                  "entries must exceed p - 1")
    return params


_PARSERS = {
    "model-probe": _parse_model_probe,
    "symmetrize": _parse_symmetrize,
    "poisson": _parse_poisson,
    "talenti": _parse_talenti,
    "eigen": _parse_eigen,
    "holder": _parse_holder,
    "sobolev": _parse_sobolev,
    "stability-sweep": _parse_sweep,
}


@dataclass(frozen=True)
class Scenario:
    """One parsed section: a kind plus its typed parameters."""

    name: str
    kind: str
    params: dict


def _echo(params: dict):
    """Record lines for the parameter block, in parse order."""
    for key, val in params.items():
        if isinstance(val, SourceSpec):
            yield key, val.text
        elif isinstance(val, tuple):
            yield key, ",".join(_fmt(x) for x in val)
        else:
            yield key, _fmt(val)


def _parse_scenario(name: str, kv: dict) -> Scenario:
    if not _NAME_RE.match(name) or name == "summary":
        raise ParseError(f"[{name}]: scenario names use letters, digits, "
                         "dots, dashes and underscores (and not 'summary')")
    kind = kv.pop("kind", None)
    if kind is None:
        raise ParseError(f"[{name}] kind: required key is missing")
    kind = kind.strip()
    parser = _PARSERS.get(kind)
    if parser is None:
        raise _bad(name, "kind", kind,
                   "unknown kind; expected one of " + ", ".join(_PARSERS))
    raw = kv.pop("tol_scale", None)
    scale = 1.0 if raw is None else _num(name, "tol_scale", raw,
                                         lambda x: x > 0.0,
                                         "must be positive")
    params = parser(name, kv)
    if kv:
        key = sorted(kv)[0]
        raise ParseError(f"[{name}] {key}: unknown key for kind {kind}")
    params["tol_scale"] = scale
    return Scenario(name, kind, params)


def parse_scenarios_text(text: str, source: str) -> list[Scenario]:
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",))
    cp.optionxform = str
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ParseError(f"{source}: {' '.join(str(exc).split())}") from None
    if cp.defaults():
        raise ParseError(f"{source}: [DEFAULT] sections are not supported")
    if not cp.sections():
        raise ParseError(f"{source}: no scenario sections found")
    return [_parse_scenario(name, dict(cp.items(name)))
            for name in cp.sections()]


def load_scenarios(path) -> list[Scenario]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from None
    return parse_scenarios_text(text, str(path))


@dataclass(frozen=True)
class CheckResult:
    """One named check with its measured slack (nonnegative passes)."""

    name: str
    passed: bool
    slack: float


@dataclass(frozen=True)
class Budget:
    """Multiplier applied to every check tolerance of one scenario."""

    scale: float

    def __call__(self, base: float) -> float:
        return base * self.scale


def _check(name: str, slack: float) -> CheckResult:
    return CheckResult(name, bool(slack >= 0.0), float(slack))


def _gate(name: str, ok: bool) -> CheckResult:
    return CheckResult(name, bool(ok), 1.0 if ok else -1.0)


@dataclass(frozen=True)
class RunRecord:
    """Everything one scenario produced, ready to serialize."""

    name: str
    kind: str
    params: dict
    checks: tuple[CheckResult, ...]
    tables: tuple[str, ...]
    wall_time: float
    error: str = ""

    @property
    def passed(self) -> bool:
        return (not self.error and bool(self.checks)
                and all(c.passed for c in self.checks))

    def to_block(self) -> str:
        lines = [f"[{self.name}]",
                 f"kind = {self.kind}",
                 f"status = {'pass' if self.passed else 'fail'}",
                 f"kernel = {_KERNEL}",
                 f"wall_time_s = {_fmt(self.wall_time)}"]
        lines += [f"param.{key} = {val}" for key, val in _echo(self.params)]
        for c in self.checks:
            word = "pass" if c.passed else "fail"
            lines.append(f"check.{c.name} = {word} slack = {_fmt(c.slack)}")
        lines += [f"table.{i} = {t}" for i, t in enumerate(self.tables)]
        if self.error:
            lines.append(f"error = {self.error}")
        return "\n".join(lines) + "\n"


_INTERVALS: dict[tuple[float, float], WeightedInterval] = {}


def _model_interval(K: float, N: float) -> WeightedInterval:
    key = (float(K), float(N))
    ival = _INTERVALS.get(key)
    if ival is None:
        ival = WeightedInterval.from_model(model_for(K, N))
        _INTERVALS[key] = ival
    return ival


def _space_for(params: dict) -> WeightedInterval:
    if params["a"] > 0.0:
        return make_shifted_cap(params["K"], params["N"], params["a"],
                                params["v"])
    return _model_interval(params["K"], params["N"])


def _run_model_probe(sc: Scenario, budget: Budget):
    model = model_for(sc.params["K"], sc.params["N"])
    n = sc.params["n"]
    vs = np.linspace(0.0, 1.0, n + 2)[1:-1]
    radii = np.asarray(model.inverse_cumulative(vs), dtype=float)
    prof = np.asarray(model.isoperimetric_profile(vs), dtype=float)
    mirror = np.asarray(model.isoperimetric_profile(1.0 - vs), dtype=float)
    total = float(model.cumulative(model.L))
    checks = [
        _check("unit-mass", budget(1e-9) - abs(total - 1.0)),
        _check("profile-symmetry",
               budget(1e-8) - float(np.max(np.abs(prof - mirror)))),
        _check("profile-positive", float(np.min(prof))),
        _check("radius-monotone", float(np.min(np.diff(radii)))),
    ]
    rows = list(zip(vs, radii, prof))
    return checks, [(f"{sc.name}.csv", ("v", "radius", "profile"), rows)]


def _run_symmetrize(sc: Scenario, budget: Budget):
    spec = sc.params["f"]
    ival = _model_interval(sc.params["K"], sc.params["N"])
    r1 = float(ival.inverse_cumulative(sc.params["v"] * ival.total))
    u = sample_on_cells(spec.fn(), ival.cumulative, r1,
                        n_cells=sc.params["n"])
    step = decreasing_rearrangement(u)
    support = float(np.sum(u.measures[np.abs(u.values) > 0.0]))
    n1, n1s = lp_norm(u, 1.0), lp_norm(step, 1.0)
    n2, n2s = lp_norm(u, 2.0), lp_norm(step, 2.0)
    checks = [
        _check("mass-preserved",
               budget(1e-12) * max(1.0, support)
               - abs(step.support_end - support)),
        _check("l1-preserved",
               budget(1e-12) * max(1.0, n1) - abs(n1 - n1s)),
        _check("l2-preserved",
               budget(1e-12) * max(1.0, n2) - abs(n2 - n2s)),
        _check("nonincreasing",
               -float(np.max(np.diff(step.levels), initial=0.0))),
    ]
    edges = [0.0, *map(float, step.breakpoints)]
    rows = []
    for i, lv in enumerate(map(float, step.levels)):
        right = edges[i + 1] if i + 1 < len(edges) else None
        rows.append((edges[i], right, lv))
    return checks, [(f"{sc.name}.csv",
                     ("mass_left", "mass_right", "level"), rows)]


def _run_poisson(sc: Scenario, budget: Budget):
    spec = sc.params["f"]
    space = _space_for(sc.params)
    r1 = float(space.inverse_cumulative(sc.params["v"] * space.total))
    prob = RadialProblem(space=space, p=sc.params["p"], f=spec.fn(), r1=r1,
                         f_knots=spec.knots)
    sol = solve_explicit(prob)
    checks = [_check("weak-residual", budget(1e-6) - weak_residual(sol, prob))]
    if spec.step_exact:
        sharp = spec.mass_step(space, r1)
        for r in sc.params["r_list"]:
            g_phys = gradient_norm(sol, prob, r)
            g_mass = gradient_norm_mass(prob, sharp, r)
            rel = abs(g_phys - g_mass) / max(g_phys, g_mass, 1e-300)
            checks.append(_check(f"gradient-identity-r{_fmt(r)}",
                                 budget(1e-6) - rel))
        if spec.nonincreasing:
            alt = solve_mass_form(prob, sharp)
            xs = np.linspace(0.0, r1, 257)
            gap = float(np.max(np.abs(np.asarray(sol.w_at(xs), dtype=float)
                                      - np.asarray(alt.w_at(xs),
                                                   dtype=float))))
            scale = max(1.0, float(np.max(np.abs(sol.w))))
            checks.append(_check("route-agreement",
                                 budget(1e-7) * scale - gap))
    rows = list(zip(sol.grid, sol.w, sol.wprime))
    return checks, [(f"{sc.name}.csv", ("rho", "w", "wprime"), rows)]


def _run_talenti(sc: Scenario, budget: Budget):
    params = sc.params
    spec = params["f"]
    if params["a"] > 0.0:
        space, label = _space_for(params), "cap"
    else:
        space, label = _model_interval(params["K"], params["N"]), "model"
    inst = ProblemInstance(space=space, p=params["p"], f=spec.fn(),
                           v=params["v"], label=label, f_knots=spec.knots)
    rep = run_comparison(inst, r_list=params["r_list"], n_check=params["n"])
    checks = [
        _check("pointwise", budget(1e-8) + rep.grid_bound
               - rep.pointwise_violation),
        _check("levy-gromov",
               rep.levy_gromov_min_ratio - 1.0 + budget(1e-8)),
    ]
    for r, (lhs, rhs) in rep.gradient_gaps.items():
        checks.append(_check(f"gradient-r{_fmt(r)}", rhs - lhs + budget(1e-8)))
    if not math.isnan(rep.sharpness_gap):
        checks.append(_check("sharpness", budget(1e-6) - rep.sharpness_gap))
    rows = [
        ("pointwise_violation", rep.pointwise_violation),
        ("grid_bound", rep.grid_bound),
        ("levy_gromov_min_ratio", rep.levy_gromov_min_ratio),
        ("sharpness_gap", rep.sharpness_gap),
        ("sup_u", rep.sup_u),
        ("origin_gap", rep.origin_gap),
    ]
    for r, (lhs, rhs) in rep.gradient_gaps.items():
        rows.append((f"gradient_lhs_r{_fmt(r)}", lhs))
        rows.append((f"gradient_rhs_r{_fmt(r)}", rhs))
    return checks, [(f"{sc.name}.csv", ("metric", "value"), rows)]


def _run_eigen(sc: Scenario, budget: Budget):
    params = sc.params
    K, N, p, v = params["K"], params["N"], params["p"], params["v"]
    space = _space_for(params)
    zm = model_eigenpair(K, N, p, v)
    pair = first_eigenpair(space, v, p, seed=zm.lam)
    margin = pair.lam - zm.lam
    checks = [
        _check("faber-krahn", margin + budget(1e-8)),
        _check("boundary-zero",
               budget(1e-6) - abs(float(pair.z_at(pair.r_alpha)))),
        _check("rayleigh-consistent",
               budget(1e-6) - abs(pair.rayleigh() - pair.lam) / pair.lam),
    ]
    if params["a"] == 0.0:
        checks.append(_check("model-equality", budget(1e-6) - abs(margin)))
    # the half-mass model segment with K = N - 1 and p = 2 has the
    # cosine as its first eigenfunction, with eigenvalue exactly N
    if (params["a"] == 0.0 and p == 2.0 and v == 0.5
            and abs(K - (N - 1.0)) <= 1e-12):
        checks.append(_check("eigenvalue-analytic",
                             budget(1e-4) - abs(pair.lam - N) / N))
        tg = np.linspace(0.0, pair.r_alpha, 1025)
        z0 = float(pair.z_at(0.0))
        dist = float(np.max(np.abs(
            np.asarray(pair.z_at(tg), dtype=float) / z0 - np.cos(tg))))
        checks.append(_check("cosine-profile", budget(1e-4) - dist))
    rows = list(zip(pair.sol.grid, pair.sol.w, pair.sol.wprime))
    spectrum = [(pair.lam, zm.lam, margin)]
    return checks, [
        (f"{sc.name}.csv", ("t", "z", "zprime"), rows),
        (f"{sc.name}-spectrum.csv",
         ("lambda_instance", "lambda_model", "margin"), spectrum),
    ]


def _run_holder(sc: Scenario, budget: Budget):
    params = sc.params
    K, N, p, v = params["K"], params["N"], params["p"], params["v"]
    r = p - 1.0
    space = _space_for(params)
    zv = model_eigenpair(K, N, p, v)
    u = first_eigenpair(space, v, p, seed=zv.lam)
    alpha = alpha_from_lambda(model_for(K, N), p, u.lam, v)
    z = model_eigenpair(K, N, p, alpha)
    crossing, viol = chiti_compare(u, z, r)
    rep = reverse_holder(u, z, r, params["t_grid"])
    checks = [
        _check("chiti-ordering", budget(1e-6) - viol),
        _gate("chiti-crossing",
              0.0 < crossing <= u.r_alpha * (1.0 + 1e-12)),
        _check("deficit-nonnegative", rep.delta),
    ]
    for t in rep.t_grid:
        checks.append(_check(
            f"holder-t{_fmt(t)}",
            rep.ratios_model[t] - rep.ratios_instance[t] + budget(1e-8)))
    rows = [(t, rep.ratios_instance[t], rep.ratios_model[t])
            for t in rep.t_grid]
    extra = [(alpha, crossing, viol, rep.delta)]
    return checks, [
        (f"{sc.name}.csv", ("t", "ratio_instance", "ratio_model"), rows),
        (f"{sc.name}-chiti.csv",
         ("alpha", "crossing", "violation", "delta"), extra),
    ]


def _run_sobolev(sc: Scenario, budget: Budget):
    params = sc.params
    K, N, p, v = params["K"], params["N"], params["p"], params["v"]
    spec, s, t = params["f"], params["s"], params.get("t")
    space = _space_for(params)
    r1 = float(space.inverse_cumulative(v * space.total))
    prob = RadialProblem(space=space, p=p, f=spec.fn(), r1=r1,
                         f_knots=spec.knots)
    sol = solve_explicit(prob)
    emb = check_embedding(prob, sol, s, t)
    vm = float(space.cumulative(r1)) / space.total
    crit = N / p
    checks = [
        _check("embedding-slack", emb.slack + budget(1e-8)),
        _gate("critical-below-divergent",
              is_divergent(c1_constant(K, N, vm, p, crit * (1.0 - 1e-3)))),
        _gate("critical-at-divergent",
              is_divergent(c1_constant(K, N, vm, p, crit))),
        _gate("critical-above-finite",
              not is_divergent(c1_constant(K, N, vm, p,
                                           crit * (1.0 + 1e-3)))),
    ]
    rows = []
    for si in (crit * (1.0 - 1e-3), crit, crit * (1.0 + 1e-3),
               2.0 * crit, s):
        row = embedding_constants(K, N, vm, p, si, t)
        rows.append((si, t, float(row.c1),
                     None if row.c2 is None else float(row.c2)))
    return checks, [
        (f"{sc.name}.csv", ("s", "t", "c1", "c2"), rows),
        (f"{sc.name}-check.csv", ("lhs", "rhs", "slack"),
         [(emb.lhs, emb.rhs, emb.slack)]),
    ]


def _run_sweep(sc: Scenario, budget: Budget):
    params = sc.params
    K, N, p, v = params["K"], params["N"], params["p"], params["v"]
    model = model_for(K, N)
    seed = model_eigenpair(K, N, p, v).lam
    rows, deltas = [], []
    for a in params["a_list"]:
        cap = make_shifted_cap(K, N, a, v)
        u = first_eigenpair(cap, v, p, seed=seed)
        seed = u.lam  # eigenvalues grow with the shift; reuse as bracket hint
        alpha = alpha_from_lambda(model, p, u.lam, v)
        z = model_eigenpair(K, N, p, alpha)
        delta = stability_deficit(u, z, p, params["Q"])
        deltas.append(delta)
        rows.append((a, model.L - cap.length, delta))
    rho = float(spearmanr(np.asarray(params["a_list"]),
                          np.asarray(deltas))[0])
    checks = [
        _check("deficit-nonnegative", float(np.min(deltas))),
        _check("monotone-spearman", rho - 1.0 + budget(1e-12)),
    ]
    return checks, [(f"{sc.name}.csv",
                     ("a", "diameter_deficit", "delta"), rows)]


_RUNNERS = {
    "model-probe": _run_model_probe,
    "symmetrize": _run_symmetrize,
    "poisson": _run_poisson,
    "talenti": _run_talenti,
    "eigen": _run_eigen,
    "holder": _run_holder,
    "sobolev": _run_sobolev,
    "stability-sweep": _run_sweep,
}


def _write_csv(path: Path, header, rows) -> None:
    lines = [",".join(header)]
    lines += [",".join(_fmt(cell) for cell in row) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _env_scale() -> float:
    raw = os.environ.get("TALENTI_SEED_TOL")
    if raw is None:
        return 1.0
    try:
        val = float(raw)
    except ValueError:
        raise ParseError(f"TALENTI_SEED_TOL = {raw!r}: not a number") \
            from None
    if not (val > 0.0 and math.isfinite(val)):
        raise ParseError(f"TALENTI_SEED_TOL = {raw!r}: must be a positive "
                         "finite number")
    return val


def _execute(sc: Scenario, scale: float, out_dir: Path) -> RunRecord:
    budget = Budget(scale * sc.params["tol_scale"])
    start = time.perf_counter()
    checks, tables, error = [], [], ""
    try:
        checks, tables = _RUNNERS[sc.kind](sc, budget)
    except Exception as exc:  # library refusals become recorded failures
        error = f"{type(exc).__name__}: {' '.join(str(exc).split())}"
    wall = time.perf_counter() - start
    written = []
    for fname, header, rows in tables:
        _write_csv(out_dir / fname, header, rows)
        written.append(fname)
    rec = RunRecord(sc.name, sc.kind, sc.params, tuple(checks),
                    tuple(written), wall, error)
    (out_dir / f"{sc.name}.record").write_text(rec.to_block(),
                                               encoding="utf-8")
    return rec


def run_scenarios(scenarios, out_dir, jobs: int = 1,
                  label: str = "scenarios") -> list[RunRecord]:
    """Execute scenarios, write all artifacts, return the records."""
    if not scenarios:
        raise ParseError("no scenarios to run")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    scale = _env_scale()
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(
                lambda sc: _execute(sc, scale, out), scenarios))
    else:
        records = [_execute(sc, scale, out) for sc in scenarios]
    good = sum(r.passed for r in records)
    lines = ["[summary]",
             f"source = {label}",
             f"kernel = {_KERNEL}",
             f"scenarios = {len(records)}",
             f"passed = {good}",
             f"failed = {len(records) - good}",
             f"status = {'pass' if good == len(records) else 'fail'}"]
    lines += [f"scenario.{r.name} = {'pass' if r.passed else 'fail'}"
              for r in records]
    (out / "summary.record").write_text("\n".join(lines) + "\n",
                                        encoding="utf-8")
    return records


def _suite_sharpness() -> str:
    parts = []
    for N in (3, 4):
        for p in ("1.5", "2", "3"):
            for tag, f in (("const", "const 1"), ("cospos", "cospos")):
                parts.append(f"[sharp-N{N}-p{p}-{tag}]\nkind = talenti\n"
                             f"K = {N - 1}\nN = {N}\np = {p}\nv = 0.5\n"
                             f"f = {f}\nn = 4096\n")
    return "\n".join(parts)


def _suite_caps() -> str:
    parts = []
    for a in ("0.2", "0.3"):
        for v in ("0.3", "0.5"):
            parts.append(f"[cap-a{a}-v{v}]\nkind = talenti\nK = 2\nN = 3\n"
                         f"p = 2\nv = {v}\na = {a}\n"
                         f"f = twolevel 2 0.5 0.25\n")
    return "\n".join(parts)


def _suite_eigen() -> str:
    parts = []
    for N in (3, 4, 5):
        parts.append(f"[eigen-model-N{N}]\nkind = eigen\nK = {N - 1}\n"
                     f"N = {N}\np = 2\nv = 0.5\n")
    return "\n".join(parts)


_SUITES = {
    "sharpness": _suite_sharpness(),
    "talenti-shifted-cap": _suite_caps(),
    "eigen-analytic": _suite_eigen(),
}


def list_builtin_suites() -> tuple[str, ...]:
    """Built-in suite names, in their canonical order."""
    return tuple(_SUITES)


def suite_scenarios(name: str) -> list[Scenario]:
    """Parsed scenarios of a built-in suite."""
    text = _SUITES.get(name)
    if text is None:
        raise ParseError(f"unknown suite {name!r}; available: "
                         + ", ".join(_SUITES))
    return parse_scenarios_text(text, f"suite:{name}")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="talenti-kit",
        description="Scenario runner for the symmetrization comparison kit.")
    sub = ap.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run every scenario in an INI file")
    p_run.add_argument("scenario_file", help="path to the scenario file")
    p_suite = sub.add_parser("suite", help="run a built-in scenario pack")
    p_suite.add_argument("name", help="suite name, see: talenti-kit list")
    for sp in (p_run, p_suite):
        sp.add_argument("--out", default="runs",
                        help="output directory (default: runs)")
        sp.add_argument("--jobs", type=int, default=1,
                        help="scenarios to run in parallel threads")
    sub.add_parser("list", help="print the built-in suite names")
    args = ap.parse_args(argv)

    if args.command == "list":
        for name in list_builtin_suites():
            print(name)
        return 0
    try:
        if args.command == "run":
            scenarios = load_scenarios(args.scenario_file)
            label = str(args.scenario_file)
        else:
            scenarios = suite_scenarios(args.name)
            label = f"suite:{args.name}"
        if args.jobs < 1:
            raise ParseError(f"--jobs = {args.jobs}: must be at least 1")
        records = run_scenarios(scenarios, Path(args.out), args.jobs, label)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    for rec in records:
        note = f"  [{rec.error}]" if rec.error else ""
        print(f"{rec.name}: {'pass' if rec.passed else 'fail'} "
              f"({rec.wall_time:.2f} s){note}")
    good = sum(r.passed for r in records)
    print(f"{good}/{len(records)} passed; records in {args.out}")
    return 0 if good == len(records) else 1


if __name__ == "__main__":
    sys.exit(main())
