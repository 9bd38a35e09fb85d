"""Shared numerical kernels.

Everything downstream leans on four primitives that live here:

* ``integrate``: adaptive Gauss-Kronrod quadrature on a finite interval.
  Panels are bisected by worst-error-first priority.  A panel that keeps
  touching an interval endpoint at high depth is handed to a geometric
  tail loop that shrinks dyadically toward the endpoint, models the
  annulus contributions as a geometric series and either sums the tail in
  closed form (integrable power singularities such as ``t**-0.5``) or
  declares ``Divergence`` when the annuli refuse to decay.

* ``find_root``: bracketed scalar root finding (Brent) with an explicit
  ``NoBracket`` precheck.

* ``generalized_inverse``: the right inverse ``inf {t : m(t) < s}`` of a
  nonincreasing right-continuous step function, evaluated exactly from
  the step representation.

* ``MonotoneTable``: a tabulated cumulative of a positive density on
  ``[0, L]`` with machine-accurate pointwise evaluation (table value at
  the nearest node plus one Kronrod panel for the remainder) and a
  vectorized bisection inverse.

Integrands passed to these kernels must accept numpy arrays and evaluate
elementwise; none of the rules ever samples an interval endpoint, so
integrable endpoint singularities are safe.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import (
    Divergence,
    InvalidParameter,
    NoBracket,
    NonConvergence,
    OutOfDomain,
)

_EPS = float(np.finfo(float).eps)


@dataclass(frozen=True)
class Tolerance:
    """Accuracy targets shared by the iterative kernels.

    rel must stay above 8 machine epsilons and abs must be positive;
    max_subdivisions bounds the dyadic refinement depth.
    """

    rel: float = 1e-10
    abs: float = 1e-12
    max_subdivisions: int = 60

    def __post_init__(self) -> None:
        if not (self.rel >= 8.0 * _EPS):
            raise InvalidParameter(f"rel={self.rel} must be >= 8*eps")
        if not (self.abs > 0.0):
            raise InvalidParameter(f"abs={self.abs} must be positive")
        if self.max_subdivisions < 1:
            raise InvalidParameter("max_subdivisions must be a positive integer")


DEFAULT_TOL = Tolerance()


@dataclass(frozen=True)
class Grid:
    """Strictly increasing 1-D array of sample abscissas."""

    nodes: np.ndarray

    def __post_init__(self) -> None:
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2:
            raise InvalidParameter("grid needs at least two nodes")
        if not np.all(np.diff(nodes) > 0.0):
            raise InvalidParameter("grid nodes must be strictly increasing")
        object.__setattr__(self, "nodes", nodes)

    def __len__(self) -> int:
        return int(self.nodes.size)

    @property
    def spacing(self) -> np.ndarray:
        return np.diff(self.nodes)

    @staticmethod
    def cosine(a: float, b: float, n_cells: int) -> "Grid":
        """Chebyshev-style grid on [a, b], clustered at both endpoints."""
        if not (b > a):
            raise InvalidParameter("cosine grid needs b > a")
        theta = np.linspace(0.0, math.pi, n_cells + 1)
        return Grid(a + (b - a) * 0.5 * (1.0 - np.cos(theta)))


# 15-point Kronrod extension of 7-point Gauss, abscissas on [-1, 1].
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])          # 15 ascending
_WEIGHTS_K = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GAUSS_IDX = np.array([1, 3, 5, 7, 9, 11, 13])
_WEIGHTS_G = np.concatenate([_WG[:-1], _WG[::-1]])
_OFFSETS = 0.5 * (_NODES + 1.0)                             # in (0, 1)


def _panels(f, lefts: np.ndarray, rights: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Kronrod value and |K15 - G7| error estimate for a batch of panels."""
    lefts = np.atleast_1d(np.asarray(lefts, dtype=float))
    rights = np.atleast_1d(np.asarray(rights, dtype=float))
    widths = rights - lefts
    pts = lefts[:, None] + widths[:, None] * _OFFSETS[None, :]
    vals = np.asarray(f(pts.ravel()), dtype=float).reshape(pts.shape)
    half = 0.5 * widths
    k15 = half * (vals @ _WEIGHTS_K)
    g7 = half * (vals[:, _GAUSS_IDX] @ _WEIGHTS_G)
    return k15, np.abs(k15 - g7)


# Annulus-to-annulus decay at or above this ratio counts as "not decaying"
# for the divergence detector; anything below feeds the geometric tail sum.
_TAIL_STALL_RATIO = 0.9995
_TAIL_STALL_LIMIT = 40


def _endpoint_tail(f, x0: float, x1: float, side: int, budget: float,
                   total_hint: float, tol: Tolerance) -> tuple[float, float]:
    """Integrate f over a panel that touches a (possibly singular) endpoint.

    side=0 means the singular end is at x0 (left), side=1 at x1 (right).
    Returns (value, error) for the whole panel [x0, x1].
    """
    settled = 0.0
    settled_err = 0.0
    annuli: list[float] = []
    stall = 0
    prev_result = None
    for _ in range(400):
        width = x1 - x0
        if width <= 0.0 or not math.isfinite(width):
            return settled, settled_err
        mid = x0 + 0.5 * width
        if side == 0:
            (ann, tip), (aerr, _terr) = _panels(f, [mid, x0], [x1, mid])
            x1 = mid
        else:
            (ann, tip), (aerr, _terr) = _panels(f, [x0, mid], [mid, x1])
            x0 = mid
        settled += ann
        settled_err += aerr
        annuli.append(ann)
        current = total_hint + settled + tip
        floor = max(tol.abs, tol.rel * abs(current))
        if len(annuli) >= 2 and annuli[-2] != 0.0:
            ratio = abs(annuli[-1]) / abs(annuli[-2])
        else:
            ratio = 0.0
        if abs(ann) > floor and ratio >= _TAIL_STALL_RATIO:
            stall += 1
            if stall >= _TAIL_STALL_LIMIT:
                raise Divergence(
                    "endpoint refinements stopped reducing the integral; "
                    "the integrand looks non-integrable at the endpoint"
                )
        else:
            stall = 0
        if len(annuli) >= 4:
            r = [abs(annuli[-i]) / abs(annuli[-i - 1])
                 for i in (1, 2, 3) if annuli[-i - 1] != 0.0]
            if len(r) == 3:
                spread = max(r) - min(r)
                rho = r[0]
                if rho < _TAIL_STALL_RATIO and spread <= 0.05 * (1.0 - rho):
                    tail = annuli[-1] * rho / (1.0 - rho)
                    tail_err = (abs(annuli[-1]) * 2.0 * spread / (1.0 - rho) ** 2
                                + settled_err)
                    result = settled + tail
                    if prev_result is not None:
                        tail_err += abs(result - prev_result)
                    prev_result = result
                    if tail_err <= budget:
                        return result, tail_err
            if all(a == 0.0 for a in annuli[-3:]) and tip == 0.0:
                return settled, settled_err
    raise NonConvergence("endpoint tail refinement exhausted its budget")


def integrate(f, a: float, b: float, tol: Tolerance | None = None) -> float:
    """Adaptive quadrature of a vectorized integrand over [a, b].

    Integrable endpoint singularities are summed by geometric tail
    extrapolation; non-integrable ones raise Divergence.  Interior
    trouble that survives max_subdivisions bisections raises
    NonConvergence.
    """
    tol = tol or DEFAULT_TOL
    if not (math.isfinite(a) and math.isfinite(b)):
        raise InvalidParameter("integration bounds must be finite")
    if a == b:
        return 0.0
    if a > b:
        raise InvalidParameter("integration needs a <= b")

    # depth at which an endpoint-touching panel is handed to the tail loop
    tail_depth = min(12, tol.max_subdivisions)

    (val,), (err,) = _panels(f, [a], [b])
    heap: list[tuple[float, int, float, float, float, float, int]] = []
    counter = 0
    heapq.heappush(heap, (-err, counter, a, b, val, err, 0))
    heap_val = val
    heap_err = err
    settled_val = 0.0
    settled_err = 0.0
    left_done = False
    right_done = False

    for _ in range(20000):
        total = settled_val + heap_val
        target = max(tol.abs, tol.rel * abs(total))
        if settled_err + heap_err <= target or not heap:
            return total
        neg, _, pa, pb, pv, pe, depth = heapq.heappop(heap)
        heap_val -= pv
        heap_err -= pe
        touches_left = (pa == a) and not left_done
        touches_right = (pb == b) and not right_done
        if depth >= tail_depth and (touches_left or touches_right):
            side = 0 if touches_left else 1
            budget = max(0.25 * target, tol.abs)
            tv, te = _endpoint_tail(f, pa, pb, side, budget,
                                    settled_val + heap_val, tol)
            settled_val += tv
            settled_err += te
            if side == 0:
                left_done = True
            else:
                right_done = True
            continue
        if depth >= tol.max_subdivisions:
            raise NonConvergence(
                f"panel [{pa}, {pb}] still fails tolerance at depth {depth}"
            )
        mid = pa + 0.5 * (pb - pa)
        if mid <= pa or mid >= pb:
            # width at rounding floor; accept the panel as settled
            settled_val += pv
            settled_err += pe
            continue
        (v1, v2), (e1, e2) = _panels(f, [pa, mid], [mid, pb])
        counter += 1
        heapq.heappush(heap, (-e1, counter, pa, mid, v1, e1, depth + 1))
        counter += 1
        heapq.heappush(heap, (-e2, counter, mid, pb, v2, e2, depth + 1))
        heap_val += v1 + v2
        heap_err += e1 + e2
    raise NonConvergence("quadrature panel budget exhausted")


def find_root(g, lo: float, hi: float, tol: Tolerance | None = None) -> float:
    """Root of a scalar function on a bracketing interval [lo, hi].

    Requires g(lo) and g(hi) to differ in sign (NoBracket otherwise);
    convergence is guaranteed by bisection safeguards inside Brent.
    """
    tol = tol or DEFAULT_TOL
    if not (lo < hi):
        raise InvalidParameter("find_root needs lo < hi")
    glo = float(g(lo))
    ghi = float(g(hi))
    if glo == 0.0:
        return lo
    if ghi == 0.0:
        return hi
    if glo * ghi > 0.0:
        raise NoBracket(f"no sign change on [{lo}, {hi}]: g={glo:.3g},{ghi:.3g}")
    try:
        root = brentq(g, lo, hi, xtol=tol.abs, rtol=max(tol.rel, 4.0 * _EPS),
                      maxiter=200)
    except RuntimeError as exc:  # pragma: no cover - brentq rarely fails
        raise NonConvergence(str(exc)) from exc
    return float(root)


def generalized_inverse(m, s: float) -> float:
    """inf { t >= 0 : m(t) < s } for a nonincreasing step function m.

    m exposes ``breakpoints`` (ascending jump abscissas) and ``levels``
    (one more entry than breakpoints; value on each interval).  At s = 0
    the essential-supremum convention applies: the largest abscissa where
    m first reaches zero is returned.
    """
    if s < 0.0:
        raise InvalidParameter("generalized inverse needs s >= 0")
    bp = np.asarray(m.breakpoints, dtype=float)
    lv = np.asarray(m.levels, dtype=float)
    if lv.size != bp.size + 1:
        raise InvalidParameter("step function needs len(levels) == len(breakpoints)+1")
    if s == 0.0:
        hits = np.nonzero(lv <= 0.0)[0]
        if hits.size == 0:
            return math.inf
        i = int(hits[0])
        return 0.0 if i == 0 else float(bp[i - 1])
    # first level strictly below s; levels are nonincreasing
    i = int(np.searchsorted(-lv, -s, side="right"))
    if i >= lv.size:
        return math.inf
    return 0.0 if i == 0 else float(bp[i - 1])


class MonotoneTable:
    """Tabulated cumulative of a positive density on [0, length].

    The density is integrated once over a cosine-clustered grid (one
    Kronrod panel per half cell); pointwise values are then the table
    entry at the nearest node below plus a single Kronrod panel for the
    remainder, which keeps evaluation at machine accuracy without any
    interpolation error.  The inverse runs a vectorized bisection inside
    the bracketing table cell.
    """

    def __init__(self, density, length: float, n_cells: int = 4096,
                 knots=()) -> None:
        if not (length > 0.0 and math.isfinite(length)):
            raise InvalidParameter("length must be positive and finite")
        self.density = density
        self.length = float(length)
        base = Grid.cosine(0.0, self.length, n_cells).nodes
        pins = np.asarray(knots, dtype=float)
        if pins.size:
            # pin known kinks/jumps of the density to cell edges so no
            # panel straddles them; panels stay spectrally accurate
            if np.any(pins <= 0.0) or np.any(pins >= self.length):
                raise InvalidParameter("knots must lie strictly inside (0, length)")
            base = np.unique(np.concatenate([base, pins]))
        fine = np.empty(2 * base.size - 1)
        fine[0::2] = base
        fine[1::2] = 0.5 * (base[:-1] + base[1:])
        self._x = fine
        inc, _ = _panels(density, fine[:-1], fine[1:])
        table = np.concatenate([[0.0], np.cumsum(inc)])
        self._c = table
        self.total = float(table[-1])

    def _residual(self, x0: np.ndarray, x1: np.ndarray) -> np.ndarray:
        width = x1 - x0
        pts = x0[:, None] + width[:, None] * _OFFSETS[None, :]
        vals = np.asarray(self.density(pts.ravel()), dtype=float).reshape(pts.shape)
        return 0.5 * width * (vals @ _WEIGHTS_K)

    def cumulative(self, t):
        """Integral of the density over [0, t]; accepts scalars or arrays."""
        arr = np.atleast_1d(np.asarray(t, dtype=float))
        slack = 1e-12 * self.length
        if np.any(arr < -slack) or np.any(arr > self.length + slack):
            raise OutOfDomain(f"cumulative argument outside [0, {self.length}]")
        clipped = np.clip(arr, 0.0, self.length)
        idx = np.clip(np.searchsorted(self._x, clipped, side="right") - 1,
                      0, self._x.size - 2)
        out = self._c[idx] + self._residual(self._x[idx], clipped)
        out = np.clip(out, 0.0, self.total)
        return out if np.ndim(t) else float(out[0])

    def inverse(self, v):
        """Abscissa t with cumulative(t) = v; accepts scalars or arrays."""
        arr = np.atleast_1d(np.asarray(v, dtype=float))
        slack = 1e-12 * max(self.total, 1.0)
        if np.any(arr < -slack) or np.any(arr > self.total + slack):
            raise OutOfDomain(f"inverse argument outside [0, {self.total}]")
        clipped = np.clip(arr, 0.0, self.total)
        idx = np.clip(np.searchsorted(self._c, clipped, side="right") - 1,
                      0, self._c.size - 2)
        lo = self._x[idx].copy()
        hi = self._x[idx + 1].copy()
        base = self._c[idx]
        t = 0.5 * (lo + hi)
        # guarded Newton inside the bracketing cell, with the density as
        # the derivative; steps leaving the bracket fall back to bisection
        for _ in range(100):
            ft = base + self._residual(self._x[idx], t) - clipped
            below = ft < 0.0
            lo = np.where(below, t, lo)
            hi = np.where(below, hi, t)
            d = np.asarray(self.density(t), dtype=float)
            with np.errstate(divide="ignore", invalid="ignore"):
                tn = t - ft / d
            bad = ~np.isfinite(tn) | (tn <= lo) | (tn >= hi)
            tn = np.where(bad, 0.5 * (lo + hi), tn)
            if float(np.max(np.abs(tn - t))) <= 4e-16 * self.length:
                t = tn
                break
            t = tn
        out = t
        out[clipped <= 0.0] = 0.0
        out[clipped >= self.total] = self.length
        return out if np.ndim(v) else float(out[0])
