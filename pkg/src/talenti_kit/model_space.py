"""One-dimensional model geometry for positive curvature bounds.

For curvature parameter K > 0 and dimension parameter N > 1 the model
is the segment [0, L] with L = pi * sqrt((N-1)/K), carrying the
probability density

    h(t) = sin(t * sqrt(K/(N-1)))**(N-1) / c,

where c normalizes the total mass to one.  The cumulative H, its
inverse and the profile I(v) = h(H^{-1}(v)) are the basic objects the
rest of the kit symmetrizes against: I(v) is the sharp lower bound for
the perimeter of a set of mass v in any space with the same curvature
and dimension bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import numerics
from .errors import InvalidParameter, OutOfDomain


@dataclass(frozen=True)
class ModelConstants:
    """Small-radius comparison constants.

    gamma1 bounds the density from above via gamma1 * t**(N-1) and
    gamma2 = gamma1 / N plays the same role for the cumulative.
    """

    gamma1: float
    gamma2: float


class ModelSpace:
    """Weighted model segment with tabulated cumulative and inverse."""

    def __init__(self, K: float, N: float, tol: numerics.Tolerance | None = None,
                 n_cells: int = 4096) -> None:
        if not (K > 0.0 and math.isfinite(K)):
            raise InvalidParameter(f"curvature K={K} must be positive")
        if not (N > 1.0 and math.isfinite(N)):
            raise InvalidParameter(f"dimension N={N} must exceed 1")
        self.K = float(K)
        self.N = float(N)
        self._scale = math.sqrt(K / (N - 1.0))
        self.L = math.pi / self._scale
        tol = tol or numerics.DEFAULT_TOL
        raw = lambda t: np.maximum(np.sin(self._scale * np.asarray(t)), 0.0) ** (N - 1.0)
        self.c = numerics.integrate(raw, 0.0, self.L, tol)
        self._table = numerics.MonotoneTable(self.density, self.L, n_cells=n_cells)

    def __repr__(self) -> str:
        return f"ModelSpace(K={self.K}, N={self.N}, L={self.L:.6g})"

    def density(self, t):
        """Normalized density h(t); zero at both endpoints by continuity."""
        arr = np.atleast_1d(np.asarray(t, dtype=float))
        slack = 1e-12 * self.L
        if np.any(arr < -slack) or np.any(arr > self.L + slack):
            raise OutOfDomain(f"density argument outside [0, {self.L}]")
        clipped = np.clip(arr, 0.0, self.L)
        # sin can round to a tiny negative just below L; clamp before the
        # fractional power
        s = np.maximum(np.sin(self._scale * clipped), 0.0)
        out = s ** (self.N - 1.0) / self.c
        out[clipped == self.L] = 0.0  # exact limit; sin(pi) rounds to ~1e-16
        return out if np.ndim(t) else float(out[0])

    def cumulative(self, t):
        """Mass H(t) of [0, t], normalized so that H(L) = 1."""
        out = np.asarray(self._table.cumulative(t)) / self._table.total
        out = np.clip(out, 0.0, 1.0)
        return out if np.ndim(t) else float(out)

    def inverse_cumulative(self, v):
        """Radius enclosing mass v; inverse of cumulative on [0, 1]."""
        arr = np.atleast_1d(np.asarray(v, dtype=float))
        if np.any(arr < -1e-12) or np.any(arr > 1.0 + 1e-12):
            raise OutOfDomain("mass fraction outside [0, 1]")
        out = self._table.inverse(np.clip(arr, 0.0, 1.0) * self._table.total)
        return out if np.ndim(v) else float(out[0])

    def isoperimetric_profile(self, v):
        """I(v) = h(H^{-1}(v)), the model perimeter of a ball of mass v."""
        return self.density(self.inverse_cumulative(v))

    def constants(self) -> ModelConstants:
        gamma1 = self._scale ** (self.N - 1.0) / self.c
        return ModelConstants(gamma1=gamma1, gamma2=gamma1 / self.N)


def make_model(K: float, N: float, tol: numerics.Tolerance | None = None) -> ModelSpace:
    """Build the model segment for a positive curvature bound."""
    return ModelSpace(K, N, tol=tol)
