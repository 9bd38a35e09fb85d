"""Exception types shared across the kit.

Every failure mode that callers are expected to catch has its own class so
that scenario runners can map them to exit codes without string matching.
"""

from __future__ import annotations


class TalentiKitError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameter(TalentiKitError):
    """A constructor argument violates its documented range."""


class OutOfDomain(TalentiKitError):
    """A point lies outside the interval a function is defined on."""


class NonConvergence(TalentiKitError):
    """An iterative kernel exhausted its budget before meeting tolerance."""


class Divergence(TalentiKitError):
    """Quadrature detected a non-integrable endpoint singularity."""


class NoBracket(TalentiKitError):
    """A root finder was given an interval with no sign change."""


class MeasureOutOfRange(TalentiKitError):
    """Cell measures are negative or exceed the ambient total mass."""


class NegativeData(TalentiKitError):
    """A source term that must be nonnegative takes negative values."""


class IntegrabilityFailure(TalentiKitError):
    """The source term is not integrable against the reference measure."""


class InvalidShift(TalentiKitError):
    """A cap shift falls outside the admissible range."""


class InvalidMass(TalentiKitError):
    """A prescribed mass fraction falls outside (0, 1)."""


class DegenerateLevel(TalentiKitError):
    """A superlevel set has zero measure or zero perimeter."""


class NoCrossing(TalentiKitError):
    """Two profiles stay on one side of each other; no crossing exists."""


class ParseError(TalentiKitError):
    """A scenario file is malformed; the message names the offending field."""


class CheckFailure(TalentiKitError):
    """At least one scenario check failed its tolerance."""
