"""Exception types shared across the package.

Every failure mode that callers are expected to branch on gets its own
class; plain ValueError is reserved for malformed arguments that indicate
a programming error rather than a mathematical outcome.
"""
from __future__ import annotations


class RadialShootError(Exception):
    """Base class for all package-specific errors."""


# --- nonlinearity / landscape ---

class DomainExceeded(RadialShootError):
    """Evaluation or trajectory left the domain of the nonlinearity."""


class ContinuityGap(RadialShootError):
    """Adjacent pieces of a piecewise nonlinearity do not match at a joint."""


class OrderingViolated(RadialShootError):
    """Jump-family junction points are not strictly ordered with room for bridges."""


class NoBeta(RadialShootError):
    """The potential integral F never returns to zero; no shooting window exists."""


class AmbiguousZero(RadialShootError):
    """A zero of f could not be isolated at the configured grid resolution."""


class LandscapeIncomplete(RadialShootError):
    """A landscape quantity needed here (gamma_seq, beta_star, ...) is missing."""


# --- integrator ---

class StartRadiusTooLarge(RadialShootError):
    """The series start radius h0 is too coarse for the requested tolerance."""


class StepSizeUnderflow(RadialShootError):
    """The adaptive stepper could not meet tolerance with a representable step."""


class OutOfRange(RadialShootError):
    """A sample point lies outside the stored trajectory range."""


# --- classifier ---

class InconclusiveClassification(RadialShootError):
    """The trajectory terminated without any certificate deciding its class.

    Attributes
    ----------
    reason : str
        Machine-readable tag ("reached_rmax", "near_double_zero", ...).
    nodes : int
        Number of certified zero crossings seen before termination.
    """

    def __init__(self, message: str, *, reason: str = "", nodes: int = 0):
        super().__init__(message)
        self.reason = reason
        self.nodes = nodes


# --- diagnostics ---

class InvalidHeight(RadialShootError):
    """A monitored height lies below the shooting threshold beta."""


class NotMonotone(RadialShootError):
    """The requested trajectory segment is not strictly monotone in u."""


class FVanishes(RadialShootError):
    """f(u) has a zero inside a segment where the inverse-function trick needs f != 0."""


# --- finder ---

class BracketBroken(RadialShootError):
    """A bisection bracket lost its two-sided classification."""


class NotFound(RadialShootError):
    """No transition of the requested kind exists in the searched range."""


class SearchExhausted(RadialShootError):
    """All schedules were exhausted without certifying a jump construction.

    Carries the best rejected candidate for post-mortem inspection.
    """

    def __init__(self, message: str, *, best: object = None):
        super().__init__(message)
        self.best = best


class ReproductionFailed(RadialShootError):
    """The packaged multi-jump example could not be rebuilt end to end.

    Attributes
    ----------
    stage : str
        Name of the construction stage that diverged.
    """

    def __init__(self, message: str, *, stage: str = ""):
        super().__init__(message)
        self.stage = stage
