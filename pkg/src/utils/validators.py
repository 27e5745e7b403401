# src/utils/validators.py
"""Input validation utilities and the error hierarchy."""
import math
from typing import Optional

import numpy as np


# =============================================================================
# ERRORS
# =============================================================================

class QuasimodeError(ValueError):
    """Base class for every domain error raised by the toolkit."""


class InvalidInputError(QuasimodeError):
    """Malformed or degenerate input (intervals, specs, matrices)."""


class ConditionNotMetError(QuasimodeError):
    """A sign-change condition required by an operation does not hold."""

    def __init__(self, condition: str, detail: str = ""):
        self.condition = condition
        message = f"{condition} not met"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message)


class InvalidScalingError(QuasimodeError):
    """Scaling exponent outside its admissible open interval."""


class UnsupportedCaseError(QuasimodeError):
    """(case, j, k) combination without a hard-coded expansion."""


class PreconditionError(QuasimodeError):
    """Operation called on a spec that does not satisfy its precondition."""


class NoSubprincipalControlError(PreconditionError):
    """Quasimode construction refused for a factorable operator."""


class IllConditionedCorrectionError(QuasimodeError):
    """Amplitude correction source exceeded the blow-up guard."""


class ResolutionError(QuasimodeError):
    """Grid too coarse for the oscillation frequency."""

    def __init__(self, message: str, required_points: int):
        self.required_points = required_points
        super().__init__(f"{message} (need at least {required_points} points per axis)")


class ResourceError(QuasimodeError):
    """Dense oracle requested on a grid above the memory guard."""


class InvalidSampleError(QuasimodeError):
    """Decay samples unusable for a log-log fit."""


class SweepError(QuasimodeError):
    """Every h value of a sweep failed."""


class VariationalBoundError(QuasimodeError):
    """sigma_min exceeded a measured quasimode ratio (implementation bug)."""


# =============================================================================
# VALIDATORS
# =============================================================================

def validate_interval(t_lo: float, t_hi: float) -> None:
    """Reject degenerate or non-finite intervals."""
    if not (math.isfinite(t_lo) and math.isfinite(t_hi)):
        raise InvalidInputError(f"interval bounds must be finite, got [{t_lo}, {t_hi}]")
    if not t_lo < t_hi:
        raise InvalidInputError(f"degenerate interval [{t_lo}, {t_hi}]")


def validate_positive(name: str, value: float) -> None:
    """Validate a strictly positive real parameter."""
    if not (math.isfinite(value) and value > 0):
        raise InvalidInputError(f"{name} must be positive, got {value}")


def validate_h(h: float) -> None:
    """Semiclassical parameter must lie in (0, 1)."""
    if not (0.0 < h < 1.0):
        raise InvalidInputError(f"h must lie in (0, 1), got {h}")


def validate_grid_size(n: int) -> Optional[str]:
    """Return an error message unless n is an even point count >= 4.

    Production grids are powers of two; the dense oracle also accepts
    small even sizes such as 24.
    """
    if n < 4 or n % 2:
        return f"points_per_axis must be even and >= 4, got {n}"
    return None


def validate_finite(values) -> bool:
    """True when every entry is finite."""
    return bool(np.all(np.isfinite(np.asarray(values))))
