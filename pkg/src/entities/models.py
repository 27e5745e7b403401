# src/entities/models.py
"""Immutable domain types shared by the symbol, builder and engine layers."""
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple, Union

import numpy as np
from numpy.polynomial import Polynomial

from config.constants import J_MAX, K_MAX, POLY_MAX_DEGREE
from src.utils.validators import InvalidInputError

ArrayLike = Union[float, complex, np.ndarray]


# =============================================================================
# ENUMS
# =============================================================================

class OperatorCase(str, Enum):
    TRANSVERSAL = "Transversal"
    TANGENTIAL = "Tangential"


class SignDirection(str, Enum):
    PLUS_TO_MINUS = "PlusToMinus"
    MINUS_TO_PLUS = "MinusToPlus"


class Condition(str, Enum):
    BETA = "BetaCondition"
    DXI_BETA = "DxiBetaCondition"
    NO_QUASIMODE = "NoQuasimodeCondition"
    ALPHA_OPEN = "AlphaCaseOpen"


class RequiredCondition(str, Enum):
    BETA = "Beta"
    DXI_BETA = "DxiBeta"
    HIGHER_DERIVATIVE = "HigherDerivative"
    NONE = "None"


# =============================================================================
# COEFFICIENT FUNCTIONS
# =============================================================================

@dataclass(frozen=True)
class CoefficientFunction:
    """Complex polynomial in t, coefficients in ascending degree."""
    coeffs: Tuple[complex, ...] = (0j,)

    def __post_init__(self):
        coeffs = tuple(complex(c) for c in self.coeffs)
        if not coeffs:
            raise InvalidInputError("coefficient list must be non-empty (use [0] for zero)")
        if len(coeffs) - 1 > POLY_MAX_DEGREE:
            raise InvalidInputError(
                f"polynomial degree {len(coeffs) - 1} exceeds maximum {POLY_MAX_DEGREE}"
            )
        if not all(np.isfinite(c) for c in coeffs):
            raise InvalidInputError("coefficients must be finite")
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def constant(cls, value: complex) -> "CoefficientFunction":
        return cls((complex(value),))

    @classmethod
    def from_polynomial(cls, poly: Polynomial) -> "CoefficientFunction":
        coeffs = np.trim_zeros(np.asarray(poly.coef, dtype=complex), "b")
        return cls(tuple(coeffs) if coeffs.size else (0j,))

    def __call__(self, t: ArrayLike) -> ArrayLike:
        return np.polynomial.polynomial.polyval(t, np.asarray(self.coeffs))

    @property
    def polynomial(self) -> Polynomial:
        return Polynomial(np.asarray(self.coeffs, dtype=complex))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def scale(self) -> float:
        """Coefficient scale used by the zero tolerance."""
        return max(1.0, max(abs(c) for c in self.coeffs))

    @property
    def is_constant(self) -> bool:
        return all(c == 0 for c in self.coeffs[1:])

    def real_part(self) -> "CoefficientFunction":
        return CoefficientFunction(tuple(complex(c.real) for c in self.coeffs))

    def imag_part(self) -> "CoefficientFunction":
        return CoefficientFunction(tuple(complex(c.imag) for c in self.coeffs))

    def derivative(self) -> "CoefficientFunction":
        return CoefficientFunction.from_polynomial(self.polynomial.deriv())

    def antiderivative(self) -> Polynomial:
        """Antiderivative vanishing at t = 0 (may exceed the degree cap)."""
        return self.polynomial.integ(lbnd=0)

    def translated(self, s: float) -> "CoefficientFunction":
        """Return t -> f(t + s)."""
        return CoefficientFunction.from_polynomial(self.polynomial(Polynomial([s, 1.0])))

    def scaled(self, factor: complex) -> "CoefficientFunction":
        return CoefficientFunction(tuple(factor * c for c in self.coeffs))

    def sup_norm(self, t_lo: float, t_hi: float, samples: int = 257) -> float:
        t = np.linspace(t_lo, t_hi, samples)
        return float(np.max(np.abs(self(t))))


ZERO = CoefficientFunction((0j,))
ONE = CoefficientFunction((1 + 0j,))


@dataclass(frozen=True)
class SubprincipalSymbol:
    """b(t, xi2) = b0(t) + b1(t) xi2."""
    b0: CoefficientFunction = ZERO
    b1: CoefficientFunction = ZERO

    def __call__(self, t: ArrayLike, xi2: float = 0.0) -> ArrayLike:
        return self.b0(t) + self.b1(t) * xi2

    def alpha(self, t: ArrayLike, xi2: float = 0.0) -> ArrayLike:
        return np.real(self(t, xi2))

    def beta(self, t: ArrayLike, xi2: float = 0.0) -> ArrayLike:
        return np.imag(self(t, xi2))

    def translated(self, s: float) -> "SubprincipalSymbol":
        return SubprincipalSymbol(self.b0.translated(s), self.b1.translated(s))


# =============================================================================
# OPERATOR SPECIFICATION
# =============================================================================

@dataclass(frozen=True)
class ModelOperatorSpec:
    """Normal-form model operator.

    Tangential: P = hD1(hD1 + q (hD2)^j) + h b0 (hD2)^k + h b1 (hD2)^max(k,1) - shift.
    Transversal (j = 1): P = h^2 D1D2 + h a1 hD1 + h b1 hD2 + h b0 - shift,
    so A1 = a1, A2 = b1 and R = b0.
    """
    case: OperatorCase
    j: int
    k: int
    b: SubprincipalSymbol = field(default_factory=SubprincipalSymbol)
    q: CoefficientFunction = ONE
    a1: CoefficientFunction = ZERO
    shift: complex = 0j

    def __post_init__(self):
        object.__setattr__(self, "case", OperatorCase(self.case))
        object.__setattr__(self, "shift", complex(self.shift))
        if not 1 <= self.j <= J_MAX:
            raise InvalidInputError(f"j must lie in 1..{J_MAX}, got {self.j}")
        if not 0 <= self.k <= K_MAX:
            raise InvalidInputError(f"k must lie in 0..{K_MAX}, got {self.k}")
        if self.case is OperatorCase.TRANSVERSAL and self.j != 1:
            raise InvalidInputError("transversal model requires j = 1")
        if self.case is OperatorCase.TANGENTIAL and any(c != 0 for c in self.a1.coeffs):
            raise InvalidInputError("a1 is only meaningful for the transversal model")

    @property
    def k1(self) -> int:
        """xi2 power carried by b1 (b1 supplies one power when k = 0)."""
        return max(self.k, 1)

    @property
    def is_transversal(self) -> bool:
        return self.case is OperatorCase.TRANSVERSAL


# =============================================================================
# REPORTS
# =============================================================================

@dataclass(frozen=True)
class SignChangeReport:
    has_change: bool
    t_cross: Optional[float]
    direction: Optional[SignDirection]
    t_max: float
    identically_zero: bool = False


@dataclass(frozen=True)
class OperatorTerm:
    """coefficient(t) * h^h_power * D1^d1 D2^d2 (multiplication after derivatives)."""
    coefficient: CoefficientFunction
    h_power: int
    d1: int = 0
    d2: int = 0


@dataclass(frozen=True)
class OperatorFactor:
    label: str
    terms: Tuple[OperatorTerm, ...]

    def symbol(self, t: ArrayLike, xi1: ArrayLike, xi2: ArrayLike, h: float) -> ArrayLike:
        """Semiclassical symbol: h^p D^a maps to h^(p - |a|) xi^a."""
        total = 0j
        for term in self.terms:
            weight = h ** (term.h_power - term.d1 - term.d2)
            total = total + term.coefficient(t) * weight * xi1 ** term.d1 * xi2 ** term.d2
        return total


@dataclass(frozen=True)
class FactorabilityVerdict:
    factorable: bool
    n: int
    required_condition: RequiredCondition
    p1: Optional[OperatorFactor] = None
    p2: Optional[OperatorFactor] = None
