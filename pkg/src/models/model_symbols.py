# src/models/model_symbols.py
"""
Operator/symbol conditions for the normal-form model operators.

Implements the qualitative tests that decide whether subprincipal control
can produce quasimodes: sign change of beta = Im b, sign change of the
xi2-derivative of beta, and factorability of the operator.
"""
import logging
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import bisect

from config.constants import BISECTION_TOLERANCE, MIN_SIGN_SAMPLES, ZERO_TOLERANCE
from src.entities.models import (
    ONE,
    CoefficientFunction,
    Condition,
    FactorabilityVerdict,
    ModelOperatorSpec,
    OperatorFactor,
    OperatorTerm,
    RequiredCondition,
    SignChangeReport,
    SignDirection,
    SubprincipalSymbol,
)
from src.utils.validators import (
    ConditionNotMetError,
    InvalidInputError,
    PreconditionError,
    validate_interval,
)

logger = logging.getLogger(__name__)

Interval = Tuple[float, float]


# =============================================================================
# HELPERS
# =============================================================================

def is_identically_zero(f: CoefficientFunction, interval: Optional[Interval] = None) -> bool:
    """Zero test relative to the coefficient scale.

    With an interval the sup norm over it is compared, otherwise the
    coefficients themselves.
    """
    if interval is None:
        return max(abs(c) for c in f.coeffs) < ZERO_TOLERANCE * f.scale
    return f.sup_norm(*interval) < ZERO_TOLERANCE * f.scale


def _real_values(f: CoefficientFunction, t: np.ndarray) -> np.ndarray:
    return np.real(f(t))


def _running_integral(f: CoefficientFunction, t: np.ndarray) -> np.ndarray:
    """Integral of Re f from t[0], exact for polynomial coefficients."""
    antiderivative = f.real_part().antiderivative()
    return np.real(antiderivative(t) - antiderivative(t[0]))


def _root(f: CoefficientFunction, a: float, b: float) -> float:
    return float(bisect(lambda s: float(np.real(f(s))), a, b, xtol=BISECTION_TOLERANCE))


def _refine_argmax(f: CoefficientFunction, t: np.ndarray, idx: int) -> float:
    """Refine a sampled maximum of the running integral to the root of f."""
    if idx == 0 or idx == len(t) - 1:
        return float(t[idx])
    a, b = float(t[idx - 1]), float(t[idx + 1])
    fa, fb = float(np.real(f(a))), float(np.real(f(b)))
    if fa > 0 > fb:
        return _root(f, a, b)
    return float(t[idx])


# =============================================================================
# SIGN CHANGES
# =============================================================================

def detect_sign_change(
    f: CoefficientFunction,
    interval: Interval,
    samples: int = 257,
) -> SignChangeReport:
    """
    Locate a sign crossing of Re f, scanning t upward.

    The first plus-to-minus crossing is reported when one exists, otherwise
    the first crossing of either direction.

    Args:
        f: real-valued polynomial coefficient (imaginary parts ignored)
        interval: (t_lo, t_hi)
        samples: uniform samples before bisection refinement

    Returns:
        SignChangeReport with the crossing, its direction and the argmax of
        the running integral of f.

    Raises:
        InvalidInputError: degenerate interval or too few samples
    """
    t_lo, t_hi = interval
    validate_interval(t_lo, t_hi)
    if samples < MIN_SIGN_SAMPLES:
        raise InvalidInputError(f"samples must be >= {MIN_SIGN_SAMPLES}, got {samples}")

    t = np.linspace(t_lo, t_hi, samples)
    values = _real_values(f, t)
    tolerance = ZERO_TOLERANCE * f.scale

    if np.max(np.abs(values)) < tolerance:
        return SignChangeReport(False, None, None, float(t_lo), identically_zero=True)

    running = _running_integral(f, t)
    t_max = _refine_argmax(f, t, int(np.argmax(running)))

    crossings = _bracketed_crossings(values, tolerance)
    if not crossings:
        return SignChangeReport(False, None, None, t_max)

    # plus-to-minus crossings are the ones that matter for the construction
    lo_idx, hi_idx, direction = next(
        (c for c in crossings if c[2] is SignDirection.PLUS_TO_MINUS), crossings[0]
    )
    t_cross = _root(f, float(t[lo_idx]), float(t[hi_idx]))
    logger.debug(f"sign change {direction.value} at t={t_cross:.12g}, t_max={t_max:.12g}")
    return SignChangeReport(True, t_cross, direction, t_max)


def _bracketed_crossings(values: np.ndarray, tolerance: float) -> List[Tuple[int, int, SignDirection]]:
    """Sample index pairs bracketing each sign flip, near-zero samples skipped."""
    signs = np.where(np.abs(values) < tolerance, 0, np.sign(values)).astype(int)
    crossings = []
    last_idx: Optional[int] = None
    for idx, sign in enumerate(signs):
        if sign == 0:
            continue
        if last_idx is not None and sign != signs[last_idx]:
            direction = (
                SignDirection.PLUS_TO_MINUS if signs[last_idx] > 0 else SignDirection.MINUS_TO_PLUS
            )
            crossings.append((last_idx, idx, direction))
        last_idx = idx
    return crossings


def _controlling_coefficient(b: SubprincipalSymbol, condition: Optional[Condition]) -> Tuple[CoefficientFunction, Condition]:
    if condition is None:
        condition = Condition.DXI_BETA if is_identically_zero(b.b0.imag_part()) else Condition.BETA
    if condition is Condition.BETA:
        return b.b0.imag_part(), condition
    if condition is Condition.DXI_BETA:
        return b.b1.imag_part(), condition
    raise InvalidInputError(f"no controlling coefficient for {condition.value}")


def origin_shift(
    b: SubprincipalSymbol,
    interval: Interval,
    condition: Optional[Condition] = None,
    samples: int = 257,
) -> float:
    """Location of the maximum of the running integral of the controlling beta."""
    coefficient, condition = _controlling_coefficient(b, condition)
    report = detect_sign_change(coefficient, interval, samples)
    if report.identically_zero:
        raise ConditionNotMetError(condition.value, "imaginary part identically zero")

    spacing = (interval[1] - interval[0]) / (samples - 1)
    interior = interval[0] + spacing <= report.t_max <= interval[1] - spacing
    if not interior or float(np.real(coefficient(report.t_max - spacing))) <= 0:
        raise ConditionNotMetError(
            condition.value,
            "no plus-to-minus sign change, the running integral has no interior maximum",
        )
    return report.t_max


def normalize_origin(
    b: SubprincipalSymbol,
    interval: Interval,
    condition: Optional[Condition] = None,
    samples: int = 257,
) -> SubprincipalSymbol:
    """
    Translate b in t so the maximum of the integral of beta sits at t = 0.

    Afterwards the integral from 0 to t of the controlling imaginary part is
    non-positive on the shifted interval.

    Raises:
        ConditionNotMetError: no plus-to-minus sign change
    """
    s = origin_shift(b, interval, condition, samples)
    if abs(s) < 10 * BISECTION_TOLERANCE:
        return b
    logger.info(f"Normalizing origin by t* = {s:.12g}")
    return b.translated(s)


# =============================================================================
# FACTORABILITY
# =============================================================================

def combined_subprincipal(spec: ModelOperatorSpec) -> CoefficientFunction:
    """b0 + b1 when both carry the same xi2 power (k >= 1)."""
    coeffs = np.polynomial.polynomial.polyadd(spec.b.b0.coeffs, spec.b.b1.coeffs)
    return CoefficientFunction.from_polynomial(np.polynomial.Polynomial(coeffs))


def _is_factorable(spec: ModelOperatorSpec) -> bool:
    if spec.is_transversal:
        return is_identically_zero(spec.b.b0)
    return spec.k == spec.j


def _nonzero_terms(*terms: OperatorTerm) -> Tuple[OperatorTerm, ...]:
    return tuple(term for term in terms if not is_identically_zero(term.coefficient))


def build_factors(spec: ModelOperatorSpec) -> Tuple[OperatorFactor, OperatorFactor]:
    """
    Symbol-level factors with P = P2 P1 modulo order-zero terms.

    Tangential k = j:  P1 = h(D1 + b),  P2 = h(D1 - 2b) + q (hD2)^j.
    Transversal R = 0: P1 = D1 + A2,    P2 = h^2 (D2 + A1).

    Raises:
        PreconditionError: spec is not factorable
    """
    if not _is_factorable(spec):
        raise PreconditionError("operator is not factorable; no P2 P1 decomposition")

    if spec.is_transversal:
        p1 = OperatorFactor(
            "D1 + A2",
            _nonzero_terms(OperatorTerm(ONE, 0, d1=1), OperatorTerm(spec.b.b1, 0)),
        )
        p2 = OperatorFactor(
            "h^2 (D2 + A1)",
            _nonzero_terms(OperatorTerm(ONE, 2, d2=1), OperatorTerm(spec.a1, 2)),
        )
        return p1, p2

    b = combined_subprincipal(spec)
    p1 = OperatorFactor(
        "h (D1 + b)",
        _nonzero_terms(OperatorTerm(ONE, 1, d1=1), OperatorTerm(b, 1)),
    )
    p2 = OperatorFactor(
        f"h (D1 - 2b) + q (hD2)^{spec.j}",
        _nonzero_terms(
            OperatorTerm(ONE, 1, d1=1),
            OperatorTerm(b.scaled(-2), 1),
            OperatorTerm(spec.q, spec.j, d2=spec.j),
        ),
    )
    return p1, p2


def factor_differential(p1: OperatorFactor, p2: OperatorFactor, t: float, h: float) -> Tuple[complex, complex]:
    """Gradient of the symbol of P2 P1 in (xi1, xi2) at xi = 0 (central differences on the exact polynomial)."""
    eps = 1e-6

    def product(xi1: float, xi2: float) -> complex:
        return complex(p2.symbol(t, xi1, xi2, h) * p1.symbol(t, xi1, xi2, h))

    d_xi1 = (product(eps, 0.0) - product(-eps, 0.0)) / (2 * eps)
    d_xi2 = (product(0.0, eps) - product(0.0, -eps)) / (2 * eps)
    return d_xi1, d_xi2


def classify_factorability(spec: ModelOperatorSpec) -> FactorabilityVerdict:
    """Decide whether P factors as P2 P1 and which condition otherwise applies."""
    factorable = _is_factorable(spec)
    if spec.is_transversal:
        n = 0 if factorable else 1
    else:
        n = spec.j - spec.k

    if factorable:
        p1, p2 = build_factors(spec)
        return FactorabilityVerdict(True, n, RequiredCondition.NONE, p1, p2)

    # k counts the xi2-derivatives of beta that must change sign; n < 0 leaves
    # the b-term below the transport balance
    if n < 0 or (not spec.is_transversal and spec.k >= 2):
        required = RequiredCondition.HIGHER_DERIVATIVE
    elif spec.is_transversal or spec.k == 0:
        required = RequiredCondition.BETA
    else:
        required = RequiredCondition.DXI_BETA
    return FactorabilityVerdict(False, n, required)


# =============================================================================
# CONDITION CLASSIFIER
# =============================================================================

def classify_condition(spec: ModelOperatorSpec, interval: Interval, samples: int = 257) -> Condition:
    """
    Map a spec to its row of the case/condition table.

    Raises:
        InvalidInputError: subprincipal symbol identically zero (no analysis possible)
    """
    verdict = classify_factorability(spec)
    if verdict.factorable or verdict.required_condition is RequiredCondition.HIGHER_DERIVATIVE:
        return Condition.NO_QUASIMODE

    beta0 = spec.b.b0.imag_part()
    beta1 = spec.b.b1.imag_part()
    zero0 = is_identically_zero(beta0, interval)
    zero1 = is_identically_zero(beta1, interval)

    if not zero0:
        if detect_sign_change(beta0, interval, samples).has_change:
            return Condition.BETA
        return Condition.NO_QUASIMODE
    if not zero1 and not spec.is_transversal:
        if detect_sign_change(beta1, interval, samples).has_change:
            return Condition.DXI_BETA
        return Condition.NO_QUASIMODE
    if zero1 and not (is_identically_zero(spec.b.b0) and is_identically_zero(spec.b.b1)):
        return Condition.ALPHA_OPEN
    if not zero1:
        return Condition.NO_QUASIMODE
    raise InvalidInputError("subprincipal symbol identically zero: operator of subprincipal type excluded")
