# src/models/exponent_calculus.py
"""
Exact bookkeeping of h-exponents of the form const + coeff * beta.

The scaling system, the remainder orders of the amplitude expansion and the
hard-coded term tables of each model family are kept as rationals; floats
only appear when an exponent is evaluated at a numeric beta.
"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Union

import pandas as pd

from config.constants import J_MAX
from src.entities.models import ModelOperatorSpec, OperatorCase
from src.utils.validators import InvalidInputError, InvalidScalingError, UnsupportedCaseError

logger = logging.getLogger(__name__)

Rational = Union[int, Fraction]


# =============================================================================
# EXPONENTS
# =============================================================================

@dataclass(frozen=True)
class HExponent:
    """Exponent const_part + beta_part * beta."""
    const_part: Fraction = Fraction(0)
    beta_part: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "const_part", Fraction(self.const_part))
        object.__setattr__(self, "beta_part", Fraction(self.beta_part))

    def __add__(self, other: "HExponent") -> "HExponent":
        return HExponent(self.const_part + other.const_part, self.beta_part + other.beta_part)

    def __sub__(self, other: "HExponent") -> "HExponent":
        return self + (-other)

    def __neg__(self) -> "HExponent":
        return HExponent(-self.const_part, -self.beta_part)

    def __mul__(self, factor: Rational) -> "HExponent":
        return HExponent(self.const_part * factor, self.beta_part * factor)

    __rmul__ = __mul__

    def evaluate(self, beta: Union[Fraction, float]) -> Union[Fraction, float]:
        """Numeric value; exact when beta is a Fraction."""
        if isinstance(beta, (Fraction, int)):
            return self.const_part + self.beta_part * Fraction(beta)
        return float(self.const_part) + float(self.beta_part) * beta

    def __str__(self) -> str:
        if self.beta_part == 0:
            return str(self.const_part)
        beta_term = "beta" if abs(self.beta_part) == 1 else f"{abs(self.beta_part)}*beta"
        if self.const_part == 0:
            return f"-{beta_term}" if self.beta_part < 0 else beta_term
        sign = "-" if self.beta_part < 0 else "+"
        return f"{self.const_part} {sign} {beta_term}"


def beta_power(coefficient: Rational) -> HExponent:
    return HExponent(0, coefficient)


# =============================================================================
# SCALING SYSTEM
# =============================================================================

@dataclass(frozen=True)
class ScalingParams:
    """alpha + beta + gamma = 1 with alpha = 1 - (j+2) beta and gamma = (j+1) beta."""
    j: int
    beta: Fraction
    alpha: Fraction
    gamma: Fraction

    @property
    def total(self) -> Fraction:
        return self.alpha + self.beta + self.gamma


def admissible_beta_range(j: int) -> Fraction:
    """Upper end of the open interval (0, 1/(j+2))."""
    return Fraction(1, j + 2)


def solve_scaling(j: int, beta: Union[Fraction, str, float]) -> ScalingParams:
    """
    Solve the scaling system for a given beta.

    Args:
        j: quadratic-factor exponent (1 transversal, 2 tangential, 3 higher tangency)
        beta: expansion step, converted exactly to a Fraction

    Returns:
        ScalingParams with alpha, beta, gamma summing to exactly 1

    Raises:
        InvalidInputError: j outside 1..J_MAX
        InvalidScalingError: beta outside (0, 1/(j+2))
    """
    if not 1 <= j <= J_MAX:
        raise InvalidInputError(f"j must lie in 1..{J_MAX}, got {j}")
    beta = Fraction(beta).limit_denominator(10 ** 6) if isinstance(beta, float) else Fraction(beta)
    upper = admissible_beta_range(j)
    if not 0 < beta < upper:
        raise InvalidScalingError(
            f"beta={beta} outside admissible range (0, {upper}) for j={j}: "
            f"alpha = 1 - {j + 2}*beta must stay positive"
        )
    return ScalingParams(j=j, beta=beta, alpha=1 - (j + 2) * beta, gamma=(j + 1) * beta)


def remainder_order(kappa: int, lam: int, mu: int, j: int) -> HExponent:
    """Order of xi2^kappa D1^lam D2^mu a inside the factored prefactor h^(1 + j beta)."""
    if min(kappa, lam, mu) < 0:
        raise InvalidInputError("kappa, lambda and mu must be non-negative")
    if not 1 <= j <= J_MAX:
        raise InvalidInputError(f"j must lie in 1..{J_MAX}, got {j}")
    return HExponent(lam + mu - 1, kappa - (j + 1) * mu - j)


# =============================================================================
# TERM TABLES
# =============================================================================

@dataclass(frozen=True)
class TermOrder:
    label: str
    raw: HExponent
    substituted: Optional[HExponent] = None
    cancelled: bool = False

    @property
    def order(self) -> HExponent:
        """Order once the transport solution is substituted."""
        return self.substituted if self.substituted is not None else self.raw


@dataclass(frozen=True)
class DominantOrder:
    order: HExponent
    labels: List[str]


def _controlling_power(spec: ModelOperatorSpec) -> int:
    if spec.is_transversal:
        return 1
    return spec.j - spec.k


def _operator_label(xi_power: int, d1: int, d2: int) -> str:
    parts = []
    for symbol, power in (("xi2", xi_power), ("D1", d1), ("D2", d2)):
        if power == 1:
            parts.append(symbol)
        elif power > 1:
            parts.append(f"{symbol}^{power}")
    return " ".join(parts)


def expansion_term_orders(spec: ModelOperatorSpec, params: ScalingParams) -> List[TermOrder]:
    """
    Term table of the conjugated operator for the supported model families.

    Substituting the transport solution cancels the b-term against the
    xi2^j D1 term; every D1 then picks up h^(-n beta) from the exponential.
    Tangential tables expand (xi2 + h^alpha D2)^j binomially for j = 1..3.

    Raises:
        UnsupportedCaseError: controlling power n < 0 (k > j)
    """
    if spec.j != params.j:
        raise InvalidInputError(f"spec j={spec.j} does not match scaling j={params.j}")

    n = _controlling_power(spec)
    if spec.is_transversal:
        return [
            TermOrder("b-term", beta_power(-1), cancelled=True),
            TermOrder("xi2 D1", remainder_order(1, 1, 0, 1), cancelled=True),
            TermOrder("D1 D2", remainder_order(0, 1, 1, 1)),
            TermOrder("a1 D1", HExponent(1, -1), HExponent(1, -2)),
            TermOrder("Taylor remainder", beta_power(1)),
            TermOrder("second-order Taylor remainder", beta_power(2)),
        ]
    if n < 0:
        raise UnsupportedCaseError(
            f"no expansion table for k={spec.k} > j={spec.j}: the b-term cannot balance xi2^j D1"
        )

    j = spec.j
    d1_loss = beta_power(-n)
    table = [
        TermOrder("b-term", beta_power(-n), cancelled=True),
        TermOrder(_operator_label(j, 1, 0), remainder_order(j, 1, 0, j), cancelled=True),
        TermOrder("D1^2", remainder_order(0, 2, 0, j), remainder_order(0, 2, 0, j) + 2 * d1_loss),
    ]
    for mu in range(1, j + 1):
        raw = remainder_order(j - mu, 1, mu, j)
        table.append(TermOrder(_operator_label(j - mu, 1, mu), raw, raw + d1_loss))
    table.append(TermOrder("Taylor remainder", beta_power(1)))
    return table


def dominant_order(
    table: List[TermOrder],
    beta_value: Union[Fraction, float],
    transport_solved: bool = True,
) -> DominantOrder:
    """
    Smallest exponent among the live terms at beta_value, with every minimizer.

    With transport_solved=False the raw orders of all terms are compared,
    cancelled ones included.
    """
    if not table:
        raise InvalidInputError("term table is empty")
    if not 0 < beta_value < 1:
        raise InvalidScalingError(f"beta_value must lie in (0, 1), got {beta_value}")

    if transport_solved:
        candidates = [(term.label, term.order) for term in table if not term.cancelled]
    else:
        candidates = [(term.label, term.raw) for term in table]

    lowest = min(order.evaluate(beta_value) for _, order in candidates)
    winners = [(label, order) for label, order in candidates if order.evaluate(beta_value) == lowest]
    return DominantOrder(order=winners[0][1], labels=[label for label, _ in winners])


def term_table_frame(table: List[TermOrder], beta_value: Union[Fraction, float]) -> pd.DataFrame:
    rows = []
    for term in table:
        rows.append({
            "label": term.label,
            "const_part": str(term.order.const_part),
            "beta_part": str(term.order.beta_part),
            "order": float(term.order.evaluate(beta_value)),
            "cancelled": term.cancelled,
        })
    return pd.DataFrame(rows, columns=["label", "const_part", "beta_part", "order", "cancelled"])


def export_term_table(table: List[TermOrder], beta_value: Union[Fraction, float], path: Union[str, Path]) -> Path:
    """Write the term table as CSV (label, const_part, beta_part, order, cancelled)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    term_table_frame(table, beta_value).to_csv(path, index=False)
    logger.info(f"Term table written to {path}")
    return path


@dataclass(frozen=True)
class RemainderCheck:
    """Live term orders of a tangential (j, k) model after the transport solution."""
    j: int
    k: int
    beta: Fraction
    orders: Dict[str, Fraction]
    dominant: DominantOrder
    beta_bound: Fraction

    @property
    def all_positive(self) -> bool:
        return all(order > 0 for order in self.orders.values())


def check_remainders(j: int, k: int, beta: Union[Fraction, str, float]) -> RemainderCheck:
    """
    Check that every live remainder of the tangential (j, k) model decays.

    beta_bound is the largest beta (capped by the admissible range) for which
    all live orders stay positive; each correction gains the dominant order.

    Raises:
        InvalidInputError: k >= j, no subprincipal control
        InvalidScalingError: beta outside (0, 1/(j+2))
    """
    params = solve_scaling(j, beta)
    if not 0 <= k < j:
        raise InvalidInputError(f"remainder check needs 0 <= k < j, got j={j}, k={k}")
    spec = ModelOperatorSpec(OperatorCase.TANGENTIAL, j=j, k=k)
    live = [term for term in expansion_term_orders(spec, params) if not term.cancelled]

    orders = {term.label: term.order.evaluate(params.beta) for term in live}
    bound = admissible_beta_range(j)
    for term in live:
        if term.order.beta_part < 0:
            bound = min(bound, term.order.const_part / -term.order.beta_part)
    report = RemainderCheck(j, k, params.beta, orders, dominant_order(live, params.beta), bound)
    if not report.all_positive:
        logger.warning(f"j={j} k={k} beta={params.beta}: remainders do not decay (bound {bound})")
    return report
