# src/models/quasimode_builder.py
"""
WKB quasimode construction for the subprincipal-controlled model operators.

The amplitude is a = chi_t(t) sum_m h^(m beta) phi_m E(t) with
E = exp(-i B(t) / (xi2^n h^(n beta))), B = int_0^t b_h / q, and
phi_m(t, x2) = sum_p P_{m,p}(t) D2^p chi(x2). The P_{m,p} are Chebyshev
series on the t window, the interval around the cutoff center where |E|
does not grow. The quasimode is v_h = exp(i kappa x2) a, kappa = xi2 / h^alpha
snapped to a grid wavenumber.
"""
import json
import logging
from dataclasses import dataclass, field
from math import comb
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from numpy.polynomial import Chebyshev, Polynomial

from config.constants import (
    CONJUGATED_GRID,
    CORRECTION_GUARD,
    CUTOFF_PLATEAU,
    CUTOFF_RADIUS,
    DEFAULT_XI2,
    MIN_WINDOW_RADIUS,
    NORM_LOWER_C,
    NORM_UPPER_C,
    RECIPROCAL_MAX_DEGREE,
    RECIPROCAL_MIN_DEGREE,
    RECIPROCAL_TOLERANCE,
    SERIES_TRIM,
    TRANSVERSE_WIDTH,
    WINDOW_SAMPLES,
    XI2_MIN,
    ZERO_TOLERANCE,
)
from src.entities.models import CoefficientFunction, ModelOperatorSpec, SubprincipalSymbol
from src.models.exponent_calculus import ScalingParams
from src.models.model_symbols import classify_factorability
from src.models.operator_engine import (
    T_AXIS,
    X2_AXIS,
    Field,
    Grid,
    controlling_power,
    derivative_values,
)
from src.utils.validators import (
    IllConditionedCorrectionError,
    InvalidInputError,
    NoSubprincipalControlError,
    ResolutionError,
    validate_h,
    validate_positive,
)

logger = logging.getLogger(__name__)

Amplitude = Dict[int, Chebyshev]


# =============================================================================
# RECIPES
# =============================================================================

def _smooth_step(x: np.ndarray) -> np.ndarray:
    """C-infinity step: 0 for x <= 0, 1 for x >= 1."""
    x = np.asarray(x, dtype=float)

    def rise(y: np.ndarray) -> np.ndarray:
        positive = y > 0
        return np.where(positive, np.exp(-1 / np.where(positive, y, 1.0)), 0.0)

    up, down = rise(x), rise(1 - x)
    return up / (up + down)


@dataclass(frozen=True)
class CutoffSpec:
    """
    Product cutoff chi(t, x2) = flat_top(t) * flat_top(x2) * exp(-x2^2 / (2 width^2)).

    flat_top equals 1 for |s| <= plateau * radius and vanishes beyond radius,
    so chi is smooth with support in the radius box. Offsets come from center.
    """
    radius: float = CUTOFF_RADIUS
    center: Tuple[float, float] = (0.0, 0.0)
    t_radius: float = CUTOFF_RADIUS
    plateau: float = CUTOFF_PLATEAU
    width: float = TRANSVERSE_WIDTH

    def __post_init__(self):
        validate_positive("cutoff radius", self.radius)
        validate_positive("cutoff t_radius", self.t_radius)
        validate_positive("cutoff width", self.width)
        if not 0 < self.plateau < 1:
            raise InvalidInputError(f"cutoff plateau must lie in (0, 1), got {self.plateau}")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    @staticmethod
    def flat_top(s: np.ndarray, plateau: float = CUTOFF_PLATEAU) -> np.ndarray:
        return _smooth_step((1 - np.abs(np.asarray(s, dtype=float))) / (1 - plateau))

    def transverse(self, x2: np.ndarray) -> np.ndarray:
        offset = np.asarray(x2, dtype=float) - self.center[1]
        return self.flat_top(offset / self.radius, self.plateau) * np.exp(-offset ** 2 / (2 * self.width ** 2))

    def along_t(self, t: np.ndarray, radius: Optional[float] = None) -> np.ndarray:
        return self.flat_top((np.asarray(t, dtype=float) - self.center[0]) / (radius or self.t_radius), self.plateau)

    def on_plateau(self, axis: np.ndarray, t_radius: Optional[float] = None) -> np.ndarray:
        """(t, x2) mask where both flat-top factors equal 1."""
        t_inside = np.abs(axis - self.center[0]) <= self.plateau * (t_radius or self.t_radius)
        x2_inside = np.abs(axis - self.center[1]) <= self.plateau * self.radius
        return t_inside[:, None] & x2_inside[None, :]


@dataclass(frozen=True)
class QuasimodeRecipe:
    spec: ModelOperatorSpec
    params: ScalingParams
    xi2: float = DEFAULT_XI2
    cutoff: CutoffSpec = field(default_factory=CutoffSpec)
    terms: int = 0
    allow_degenerate: bool = False

    def __post_init__(self):
        if abs(self.xi2) < XI2_MIN:
            raise InvalidInputError(f"|xi2| must be >= {XI2_MIN}, got {self.xi2}")
        if self.terms < 0:
            raise InvalidInputError(f"terms must be non-negative, got {self.terms}")
        if self.spec.j != self.params.j:
            raise InvalidInputError(f"spec j={self.spec.j} does not match scaling j={self.params.j}")
        if self.n_power < 0:
            raise InvalidInputError(
                f"k={self.spec.k} > j={self.spec.j}: controlling power {self.n_power} < 0, "
                "the subprincipal term cannot balance the transport equation"
            )

    @property
    def n_power(self) -> int:
        return controlling_power(self.spec)

    @property
    def beta(self) -> float:
        return float(self.params.beta)

    @property
    def alpha(self) -> float:
        return float(self.params.alpha)


@dataclass(frozen=True)
class PhaseIntegral:
    """B(t) = int_0^t b_h / q sampled at t."""
    t: np.ndarray
    values: np.ndarray
    n_power: int
    xi2: float
    h: float


@dataclass(frozen=True)
class TWindow:
    """Interval |t - center| < radius carrying the profile and the correction series."""
    center: float
    radius: float

    @property
    def domain(self) -> Tuple[float, float]:
        return (self.center - self.radius, self.center + self.radius)

    def contains(self, t: np.ndarray) -> np.ndarray:
        return np.abs(np.asarray(t, dtype=float) - self.center) < self.radius


# =============================================================================
# PHASE AND TRANSPORT
# =============================================================================

def _lift(spec: ModelOperatorSpec) -> int:
    return 1 if spec.is_transversal else spec.k1 - spec.k


def _effective_polynomial(b: SubprincipalSymbol, spec: ModelOperatorSpec, h: float, beta: float, xi2: float) -> Polynomial:
    lift = _lift(spec)
    return b.b0.polynomial + (h ** (lift * beta) * xi2 ** lift) * b.b1.polynomial


def _constant_q(spec: ModelOperatorSpec) -> Optional[complex]:
    """q as a number when constant (always 1 for the transversal model)."""
    if spec.is_transversal:
        return 1.0
    return spec.q.coeffs[0] if spec.q.is_constant else None


def phase_integral(
    b: SubprincipalSymbol,
    recipe: QuasimodeRecipe,
    t_samples: np.ndarray,
    h: float,
) -> PhaseIntegral:
    """
    Sample B(t) = int_0^t b_h(s) / q(s) ds.

    Exact antiderivative for constant q; otherwise the antiderivative of the
    Chebyshev product b_h * (1/q) on a symmetric interval through t = 0.
    """
    spec = recipe.spec
    t_samples = np.asarray(t_samples, dtype=float)
    integrand = _effective_polynomial(b, spec, h, recipe.beta, recipe.xi2)
    q_value = _constant_q(spec)

    if q_value is not None:
        if q_value == 0:
            raise InvalidInputError("q must not vanish")
        values = (integrand / q_value).integ(lbnd=0)(t_samples)
    else:
        reach = max(float(np.max(np.abs(t_samples))), 1.0) if t_samples.size else 1.0
        span = TWindow(0.0, reach)
        product = _coefficient_series(integrand, span) * reciprocal_series(spec.q, span)
        values = product.integ(lbnd=0)(t_samples)

    return PhaseIntegral(t_samples, np.asarray(values, dtype=complex), recipe.n_power, recipe.xi2, h)


def _phase_scale(recipe: QuasimodeRecipe, h: float) -> float:
    n = recipe.n_power
    return recipe.xi2 ** n * h ** (n * recipe.beta)


def t_window(recipe: QuasimodeRecipe, grid: Grid, h: float) -> TWindow:
    """
    Largest interval around the cutoff center on which |E| does not grow.

    The radius is the t cutoff radius (kept inside the box) unless
    Im B / xi2^n rises above its value at the center earlier. With n = 0 the
    profile does not depend on h and the full radius is used.

    Raises:
        InvalidInputError: window narrower than MIN_WINDOW_RADIUS
    """
    center = recipe.cutoff.center[0]
    reach = min(recipe.cutoff.t_radius, grid.half_width - abs(center) - grid.spacing)
    if reach < MIN_WINDOW_RADIUS:
        raise InvalidInputError(f"cutoff center t={center} leaves no room inside the box")
    if recipe.n_power == 0:
        return TWindow(center, reach)

    s = np.linspace(center - reach, center + reach, WINDOW_SAMPLES)
    growth = (phase_integral(recipe.spec.b, recipe, s, h).values / recipe.xi2 ** recipe.n_power).imag
    growth = growth - growth[WINDOW_SAMPLES // 2]
    tolerance = ZERO_TOLERANCE * max(1.0, float(np.max(np.abs(growth))))
    rising = np.abs(s - center)[growth > tolerance]
    radius = min(reach, float(np.min(rising))) if rising.size else reach
    if radius < MIN_WINDOW_RADIUS:
        raise InvalidInputError(
            f"|E| grows within {radius:.3e} of t={center}; normalize the origin to the maximum of Im B"
        )
    if radius < reach:
        logger.debug(f"t window shrunk to radius {radius:.4f} where Im B turns upward")
    return TWindow(center, radius)


def _refuse_degenerate(recipe: QuasimodeRecipe) -> None:
    if classify_factorability(recipe.spec).factorable and not recipe.allow_degenerate:
        raise NoSubprincipalControlError(
            "factorable operator: the transport solution exp(-i int b) is h-independent, "
            "no quasimode from subprincipal control"
        )


def profile(recipe: QuasimodeRecipe, grid: Grid, h: float, window: Optional[TWindow] = None) -> np.ndarray:
    """E(t) = exp(-i B(t) / (xi2^n h^(n beta))) inside the t window, zero outside."""
    window = window or t_window(recipe, grid, h)
    inside = window.contains(grid.axis)
    phase = phase_integral(recipe.spec.b, recipe, grid.axis[inside], h)
    values = np.zeros(grid.points_per_axis, dtype=complex)
    values[inside] = np.exp(-1j * phase.values / _phase_scale(recipe, h))
    return values


def transport_solution(recipe: QuasimodeRecipe, h: float, grid: Optional[Grid] = None) -> Field:
    """
    Leading amplitude a0 = chi * E on the grid.

    Raises:
        NoSubprincipalControlError: factorable spec without allow_degenerate
    """
    validate_h(h)
    _refuse_degenerate(recipe)
    grid = grid or Grid(CONJUGATED_GRID)
    window = t_window(recipe, grid, h)
    axis = grid.axis
    along_t = recipe.cutoff.along_t(axis, window.radius) * profile(recipe, grid, h, window)
    values = along_t[:, None] * recipe.cutoff.transverse(axis)[None, :]
    peak = float(np.max(np.abs(values)))
    if peak > 1 + 1e-9:
        logger.warning(f"|a0| reaches {peak:.3e} > 1; is b normalized at its maximum?")
    return Field(values, grid, {"h": h, "n_power": recipe.n_power, "xi2": recipe.xi2, "t_radius": window.radius})


def transport_residual(recipe: QuasimodeRecipe, h: float, grid: Optional[Grid] = None) -> float:
    """
    Relative residual of q xi2^j D1 a0 + h^(-n beta) xi2^k b_h a0 on the cutoff plateau.

    D1 is spectral; outside the plateau the cutoff derivatives are not part
    of the transport equation.
    """
    a0 = transport_solution(recipe, h, grid)
    grid = a0.grid
    spec = recipe.spec
    t = grid.axis[:, None]
    n = recipe.n_power
    b_power = 0 if spec.is_transversal else spec.k
    q = 1.0 if spec.is_transversal else spec.q(t)
    bh = _effective_polynomial(spec.b, spec, h, recipe.beta, recipe.xi2)(t)

    dominant = h ** (-n * recipe.beta) * recipe.xi2 ** b_power * bh * a0.values
    residual = q * recipe.xi2 ** spec.j * derivative_values(a0.values, grid, T_AXIS, 1) + dominant
    plateau = recipe.cutoff.on_plateau(grid.axis, a0.metadata["t_radius"])
    scale = np.linalg.norm(dominant[plateau])
    error = np.linalg.norm(residual[plateau])
    return float(error / scale) if scale > 0 else float(error)


# =============================================================================
# HIGHER AMPLITUDES
# =============================================================================

def _series(func, degree: int, window: TWindow) -> Chebyshev:
    return Chebyshev.interpolate(func, degree, domain=list(window.domain))


def _coefficient_series(f: Union[CoefficientFunction, Polynomial], window: TWindow) -> Chebyshev:
    """Exact Chebyshev form of a polynomial coefficient on the window."""
    poly = f.polynomial if isinstance(f, CoefficientFunction) else f
    return _series(lambda t: poly(t) + 0j, max(poly.degree(), 0), window)


def reciprocal_series(coefficient: CoefficientFunction, window: TWindow) -> Chebyshev:
    """
    1 / q as a Chebyshev series on the window.

    The degree doubles from RECIPROCAL_MIN_DEGREE until the two trailing
    coefficients fall below RECIPROCAL_TOLERANCE relative to the largest.

    Raises:
        InvalidInputError: q vanishes on the window
        IllConditionedCorrectionError: no degree up to RECIPROCAL_MAX_DEGREE is accurate
    """
    if coefficient.is_constant:
        if coefficient.coeffs[0] == 0:
            raise InvalidInputError("q must not vanish")
        return _series(lambda t: np.full_like(t, 1 / coefficient.coeffs[0], dtype=complex), 0, window)
    lo, hi = window.domain
    if np.min(np.abs(coefficient(np.linspace(lo, hi, WINDOW_SAMPLES)))) < 1e-12:
        raise InvalidInputError("q vanishes on the t window")

    degree = RECIPROCAL_MIN_DEGREE
    while degree <= RECIPROCAL_MAX_DEGREE:
        series = _series(lambda t: 1 / coefficient(t), degree, window)
        tail = np.max(np.abs(series.coef[-2:]))
        if tail <= RECIPROCAL_TOLERANCE * np.max(np.abs(series.coef)):
            return _trimmed(series)
        degree *= 2
    raise IllConditionedCorrectionError(
        f"1/q not resolved by degree {RECIPROCAL_MAX_DEGREE} Chebyshev series (tail {tail:.3e})"
    )


def _trimmed(series: Chebyshev) -> Chebyshev:
    return series.trim(SERIES_TRIM * max(1.0, float(np.max(np.abs(series.coef)))))


def _tilde_d1(amplitude: Amplitude, w: Chebyshev) -> Amplitude:
    """D1 conjugated by E: P -> -i P' + w P."""
    return {p: -1j * series.deriv() + w * series for p, series in amplitude.items()}


def _d2(amplitude: Amplitude, order: int = 1) -> Amplitude:
    return {p + order: series for p, series in amplitude.items()}


def _combine(*pieces: Tuple[complex, Amplitude]) -> Amplitude:
    out: Amplitude = {}
    for weight, amplitude in pieces:
        for p, series in amplitude.items():
            term = weight * series
            out[p] = out[p] + term if p in out else term
    return out


def _multiply(amplitude: Amplitude, factor: Chebyshev) -> Amplitude:
    return {p: factor * series for p, series in amplitude.items()}


@dataclass(frozen=True)
class CorrectionContext:
    """Chebyshev coefficients shared by every step of the recursion at one h."""
    window: TWindow
    q: Chebyshev
    reciprocal_q: Chebyshev
    a1: Chebyshev
    w: Chebyshev

    @classmethod
    def build(cls, recipe: QuasimodeRecipe, h: float, window: TWindow) -> "CorrectionContext":
        spec = recipe.spec
        q_coefficient = CoefficientFunction.constant(1.0) if spec.is_transversal else spec.q
        reciprocal_q = reciprocal_series(q_coefficient, window)
        bh = _coefficient_series(_effective_polynomial(spec.b, spec, h, recipe.beta, recipe.xi2), window)
        w = _trimmed(-bh * reciprocal_q / _phase_scale(recipe, h))
        return cls(window, _coefficient_series(q_coefficient, window), reciprocal_q, _coefficient_series(spec.a1, window), w)


def _subdominant(recipe: QuasimodeRecipe, phi: Amplitude, context: CorrectionContext, h: float) -> Amplitude:
    """
    Subdominant part of the conjugated operator, D1 replaced by D1 + w.

    Tangential: q sum_{mu>=1} C(j, mu) xi2^(j-mu) h^(mu alpha) D2^mu D1 + h^(1-j beta) D1^2.
    Transversal: h^alpha D2 D1 + h^(1-beta) a1 D1.
    """
    spec = recipe.spec
    w = context.w
    shift_term = (-spec.shift / h ** (1 + spec.j * recipe.beta), phi)

    if spec.is_transversal:
        return _combine(
            (h ** recipe.alpha, _tilde_d1(_d2(phi), w)),
            (h ** (1 - recipe.beta), _multiply(_tilde_d1(phi, w), context.a1)),
            shift_term,
        )
    j = spec.j
    pieces = [
        (comb(j, mu) * recipe.xi2 ** (j - mu) * h ** (mu * recipe.alpha), _multiply(_tilde_d1(_d2(phi, mu), w), context.q))
        for mu in range(1, j + 1)
    ]
    pieces.append((h ** (1 - j * recipe.beta), _tilde_d1(_tilde_d1(phi, w), w)))
    pieces.append(shift_term)
    return _combine(*pieces)


class AmplitudeEvaluator:
    """Evaluates series amplitudes against sampled D2^p chi, zero outside the t window."""

    def __init__(self, recipe: QuasimodeRecipe, grid: Grid, window: TWindow):
        self.grid = grid
        self.inside = window.contains(grid.axis)
        self.t = grid.axis[self.inside]
        self._chi = [recipe.cutoff.transverse(grid.axis).astype(complex)]

    def chi_derivative(self, p: int) -> np.ndarray:
        while len(self._chi) <= p:
            self._chi.append(derivative_values(self._chi[-1], self.grid, X2_AXIS, 1))
        return self._chi[p]

    def __call__(self, amplitude: Amplitude) -> np.ndarray:
        values = np.zeros((self.grid.points_per_axis,) * 2, dtype=complex)
        for p, series in amplitude.items():
            values[self.inside] += series(self.t)[:, None] * self.chi_derivative(p)[None, :]
        return values


def leading_amplitude(window: TWindow) -> Amplitude:
    return {0: _series(lambda t: np.ones_like(t, dtype=complex), 0, window)}


def higher_amplitudes(
    recipe: QuasimodeRecipe,
    h: float,
    grid: Optional[Grid] = None,
    a_prev: Optional[List[Amplitude]] = None,
) -> List[Amplitude]:
    """
    Corrections phi_1..phi_N from D1 phi_m = -S phi_(m-1) / (q xi2^j h^beta), phi_m(center) = 0.

    S is the subdominant part of the conjugated operator with D1 shifted by
    w = -b_h / (q xi2^n h^(n beta)); time-dependent q enters through its
    Chebyshev reciprocal on the t window.

    Args:
        recipe: construction recipe; recipe.terms is N
        h: semiclassical parameter
        grid: grid fixing the t window and the blow-up guard
        a_prev: known amplitudes phi_0..phi_(m-1); defaults to [phi_0]

    Returns:
        The N - len(a_prev) + 1 new amplitudes (empty for N = 0).

    Raises:
        IllConditionedCorrectionError: source above CORRECTION_GUARD
    """
    if recipe.terms == 0:
        return []
    grid = grid or Grid(CONJUGATED_GRID)
    window = t_window(recipe, grid, h)
    context = CorrectionContext.build(recipe, h, window)
    evaluate = AmplitudeEvaluator(recipe, grid, window)
    envelope = np.abs(profile(recipe, grid, h, window))[:, None]
    divisor = context.reciprocal_q / (recipe.xi2 ** recipe.spec.j * h ** recipe.beta)

    known = list(a_prev) if a_prev else [leading_amplitude(window)]
    new: List[Amplitude] = []
    while len(known) <= recipe.terms:
        source = {p: _trimmed(series * divisor) for p, series in _subdominant(recipe, known[-1], context, h).items()}
        magnitude = float(np.max(np.abs(evaluate(source) * envelope)))
        if not np.isfinite(magnitude) or magnitude > CORRECTION_GUARD:
            raise IllConditionedCorrectionError(
                f"correction source {magnitude:.3e} exceeds guard {CORRECTION_GUARD:.1e} at term {len(known)}"
            )
        phi = {p: -1j * series.integ(lbnd=window.center) for p, series in source.items()}
        known.append(phi)
        new.append(phi)
        logger.debug(f"amplitude term {len(known) - 1}: source sup {magnitude:.3e}")
    return new


# =============================================================================
# QUASIMODES
# =============================================================================

def build_amplitude(recipe: QuasimodeRecipe, grid: Grid, h: float) -> Field:
    """
    Conjugated amplitude chi_t sum_m h^(m beta) phi_m E, without the oscillating factor.

    Factorable specs (allow_degenerate) run the same recursion with n = 0.
    """
    validate_h(h)
    _refuse_degenerate(recipe)
    window = t_window(recipe, grid, h)
    evaluate = AmplitudeEvaluator(recipe, grid, window)
    total = evaluate(leading_amplitude(window))
    for m, phi in enumerate(higher_amplitudes(recipe, h, grid), start=1):
        total = total + h ** (m * recipe.beta) * evaluate(phi)
    along_t = recipe.cutoff.along_t(grid.axis, window.radius) * profile(recipe, grid, h, window)
    metadata = {
        "h": h,
        "beta": str(recipe.params.beta),
        "alpha": str(recipe.params.alpha),
        "xi2": recipe.xi2,
        "terms": recipe.terms,
        "n_power": recipe.n_power,
        "t_radius": window.radius,
    }
    return Field(along_t[:, None] * total, grid, metadata)


def snapped_frequency(recipe: QuasimodeRecipe, grid: Grid, h: float) -> Tuple[float, float]:
    """
    (raw, snapped) oscillation frequency xi2 / h^alpha.

    Raises:
        ResolutionError: frequency above the largest resolved wavenumber
    """
    raw = recipe.xi2 / h ** recipe.alpha
    if abs(raw) > grid.max_wavenumber:
        required = 2 * int(np.ceil(abs(raw) / grid.fundamental + 1))
        required = 1 << (required - 1).bit_length()
        raise ResolutionError(
            f"frequency {raw:.3e} above resolved wavenumber {grid.max_wavenumber:.3e}", required
        )
    snapped = grid.snap_wavenumber(raw)
    if snapped == 0:
        snapped = np.sign(raw) * grid.fundamental
        logger.warning(f"frequency {raw:.3e} below the first mode, snapped to {snapped:.3e}")
    return raw, float(snapped)


def build_quasimode(recipe: QuasimodeRecipe, grid: Grid, h: float) -> Field:
    """
    v_h = exp(i kappa x2) * sum_m h^(m beta) a_m with kappa the snapped frequency.

    Raises:
        NoSubprincipalControlError: factorable spec without allow_degenerate
        ResolutionError: grid too coarse for the oscillation
    """
    raw, snapped = snapped_frequency(recipe, grid, h)
    amplitude = build_amplitude(recipe, grid, h)
    x2 = grid.axis
    values = amplitude.values * np.exp(1j * snapped * x2)[None, :]
    metadata = dict(amplitude.metadata, kappa_raw=raw, kappa_snapped=snapped)
    return Field(values, grid, metadata)


# =============================================================================
# CHECKS AND DUMPS
# =============================================================================

@dataclass(frozen=True)
class NormBoundsReport:
    upper_ok: bool
    lower_ok: bool
    measured_norm: float
    lower_bound: float


def norm_bounds_check(
    v: Field,
    params: ScalingParams,
    h: float,
    upper: float = NORM_UPPER_C,
    lower: float = NORM_LOWER_C,
) -> NormBoundsReport:
    """||v|| <= C and ||v|| >= c h^((alpha + beta) / 2) (one transverse dimension)."""
    measured = v.norm()
    lower_bound = lower * h ** ((float(params.alpha) + float(params.beta)) / 2)
    return NormBoundsReport(measured <= upper, measured >= lower_bound, measured, lower_bound)


def dump_field(v: Field, path: Union[str, Path]) -> Tuple[Path, Path]:
    """Write (t, x2, re, im) rows as CSV plus a JSON metadata file beside it."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    t_mesh, x2_mesh = v.grid.mesh()
    frame = pd.DataFrame({
        "t": t_mesh.ravel(),
        "x2": x2_mesh.ravel(),
        "re": v.values.real.ravel(),
        "im": v.values.imag.ravel(),
    })
    frame.to_csv(path, index=False)
    meta_path = path.with_suffix(".json")
    metadata = dict(v.metadata, points_per_axis=v.grid.points_per_axis, half_width=v.grid.half_width)
    meta_path.write_text(json.dumps(metadata, indent=2, sort_keys=True, default=str))
    logger.info(f"Field dumped to {path}")
    return path, meta_path
