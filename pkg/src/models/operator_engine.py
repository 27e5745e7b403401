# src/models/operator_engine.py
"""
Periodic-grid discretization of the model operators.

Derivatives are Fourier multipliers on the box [-L, L)^2 (axis -2 is t,
axis -1 is x2). Every routine accepts a leading batch dimension so the
dense oracle can be assembled by applying the operator to basis vectors.
"""
import logging
from dataclasses import dataclass, field
from math import comb
from typing import Optional, Tuple

import numpy as np
from scipy import linalg

from config.constants import BOX_HALF_WIDTH, DEFAULT_XI2
from config.settings import ORACLE_MAX_GRID
from src.entities.models import ModelOperatorSpec, OperatorFactor
from src.models.exponent_calculus import ScalingParams
from src.models.model_symbols import build_factors
from src.utils.validators import (
    InvalidInputError,
    ResourceError,
    validate_finite,
    validate_grid_size,
    validate_positive,
)

logger = logging.getLogger(__name__)

T_AXIS = -2
X2_AXIS = -1


# =============================================================================
# GRID AND FIELDS
# =============================================================================

@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid, identical on both axes."""
    points_per_axis: int
    half_width: float = BOX_HALF_WIDTH

    def __post_init__(self):
        error = validate_grid_size(self.points_per_axis)
        if error:
            raise InvalidInputError(error)
        validate_positive("half_width", self.half_width)

    @property
    def spacing(self) -> float:
        return 2 * self.half_width / self.points_per_axis

    @property
    def axis(self) -> np.ndarray:
        return -self.half_width + self.spacing * np.arange(self.points_per_axis)

    @property
    def wavenumbers(self) -> np.ndarray:
        """Integer multiples of pi/L in FFT order."""
        return 2 * np.pi * np.fft.fftfreq(self.points_per_axis, d=self.spacing)

    @property
    def nyquist_index(self) -> int:
        return self.points_per_axis // 2

    @property
    def fundamental(self) -> float:
        return np.pi / self.half_width

    @property
    def max_wavenumber(self) -> float:
        """Largest wavenumber resolved without touching the Nyquist mode."""
        return self.fundamental * (self.nyquist_index - 1)

    def mesh(self) -> Tuple[np.ndarray, np.ndarray]:
        """(T, X2) with indexing='ij'."""
        return np.meshgrid(self.axis, self.axis, indexing="ij")

    def snap_wavenumber(self, kappa: float) -> float:
        return self.fundamental * round(kappa / self.fundamental)


@dataclass
class Field:
    """Complex samples over the (t, x2) grid."""
    values: np.ndarray
    grid: Grid
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        n = self.grid.points_per_axis
        if self.values.shape[-2:] != (n, n):
            raise InvalidInputError(f"field shape {self.values.shape} does not match grid {n}x{n}")
        if not validate_finite(self.values):
            raise InvalidInputError("field contains non-finite values")

    def norm(self) -> float:
        """Discrete L2 norm with weight spacing^2."""
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2)) * self.grid.spacing)

    def with_values(self, values: np.ndarray) -> "Field":
        return Field(values, self.grid, dict(self.metadata))


def _multiplier(grid: Grid, order: int, h: float) -> np.ndarray:
    symbol = (h * grid.wavenumbers) ** order
    if order % 2:
        symbol[grid.nyquist_index] = 0.0
    return symbol


def derivative_values(values: np.ndarray, grid: Grid, axis: int, order: int, h: float = 1.0) -> np.ndarray:
    """(hD)^order along one axis, D = -i d/dx, on raw arrays."""
    if order < 1:
        raise InvalidInputError(f"derivative order must be >= 1, got {order}")
    shape = [1] * values.ndim
    shape[axis] = grid.points_per_axis
    symbol = _multiplier(grid, order, h).reshape(shape)
    return np.fft.ifft(symbol * np.fft.fft(values, axis=axis), axis=axis)


def fourier_derivative(f: Field, axis: int, order: int, h: float = 1.0) -> Field:
    """
    Apply (hD)^order along axis as a Fourier multiplier.

    Args:
        f: field on the periodic grid
        axis: 0/-2 for t, 1/-1 for x2
        order: derivative order >= 1
        h: semiclassical scale in the multiplier (h * wavenumber)^order

    Returns:
        New field; the unmatched Nyquist mode is zeroed for odd orders.
    """
    axis = T_AXIS if axis in (0, T_AXIS) else X2_AXIS
    return f.with_values(derivative_values(f.values, f.grid, axis, order, h))


def _power(values: np.ndarray, grid: Grid, axis: int, order: int, h: float) -> np.ndarray:
    if order == 0:
        return values
    return derivative_values(values, grid, axis, order, h)


# =============================================================================
# FULL OPERATOR
# =============================================================================

def _apply_full(spec: ModelOperatorSpec, v: np.ndarray, grid: Grid, h: float) -> np.ndarray:
    t = grid.axis[:, None]
    if spec.is_transversal:
        d1 = derivative_values(v, grid, T_AXIS, 1, h)
        d2 = derivative_values(v, grid, X2_AXIS, 1, h)
        out = derivative_values(d2, grid, T_AXIS, 1, h)
        out = out + h * spec.a1(t) * d1 + h * spec.b.b1(t) * d2 + h * spec.b.b0(t) * v
        return out - spec.shift * v

    inner = derivative_values(v, grid, T_AXIS, 1, h) + spec.q(t) * _power(v, grid, X2_AXIS, spec.j, h)
    out = derivative_values(inner, grid, T_AXIS, 1, h)
    out = out + h * spec.b.b0(t) * _power(v, grid, X2_AXIS, spec.k, h)
    out = out + h * spec.b.b1(t) * _power(v, grid, X2_AXIS, spec.k1, h)
    return out - spec.shift * v


def apply_full_operator(spec: ModelOperatorSpec, f: Field, h: float) -> Field:
    """P(h) f - shift f, with derivatives acting after multiplications as in the model formula."""
    return f.with_values(_apply_full(spec, f.values, f.grid, h))


def _apply_factor(factor: OperatorFactor, v: np.ndarray, grid: Grid, h: float) -> np.ndarray:
    t = grid.axis[:, None]
    out = np.zeros_like(v)
    for term in factor.terms:
        w = _power(v, grid, X2_AXIS, term.d2, 1.0)
        w = _power(w, grid, T_AXIS, term.d1, 1.0)
        out = out + term.coefficient(t) * h ** term.h_power * w
    return out


def apply_factor(factor: OperatorFactor, f: Field, h: float) -> Field:
    return f.with_values(_apply_factor(factor, f.values, f.grid, h))


# =============================================================================
# CONJUGATED OPERATOR
# =============================================================================

def effective_subprincipal(spec: ModelOperatorSpec, t: np.ndarray, h: float, beta: float, xi2: float) -> np.ndarray:
    """b_h(t) = b0 + h^((k1-k) beta) xi2^(k1-k) b1 (transversal: b0 + h^beta xi2 b1)."""
    lift = 1 if spec.is_transversal else spec.k1 - spec.k
    return spec.b.b0(t) + h ** (lift * beta) * xi2 ** lift * spec.b.b1(t)


def controlling_power(spec: ModelOperatorSpec) -> int:
    return 1 if spec.is_transversal else spec.j - spec.k


def apply_conjugated_operator(
    spec: ModelOperatorSpec,
    a: Field,
    h: float,
    params: ScalingParams,
    xi2: float = DEFAULT_XI2,
) -> Field:
    """
    Phase-conjugated operator acting on amplitudes, prefactor h^(1 + j beta) stripped.

    Tangential, alpha = 1 - (j+2) beta:
        q sum_mu C(j, mu) xi2^(j-mu) h^(mu alpha) D1 D2^mu a
        + h^(1-j b) D1^2 a + h^(-n b) xi2^k b_h a
    Transversal j=1:
        xi2 D1 a + h^alpha D1D2 a + h^(-b) b_h a + h^(1-b) a1 D1 a

    x2 derivatives are composed from first-order multipliers.
    """
    if spec.j != params.j:
        raise InvalidInputError(f"spec j={spec.j} does not match scaling j={params.j}")
    beta = float(params.beta)
    alpha = float(params.alpha)
    grid = a.grid
    t = grid.axis[:, None]
    v = a.values
    bh = effective_subprincipal(spec, t, h, beta, xi2)
    n = controlling_power(spec)
    prefactor = h ** (1 + spec.j * beta)

    d1 = derivative_values(v, grid, T_AXIS, 1)
    if spec.is_transversal:
        d1d2 = derivative_values(d1, grid, X2_AXIS, 1)
        out = xi2 * d1 + h ** alpha * d1d2 + h ** (-beta) * bh * v
        out = out + h ** (1 - beta) * spec.a1(t) * d1
    else:
        principal = xi2 ** spec.j * d1
        mixed = d1
        for mu in range(1, spec.j + 1):
            mixed = derivative_values(mixed, grid, X2_AXIS, 1)
            principal = principal + comb(spec.j, mu) * xi2 ** (spec.j - mu) * h ** (mu * alpha) * mixed
        d11 = derivative_values(v, grid, T_AXIS, 2)
        out = spec.q(t) * principal + h ** (1 - spec.j * beta) * d11
        out = out + h ** (-n * beta) * xi2 ** spec.k * bh * v

    return a.with_values(out - spec.shift / prefactor * v)


# =============================================================================
# DENSE ORACLE
# =============================================================================

def _check_oracle_size(grid: Grid) -> None:
    if grid.points_per_axis > ORACLE_MAX_GRID:
        raise ResourceError(
            f"dense oracle limited to {ORACLE_MAX_GRID} points per axis, got {grid.points_per_axis}"
        )


DENSE_CHUNK = 512


def _dense_from(apply, grid: Grid) -> np.ndarray:
    """Columns are images of unit vectors, built in chunks."""
    n = grid.points_per_axis
    size = n * n
    matrix = np.empty((size, size), dtype=complex)
    for start in range(0, size, DENSE_CHUNK):
        stop = min(start + DENSE_CHUNK, size)
        basis = np.zeros((stop - start, size), dtype=complex)
        basis[np.arange(stop - start), np.arange(start, stop)] = 1.0
        images = apply(basis.reshape(stop - start, n, n))
        matrix[:, start:stop] = images.reshape(stop - start, size).T
    return matrix


def assemble_dense(spec: ModelOperatorSpec, grid: Grid, h: float) -> np.ndarray:
    """
    Dense matrix of P(h) on flattened fields (t-major ordering).

    Raises:
        ResourceError: grid above ORACLE_MAX_GRID
    """
    _check_oracle_size(grid)
    logger.debug(f"Assembling dense operator n={grid.points_per_axis}, h={h:.3e}")
    return _dense_from(lambda v: _apply_full(spec, v, grid, h), grid)


def assemble_factor_dense(factor: OperatorFactor, grid: Grid, h: float) -> np.ndarray:
    _check_oracle_size(grid)
    return _dense_from(lambda v: _apply_factor(factor, v, grid, h), grid)


def derivative_matrix(grid: Grid, order: int = 1, h: float = 1.0) -> np.ndarray:
    """1-D multiplier matrix of (hD)^order."""
    n = grid.points_per_axis
    identity = np.eye(n, dtype=complex)
    return derivative_values(identity, grid, 0, order, h)


def smallest_singular_value(matrix: np.ndarray) -> float:
    """
    Smallest singular value of a dense matrix.

    Raises:
        InvalidInputError: non-finite entries
    """
    matrix = np.asarray(matrix)
    if matrix.size == 0 or not validate_finite(matrix):
        raise InvalidInputError("matrix must be non-empty with finite entries")
    return float(linalg.svdvals(matrix)[-1])


def project_nonzero_x2_modes(values: np.ndarray) -> np.ndarray:
    """Remove the zero Fourier mode in x2 (the x2-mean of each t-row)."""
    return values - values.mean(axis=X2_AXIS, keepdims=True)


def nonzero_mode_basis(grid: Grid) -> np.ndarray:
    """Orthonormal basis of flattened fields with zero x2-mean."""
    n = grid.points_per_axis
    mean_free = linalg.null_space(np.ones((1, n)))
    return np.kron(np.eye(n), mean_free)


def restricted_smallest_singular_value(matrix: np.ndarray, grid: Grid) -> float:
    """sigma_min of the operator restricted to the complement of the x2 zero mode."""
    return smallest_singular_value(matrix @ nonzero_mode_basis(grid))


def commutator_with_adjoint_norm(matrix: np.ndarray) -> float:
    """||A A* - A* A||, zero exactly for normal matrices."""
    adjoint = matrix.conj().T
    return float(linalg.norm(matrix @ adjoint - adjoint @ matrix, 2))


def factorization_defect(spec: ModelOperatorSpec, grid: Grid, h: float) -> float:
    """
    Spectral norm of (P + shift) - P2 P1 on the oracle grid.

    Raises:
        PreconditionError: spec not factorable
        ResourceError: grid above ORACLE_MAX_GRID
    """
    p1, p2 = build_factors(spec)
    operator = assemble_dense(spec, grid, h) + spec.shift * np.eye(grid.points_per_axis ** 2)
    product = assemble_factor_dense(p2, grid, h) @ assemble_factor_dense(p1, grid, h)
    defect = float(linalg.norm(operator - product, 2))
    logger.debug(f"Factorization defect at h={h:.3e}: {defect:.3e}")
    return defect


def field_from_function(grid: Grid, func, metadata: Optional[dict] = None) -> Field:
    """Sample func(T, X2) on the grid mesh."""
    t_mesh, x2_mesh = grid.mesh()
    return Field(func(t_mesh, x2_mesh), grid, metadata or {})
