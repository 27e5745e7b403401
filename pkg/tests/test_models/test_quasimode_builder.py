# tests/test_models/test_quasimode_builder.py
import json
import logging
from fractions import Fraction

import numpy as np
import pandas as pd
import pytest

from config.constants import CUTOFF_RADIUS
from src.entities.models import CoefficientFunction, Condition, ModelOperatorSpec, OperatorCase, SubprincipalSymbol
from src.models.exponent_calculus import solve_scaling
from src.models.model_symbols import normalize_origin
from src.models.operator_engine import Grid, apply_conjugated_operator
from src.models.quasimode_builder import (
    CutoffSpec,
    QuasimodeRecipe,
    TWindow,
    build_amplitude,
    build_quasimode,
    dump_field,
    higher_amplitudes,
    norm_bounds_check,
    phase_integral,
    reciprocal_series,
    t_window,
    transport_residual,
    transport_solution,
)
from src.utils.validators import (
    InvalidInputError,
    NoSubprincipalControlError,
    ResolutionError,
)

PARAMS = solve_scaling(2, Fraction(1, 8))
PLATEAU_EDGE = 0.8 * CUTOFF_RADIUS


def _recipe(spec, **kwargs):
    beta = Fraction(1, 10) if spec.j == 3 else Fraction(1, 8)
    return QuasimodeRecipe(spec, solve_scaling(spec.j, beta), **kwargs)


def _column_at_x2_zero(field):
    return field.values[:, field.grid.points_per_axis // 2]


def _conjugated_residual(spec, recipe, grid, h):
    a = build_amplitude(recipe, grid, h)
    return apply_conjugated_operator(spec, a, h, recipe.params, recipe.xi2).norm() / a.norm()


# =============================================================================
# cutoff
# =============================================================================

def test_flat_top_plateau_and_support():
    s = np.array([0.0, 0.5, 0.8, 0.9, 1.0, 1.2])
    values = CutoffSpec.flat_top(s, 0.8)
    assert np.allclose(values[:3], 1.0)
    assert 0 < values[3] < 1
    assert values[4] == 0 and values[5] == 0


def test_default_cutoff_covers_both_coordinates():
    cutoff = CutoffSpec()
    assert cutoff.t_radius == CUTOFF_RADIUS
    t = np.array([-CUTOFF_RADIUS, 0.0, CUTOFF_RADIUS + 0.1])
    assert np.allclose(cutoff.along_t(t), [0.0, 1.0, 0.0])
    assert cutoff.transverse(np.array([0.0]))[0] == pytest.approx(1.0)
    assert cutoff.transverse(np.array([CUTOFF_RADIUS]))[0] == 0


def test_cutoff_rejects_bad_plateau():
    with pytest.raises(InvalidInputError):
        CutoffSpec(plateau=1.0)


# =============================================================================
# phase and transport
# =============================================================================

def test_phase_integral_of_linear_symbol(beta_spec):
    t = np.linspace(-1, 1, 9)
    phase = phase_integral(beta_spec.b, _recipe(beta_spec), t, 2.0 ** -8)
    assert np.allclose(phase.values, -0.5j * t ** 2)
    assert phase.values[4] == 0


def test_phase_integral_with_time_dependent_q():
    spec = ModelOperatorSpec(
        OperatorCase.TANGENTIAL, j=2, k=0,
        b=SubprincipalSymbol(b0=CoefficientFunction((0, -1j))),
        q=CoefficientFunction((2, 0.5)),
    )
    t = np.linspace(-1, 1, 9)
    phase = phase_integral(spec.b, _recipe(spec), t, 0.1)
    # int_0^t -i s / (2 + s/2) ds in closed form
    exact = -1j * (2 * t - 8 * np.log(1 + t / 4))
    assert np.allclose(phase.values, exact, atol=1e-10)


def test_reciprocal_series_of_linear_q():
    q = CoefficientFunction((1, 0.1))
    window = TWindow(0.0, 7.5)
    t = np.linspace(-7.5, 7.5, 101)
    assert np.allclose(reciprocal_series(q, window)(t) * q(t), 1.0, atol=1e-10)


def test_recipe_rejects_small_xi2(beta_spec):
    with pytest.raises(InvalidInputError):
        _recipe(beta_spec, xi2=1e-4)


def test_recipe_rejects_negative_controlling_power():
    spec = ModelOperatorSpec(OperatorCase.TANGENTIAL, j=1, k=3, b=SubprincipalSymbol(b0=CoefficientFunction((0, -1j))))
    with pytest.raises(InvalidInputError):
        _recipe(spec)


def test_beta_condition_profile(beta_spec):
    h = 2.0 ** -8
    a0 = transport_solution(_recipe(beta_spec), h, Grid(128))
    t = a0.grid.axis
    plateau = np.abs(t) <= PLATEAU_EDGE
    expected = np.exp(-t ** 2 / (2 * h ** 0.25))
    assert np.allclose(np.abs(_column_at_x2_zero(a0))[plateau], expected[plateau], atol=1e-12)
    assert np.max(np.abs(a0.values)) <= 1 + 1e-12
    assert a0.values[64, 64] == pytest.approx(1.0)


def test_dxi_beta_profile_divides_by_h_beta(dxi_beta_spec):
    h = 2.0 ** -8
    a0 = transport_solution(_recipe(dxi_beta_spec), h, Grid(128))
    t = a0.grid.axis
    plateau = np.abs(t) <= PLATEAU_EDGE
    expected = np.exp(-t ** 2 / (2 * h ** 0.125))
    assert np.allclose(np.abs(_column_at_x2_zero(a0))[plateau], expected[plateau], atol=1e-12)


def test_real_symbol_gives_pure_oscillation():
    spec = ModelOperatorSpec(OperatorCase.TANGENTIAL, j=2, k=0, b=SubprincipalSymbol(b0=CoefficientFunction((1,))))
    a0 = transport_solution(_recipe(spec), 2.0 ** -6, Grid(64))
    plateau = np.abs(a0.grid.axis) <= PLATEAU_EDGE
    assert np.allclose(np.abs(_column_at_x2_zero(a0))[plateau], 1.0)


def test_zero_symbol_gives_the_cutoff():
    spec = ModelOperatorSpec(OperatorCase.TANGENTIAL, j=2, k=0)
    cutoff = CutoffSpec(t_radius=2.0)
    a0 = transport_solution(_recipe(spec, cutoff=cutoff), 0.1, Grid(64))
    t = a0.grid.axis
    expected = cutoff.along_t(t)[:, None] * cutoff.transverse(t)[None, :]
    assert np.allclose(a0.values, expected)
    assert np.all(a0.values[np.abs(t) >= 2.0] == 0)


def test_gauge_keeps_maximum_location(beta_spec):
    doubled = ModelOperatorSpec(
        OperatorCase.TANGENTIAL, j=2, k=0, b=SubprincipalSymbol(b0=CoefficientFunction((0, -2j)))
    )
    for spec in (beta_spec, doubled):
        a0 = transport_solution(_recipe(spec), 2.0 ** -6, Grid(64))
        assert np.argmax(np.abs(_column_at_x2_zero(a0))) == 32


def test_window_stops_where_the_phase_turns_upward():
    b = SubprincipalSymbol(b0=CoefficientFunction((1j, 0, -3j)))
    normalized = normalize_origin(b, (-1.0, 1.0), Condition.BETA)
    spec = ModelOperatorSpec(OperatorCase.TANGENTIAL, j=2, k=0, b=normalized)
    grid, h = Grid(256), 2.0 ** -6

    window = t_window(_recipe(spec), grid, h)
    assert window.radius == pytest.approx(np.sqrt(3), abs=0.01)

    a0 = transport_solution(_recipe(spec), h, grid)
    assert np.all(np.isfinite(a0.values))
    assert np.max(np.abs(a0.values)) <= 1 + 1e-9
    assert a0.metadata["t_radius"] == pytest.approx(window.radius)
    assert np.all(a0.values[np.abs(grid.axis) >= window.radius] == 0)


def test_window_refuses_unnormalized_origin():
    spec = ModelOperatorSpec(
        OperatorCase.TANGENTIAL, j=2, k=0, b=SubprincipalSymbol(b0=CoefficientFunction((1j, 0, -3j)))
    )
    with pytest.raises(InvalidInputError, match="normalize the origin"):
        transport_solution(_recipe(spec), 2.0 ** -6, Grid(256))


def test_factorable_refused(factorable_spec):
    with pytest.raises(NoSubprincipalControlError):
        transport_solution(_recipe(factorable_spec), 0.1, Grid(32))


def test_factorable_witness_is_h_independent():
    spec = ModelOperatorSpec(
        OperatorCase.TANGENTIAL, j=2, k=2, b=SubprincipalSymbol(b0=CoefficientFunction((0, -1j)))
    )
    recipe = _recipe(spec, allow_degenerate=True)
    first = transport_solution(recipe, 2.0 ** -4, Grid(32))
    second = transport_solution(recipe, 2.0 ** -9, Grid(32))
    assert np.allclose(first.values, second.values)


@pytest.mark.parametrize("spec_name", ["beta_spec", "dxi_beta_spec", "transversal_spec"])
def test_transport_residual_is_small(spec_name, request):
    spec = request.getfixturevalue(spec_name)
    for h in (2.0 ** -4, 2.0 ** -8):
        assert transport_residual(_recipe(spec), h, Grid(128)) < 1e-8


def test_transport_residual_with_time_dependent_q():
    spec = ModelOperatorSpec(
        OperatorCase.TANGENTIAL, j=2, k=0,
        b=SubprincipalSymbol(b0=CoefficientFunction((0, -1j))),
        q=CoefficientFunction((1, 0.1)),
    )
    assert transport_residual(_recipe(spec), 2.0 ** -8, Grid(256)) < 1e-8


# =============================================================================
# higher amplitudes
# =============================================================================

def test_no_terms_requested(beta_spec):
    assert higher_amplitudes(_recipe(beta_spec), 0.1) == []


def test_zero_symbol_needs_no_corrections():
    spec = ModelOperatorSpec(OperatorCase.TANGENTIAL, j=2, k=0)
    corrections = higher_amplitudes(_recipe(spec, terms=2), 0.1, Grid(32))
    assert len(corrections) == 2
    for phi in corrections:
        for series in phi.values():
            assert np.allclose(series.coef, 0)


def test_corrections_vanish_at_origin(beta_spec):
    corrections = higher_amplitudes(_recipe(beta_spec, terms=2), 2.0 ** -6, Grid(64))
    for phi in corrections:
        for series in phi.values():
            assert series(0.0) == pytest.approx(0.0, abs=1e-13)


@pytest.mark.parametrize("spec_name", ["beta_spec", "dxi_beta_spec"])
def test_each_correction_reduces_the_residual(spec_name, request):
    spec = request.getfixturevalue(spec_name)
    grid, h = Grid(128), 2.0 ** -10
    residuals = [_conjugated_residual(spec, _recipe(spec, terms=terms), grid, h) for terms in range(3)]
    assert residuals[1] < residuals[0]
    assert residuals[2] < residuals[1]


def test_corrections_with_time_dependent_q():
    spec = ModelOperatorSpec(
        OperatorCase.TANGENTIAL, j=2, k=0,
        b=SubprincipalSymbol(b0=CoefficientFunction((0, -1j))),
        q=CoefficientFunction((1, 0.1)),
    )
    grid, h = Grid(128), 2.0 ** -10
    (phi,) = higher_amplitudes(_recipe(spec, terms=1), h, grid)
    assert any(np.max(np.abs(series.coef)) > 0 for series in phi.values())
    residuals = [_conjugated_residual(spec, _recipe(spec, terms=terms), grid, h) for terms in range(2)]
    assert residuals[1] < residuals[0]


def test_higher_tangency_corrections_reduce_the_residual():
    spec = ModelOperatorSpec(OperatorCase.TANGENTIAL, j=3, k=0, b=SubprincipalSymbol(b0=CoefficientFunction((0, -1j))))
    grid, h = Grid(128), 2.0 ** -10
    residuals = [_conjugated_residual(spec, _recipe(spec, terms=terms), grid, h) for terms in range(2)]
    assert residuals[1] < residuals[0]


def test_factorable_corrections_are_attempted(factorable_spec):
    grid, h = Grid(64), 2.0 ** -6
    recipe = _recipe(factorable_spec, allow_degenerate=True, terms=1)
    (phi,) = higher_amplitudes(recipe, h, grid)
    assert any(np.max(np.abs(series.coef)) > 1e-6 for series in phi.values())
    plain = build_amplitude(_recipe(factorable_spec, allow_degenerate=True), grid, h)
    corrected = build_amplitude(recipe, grid, h)
    assert not np.allclose(plain.values, corrected.values)


# =============================================================================
# quasimodes
# =============================================================================

def test_quasimode_is_a_snapped_plane_wave_times_amplitude(beta_spec):
    grid, h = Grid(128), 2.0 ** -6
    v = build_quasimode(_recipe(beta_spec), grid, h)
    kappa = v.metadata["kappa_snapped"]
    assert kappa / grid.fundamental == pytest.approx(round(kappa / grid.fundamental))
    assert v.metadata["kappa_raw"] == pytest.approx(h ** -0.5)
    a0 = transport_solution(_recipe(beta_spec), h, grid)
    assert np.allclose(np.abs(v.values), np.abs(a0.values))


def test_quasimode_vanishes_on_box_boundary(beta_spec):
    v = build_quasimode(_recipe(beta_spec), Grid(128), 2.0 ** -6)
    assert np.max(np.abs(v.values[:, 0])) < 1e-14
    assert np.max(np.abs(v.values[0, :])) < 1e-12


def test_resolution_error_reports_required_points(beta_spec):
    with pytest.raises(ResolutionError) as excinfo:
        build_quasimode(_recipe(beta_spec), Grid(32), 2.0 ** -12)
    assert excinfo.value.required_points == 512


def test_low_frequency_snaps_to_first_mode(beta_spec, caplog):
    grid = Grid(32)
    with caplog.at_level(logging.WARNING):
        v = build_quasimode(_recipe(beta_spec, xi2=0.1), grid, 0.5)
    assert v.metadata["kappa_snapped"] == pytest.approx(grid.fundamental)
    assert "snapped" in caplog.text


def test_norm_bounds(beta_spec):
    h = 2.0 ** -6
    v = build_quasimode(_recipe(beta_spec), Grid(128), h)
    report = norm_bounds_check(v, PARAMS, h)
    assert report.upper_ok and report.lower_ok
    smaller = build_quasimode(_recipe(beta_spec, cutoff=CutoffSpec(width=0.5)), Grid(128), h)
    smaller_report = norm_bounds_check(smaller, PARAMS, h)
    assert smaller_report.measured_norm < report.measured_norm
    assert smaller_report.upper_ok and smaller_report.lower_ok


@pytest.mark.slow
def test_norm_slope_within_bound(beta_spec):
    hs = np.array([2.0 ** -e for e in range(4, 13)])
    reports = [norm_bounds_check(build_quasimode(_recipe(beta_spec), Grid(512), h), PARAMS, h) for h in hs]
    assert all(report.upper_ok and report.measured_norm <= 10 for report in reports)
    slope = np.polyfit(np.log(hs), np.log([report.measured_norm for report in reports]), 1)[0]
    assert slope <= (0.5 + 0.125) / 2 + 0.1


def test_dump_field(tmp_path, beta_spec):
    v = build_quasimode(_recipe(beta_spec), Grid(32), 0.25)
    csv_path, meta_path = dump_field(v, tmp_path / "v.csv")
    frame = pd.read_csv(csv_path)
    assert list(frame.columns) == ["t", "x2", "re", "im"]
    assert len(frame) == 32 * 32
    metadata = json.loads(meta_path.read_text())
    assert metadata["kappa_snapped"] == pytest.approx(v.metadata["kappa_snapped"])
    assert metadata["points_per_axis"] == 32
