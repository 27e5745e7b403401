# src/api/schemas.py
"""Pydantic schemas for experiment configuration files."""
import json
from fractions import Fraction
from pathlib import Path
from dataclasses import replace
from typing import List, Optional, Tuple, Union

from pydantic import AliasChoices, BaseModel, ConfigDict, Field, field_validator, model_validator

from config.constants import (
    CONJUGATED_GRID,
    CUTOFF_PLATEAU,
    CUTOFF_RADIUS,
    DEFAULT_BETA,
    DEFAULT_H_EXPONENTS,
    DEFAULT_TERM_COUNTS,
    DEFAULT_XI2,
    FIT_RESIDUAL_LIMIT,
    FULL_GRID,
    GAIN_FRACTION_OF_BETA,
    ORACLE_FACTORABLE_SLOPE_CAP,
    ORACLE_GRID,
    ORACLE_SLOPE_SLACK,
    SATURATION_THRESHOLD,
    TRANSVERSE_WIDTH,
)
from config.settings import DEFAULT_JOBS, OUTPUT_DIR
from src.entities.models import CoefficientFunction, Condition, ModelOperatorSpec, OperatorCase, SubprincipalSymbol
from src.models.exponent_calculus import solve_scaling
from src.models.model_symbols import Interval, classify_condition, normalize_origin, origin_shift
from src.models.quasimode_builder import CutoffSpec, QuasimodeRecipe
from src.services.verification_harness import MeasurementPath, SweepConfig, Thresholds, VerdictKind

# complex numbers are written as [re, im]
ComplexPair = Tuple[float, float]


def _to_complex(pair: ComplexPair) -> complex:
    return complex(pair[0], pair[1])


def _coefficient(pairs: List[ComplexPair]) -> CoefficientFunction:
    return CoefficientFunction(tuple(_to_complex(p) for p in pairs))


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class CutoffConfig(StrictModel):
    radius: float = Field(CUTOFF_RADIUS, gt=0)
    center: Tuple[float, float] = (0.0, 0.0)
    t_radius: float = Field(CUTOFF_RADIUS, gt=0)
    plateau: float = Field(CUTOFF_PLATEAU, gt=0, lt=1)
    width: float = Field(TRANSVERSE_WIDTH, gt=0)


class ThresholdConfig(StrictModel):
    gain_fraction: float = GAIN_FRACTION_OF_BETA
    saturation: float = SATURATION_THRESHOLD
    oracle_slack: float = ORACLE_SLOPE_SLACK
    factorable_cap: float = ORACLE_FACTORABLE_SLOPE_CAP
    fit_residual_limit: float = FIT_RESIDUAL_LIMIT


class SweepSettings(StrictModel):
    """h = 2^-e for each exponent e."""
    h_exponents: List[int] = Field(default_factory=lambda: list(DEFAULT_H_EXPONENTS), min_length=2)
    term_counts: List[int] = Field(default_factory=lambda: list(DEFAULT_TERM_COUNTS), min_length=1)
    path: MeasurementPath = MeasurementPath.CONJUGATED
    conjugated_points: int = CONJUGATED_GRID
    full_points: int = FULL_GRID
    jobs: int = Field(DEFAULT_JOBS, ge=1)
    thresholds: ThresholdConfig = Field(default_factory=ThresholdConfig)

    @field_validator("h_exponents")
    @classmethod
    def exponents_positive(cls, value: List[int]) -> List[int]:
        if any(e <= 0 for e in value):
            raise ValueError("h exponents must be positive so that h lies in (0, 1)")
        return value

    @property
    def h_values(self) -> Tuple[float, ...]:
        return tuple(2.0 ** -e for e in self.h_exponents)


class OracleSettings(StrictModel):
    points: int = ORACLE_GRID
    h_exponents: List[int] = Field(default_factory=lambda: [2, 3, 4])


class ExperimentConfig(StrictModel):
    """One experiment: operator, quasimode recipe, sweep and expected verdict."""
    name: str
    case: OperatorCase
    j: int
    k: int
    b0_coeffs: List[ComplexPair] = Field(default_factory=lambda: [(0.0, 0.0)], validation_alias=AliasChoices("b0_coeffs", "b0"))
    b1_coeffs: List[ComplexPair] = Field(default_factory=lambda: [(0.0, 0.0)], validation_alias=AliasChoices("b1_coeffs", "b1"))
    q_coeffs: List[ComplexPair] = Field(default_factory=lambda: [(1.0, 0.0)], validation_alias=AliasChoices("q_coeffs", "q"))
    a1: List[ComplexPair] = Field(default_factory=lambda: [(0.0, 0.0)])
    shift: ComplexPair = (0.0, 0.0)
    beta: str = str(DEFAULT_BETA)
    xi2: float = DEFAULT_XI2
    allow_degenerate: bool = False
    # where the sign change of Im b is searched, defaults to the t cutoff box
    interval: Optional[Tuple[float, float]] = None
    cutoff: CutoffConfig = Field(default_factory=CutoffConfig)
    sweep: SweepSettings = Field(default_factory=SweepSettings)
    oracle: Optional[OracleSettings] = None
    output_dir: str = OUTPUT_DIR
    seed: int = 0
    expect: Optional[VerdictKind] = None

    @field_validator("beta")
    @classmethod
    def beta_is_rational(cls, value: str) -> str:
        try:
            return str(Fraction(value))
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"beta must be a rational like '1/8', got {value!r}") from exc

    @field_validator("interval")
    @classmethod
    def interval_ordered(cls, value: Optional[Tuple[float, float]]) -> Optional[Tuple[float, float]]:
        if value is not None and not value[0] < value[1]:
            raise ValueError(f"interval must satisfy lo < hi, got {value}")
        return value

    @model_validator(mode="after")
    def domain_checks(self) -> "ExperimentConfig":
        # domain errors surface as ValidationError entries
        self.to_recipe()
        return self

    def to_spec(self) -> ModelOperatorSpec:
        return ModelOperatorSpec(
            case=self.case,
            j=self.j,
            k=self.k,
            b=SubprincipalSymbol(b0=_coefficient(self.b0_coeffs), b1=_coefficient(self.b1_coeffs)),
            q=_coefficient(self.q_coeffs),
            a1=_coefficient(self.a1),
            shift=_to_complex(self.shift),
        )

    @property
    def analysis_interval(self) -> Interval:
        if self.interval is not None:
            return tuple(self.interval)
        center = self.cutoff.center[0]
        return (center - self.cutoff.t_radius, center + self.cutoff.t_radius)

    def classify(self) -> Tuple[Condition, float]:
        """
        Condition of the configured operator and the origin shift t* applied to b.

        Raises:
            ValueError: no quasimode construction exists and allow_degenerate is off
        """
        spec = self.to_spec()
        condition = classify_condition(spec, self.analysis_interval)
        if condition in (Condition.BETA, Condition.DXI_BETA):
            return condition, origin_shift(spec.b, self.analysis_interval, condition)
        if not self.allow_degenerate:
            raise ValueError(
                f"{condition.value}: the operator admits no subprincipal quasimode, "
                "set allow_degenerate to measure the witness anyway"
            )
        return condition, 0.0

    def condition_report(self) -> dict:
        condition, shift = self.classify()
        return {"condition": condition.value, "origin_shift": shift, "interval": list(self.analysis_interval)}

    def to_recipe(self, terms: int = 0) -> QuasimodeRecipe:
        """Recipe for the operator with its origin moved to the maximum of the running integral of Im b."""
        spec = self.to_spec()
        condition, _ = self.classify()
        if condition in (Condition.BETA, Condition.DXI_BETA):
            spec = replace(spec, b=normalize_origin(spec.b, self.analysis_interval, condition))
        cutoff = CutoffSpec(
            self.cutoff.radius,
            tuple(self.cutoff.center),
            self.cutoff.t_radius,
            self.cutoff.plateau,
            self.cutoff.width,
        )
        return QuasimodeRecipe(
            spec=spec,
            params=solve_scaling(self.j, Fraction(self.beta)),
            xi2=self.xi2,
            cutoff=cutoff,
            terms=terms,
            allow_degenerate=self.allow_degenerate,
        )

    def to_sweep_config(self, grid: Optional[int] = None, jobs: Optional[int] = None) -> SweepConfig:
        """Grid and job overrides come from the command line."""
        sweep = self.sweep
        return SweepConfig(
            recipe=self.to_recipe(),
            h_values=sweep.h_values,
            term_counts=tuple(sweep.term_counts),
            path=sweep.path,
            conjugated_points=grid or sweep.conjugated_points,
            full_points=grid or sweep.full_points,
            jobs=jobs or sweep.jobs,
            thresholds=Thresholds(**sweep.thresholds.model_dump()),
        )

    def resolved(self) -> dict:
        """Every field with defaults materialized, JSON-ready."""
        return self.model_dump(mode="json")


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    """Parse and validate a JSON experiment file (raises pydantic.ValidationError)."""
    return ExperimentConfig.model_validate_json(Path(path).read_text())


def format_validation_error(exc) -> str:
    """One line per problem, prefixed with its key path."""
    lines = []
    for error in exc.errors():
        location = ".".join(str(part) for part in error["loc"]) or "<root>"
        lines.append(f"{location}: {error['msg']}")
    return "\n".join(lines)


def dump_config(config: ExperimentConfig, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.write_text(json.dumps(config.resolved(), indent=2, sort_keys=True) + "\n")
    return path
