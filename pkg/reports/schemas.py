"""Experiment configuration schema (JSON in) and per-check result records (JSON out)."""

from __future__ import annotations

from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ModelConfig(_Strict):
    kind: Literal["jin-xin"] = Field(default="jin-xin", description="Built-in model family")
    a: float = Field(..., gt=0, description="Jin-Xin characteristic speed")
    h_poly: list[float] = Field(..., min_length=1, description="Coefficients of h(u) = sum c_k u^k")
    name: str | None = None


class ShockConfig(_Strict):
    u_minus: list[float] = Field(..., min_length=1)
    u_plus: list[float] = Field(..., min_length=1)
    s: float | None = Field(default=None, description="Shock speed; Rankine-Hugoniot when omitted")

    @field_validator("u_minus", "u_plus", mode="before")
    @classmethod
    def scalar_to_list(cls, v):
        return [v] if isinstance(v, (int, float)) else v

    @model_validator(mode="after")
    def same_dimension(self) -> ShockConfig:
        if len(self.u_minus) != len(self.u_plus):
            raise ValueError("u_minus and u_plus must have the same length")
        return self


class GridConfig(_Strict):
    dx: float | None = Field(default=None, gt=0, description="Profile grid spacing")
    X: float | None = Field(default=None, gt=0, description="Profile half-width")
    fine_dx: float = Field(default=0.05, gt=0, description="Profile spacing used with the simulator")
    sim_dx: float | None = Field(default=None, gt=0)


class ContourConfig(_Strict):
    eta1: float | None = Field(default=None, gt=0)
    r0: float | None = Field(default=None, gt=0)
    radius: float | None = Field(default=None, gt=0)
    symmetry_points: list[list[float]] = Field(
        default_factory=lambda: [[0.5, 0.5], [1.0, 2.0], [0.2, 5.0]],
        description="(Re, Im) sample points for the conjugate-symmetry check",
    )


class GreensConfig(_Strict):
    y0: float = -10.0
    field_times: list[float] = Field(default_factory=lambda: [1.0, 5.0, 20.0])
    stationary_times: list[float] = Field(
        default_factory=lambda: [1.0, 5.0, 20.0, 60.0],
        description="Times at which G applied to the shift mode is compared with the shift mode",
    )
    stationary_bounds: list[float] = Field(
        default_factory=lambda: [0.5, 0.5, 0.15, 0.05],
        description="Relative L1 bound per stationary time",
    )
    compare_times: list[float] = Field(default_factory=lambda: [10.0, 30.0, 40.0])
    contour_t: float = Field(default=1.0, gt=0)
    contour_height: float | None = Field(default=None, gt=0)

    @model_validator(mode="after")
    def bound_per_time(self) -> GreensConfig:
        if len(self.stationary_times) != len(self.stationary_bounds):
            raise ValueError("stationary_times and stationary_bounds must have the same length")
        return self



class SimulationConfig(_Strict):
    T_linear: float = Field(default=100.0, gt=0)
    decay_center: float = Field(default=-150.0, description="Centre of the far-field decay data")
    decay_width: float = Field(default=3.0, gt=0)
    fit_start: float = Field(default=10.0, gt=0)
    T_nonlinear: float = Field(default=100.0, gt=0)
    nonlinear_fit_start: float = Field(default=10.0, gt=0)
    amplitude: float = Field(default=0.01, gt=0)
    shape: Literal["gaussian"] = "gaussian"


class ExperimentFlags(_Strict):
    hypotheses: bool = True
    profile: bool = True
    scattering: bool = True
    evans: bool = True
    greens: bool = True
    simulate: bool = True


class ExperimentConfig(_Strict):
    """One run of the toolkit; unknown keys are rejected."""

    model: ModelConfig
    shock: ShockConfig
    grid: GridConfig = Field(default_factory=GridConfig)
    contour: ContourConfig = Field(default_factory=ContourConfig)
    greens: GreensConfig = Field(default_factory=GreensConfig)
    simulation: SimulationConfig = Field(default_factory=SimulationConfig)
    experiments: ExperimentFlags = Field(default_factory=ExperimentFlags)
    output_dir: Path | None = None
    seed: int = 0

    @field_validator("output_dir")
    @classmethod
    def resolve_output(cls, v: Path | None) -> Path | None:
        return v.expanduser().resolve() if v is not None else None


class CheckResult(BaseModel):
    """One PASS/FAIL line of a run."""

    name: str
    passed: bool
    detail: str = ""
    value: float | None = None
    tolerance: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: {self.detail}"
