"""Shared domain types (single source of truth) and the pipeline state schema."""

from __future__ import annotations

import dataclasses
import operator
from dataclasses import dataclass, field
from functools import cached_property
from typing import TYPE_CHECKING, Annotated, Literal, TypedDict

import numpy as np

from core.errors import ClassificationError
from core.linalg import interp_rows

if TYPE_CHECKING:
    from core.coefficients import ProfileCoefficients
    from models.base import RelaxationModel


@dataclass(eq=False)
class ShockData:
    """Endstates and speed of a relaxation shock."""

    u_minus: np.ndarray
    u_plus: np.ndarray
    v_minus: np.ndarray
    v_plus: np.ndarray
    s: float

    @classmethod
    def from_model(
        cls,
        model: RelaxationModel,
        u_minus,
        u_plus,
        s: float | None = None,
    ) -> ShockData:
        """Equilibrium endstates; s from Rankine–Hugoniot when not given."""
        um = np.atleast_1d(np.asarray(u_minus, dtype=float))
        up = np.atleast_1d(np.asarray(u_plus, dtype=float))
        vm = model.equilibrium(um)
        vp = model.equilibrium(up)
        if s is None:
            jump = up - um
            if np.allclose(jump, 0.0):
                s = 0.0
            else:
                df = model.f(up, vp) - model.f(um, vm)
                s = float(np.dot(df, jump) / np.dot(jump, jump))
        return cls(u_minus=um, u_plus=up, v_minus=vm, v_plus=vp, s=float(s))

    @property
    def jump(self) -> np.ndarray:
        """m_1 = u_- - u_+ for the translation family u(x - delta)."""
        return self.u_minus - self.u_plus

    @property
    def is_constant(self) -> bool:
        return bool(np.allclose(self.u_minus, self.u_plus, atol=1e-14))

    def endstate(self, side: Literal["-", "+"]) -> tuple[np.ndarray, np.ndarray]:
        return (self.u_minus, self.v_minus) if side == "-" else (self.u_plus, self.v_plus)

    def to_dict(self) -> dict:
        return {
            "u_minus": self.u_minus.tolist(),
            "u_plus": self.u_plus.tolist(),
            "v_minus": self.v_minus.tolist(),
            "v_plus": self.v_plus.tolist(),
            "s": self.s,
        }


@dataclass
class EquilibriumData:
    """Relaxed flux f*(u) and its eigen-structure."""

    u: np.ndarray
    v: np.ndarray
    f_star: np.ndarray
    df_star: np.ndarray
    speeds: np.ndarray  # ascending a*_j
    right: np.ndarray  # columns r*_j
    left: np.ndarray  # columns l*_j, left.T @ right = I
    groups: list[np.ndarray] = field(default_factory=list)


@dataclass
class CharacteristicFamily:
    """One eigenvalue family of A(u, v) - s."""

    speed: float
    multiplicity: int
    right: np.ndarray  # N x m
    left: np.ndarray  # N x m, left.T @ right = I
    eta: np.ndarray  # m x m dissipation block -l^T Q r

    @property
    def eta_min(self) -> float:
        return float(np.min(np.linalg.eigvals(self.eta).real))


@dataclass
class ModeData:
    """Characteristic and equilibrium data at a state point."""

    u: np.ndarray
    v: np.ndarray
    s: float
    families: list[CharacteristicFamily]
    equilibrium: EquilibriumData | None = None
    B_star: np.ndarray | None = None
    beta: list[np.ndarray] = field(default_factory=list)  # blocks per equilibrium family
    R_star: np.ndarray | None = None  # N x n, columns (r*; -q_v^{-1} q_u r*)
    L_star: np.ndarray | None = None  # N x n, columns (l*; 0)

    @property
    def speeds(self) -> np.ndarray:
        return np.array([fam.speed for fam in self.families])

    @property
    def etas(self) -> list[np.ndarray]:
        return [fam.eta for fam in self.families]


@dataclass
class Classification:
    """Shock indices and type."""

    n: int
    r: int
    i_minus: int
    i_plus: int
    d_minus: int
    d_plus: int
    ell: int = 1
    kind: Literal["Lax", "overcompressive", "undercompressive", "mixed"] = "Lax"
    pure: bool = True
    extreme: bool = False

    @property
    def i(self) -> int:
        return self.i_minus + self.i_plus

    @property
    def d(self) -> int:
        return self.d_minus + self.d_plus

    @property
    def identity_holds(self) -> bool:
        return self.d - self.r == self.i - self.n


@dataclass
class HypothesisReport:
    """Outcome of the structural hypothesis checks; failures are recorded, never raised."""

    checks: dict[str, bool] = field(default_factory=dict)
    details: dict[str, str] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    theta: float = float("nan")

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(self.checks.values())


@dataclass
class ProfileReport:
    rh_residual: float
    first_integral_drift: float
    endstate_error_minus: float
    endstate_error_plus: float
    nu_minus: float
    nu_plus: float
    r2_minus: float
    r2_plus: float
    predicted_nu_minus: float
    predicted_nu_plus: float
    flags: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.flags


@dataclass(eq=False)
class ShockProfile:
    """Sampled traveling wave (u, v)(x) on a uniform grid.

    spectral_shift replaces Q by Q + shift*I in all linearized computations.
    """

    model: RelaxationModel
    shock: ShockData
    x: np.ndarray
    u: np.ndarray  # (len, n)
    v: np.ndarray  # (len, r)
    du: np.ndarray
    dv: np.ndarray
    nu_minus: float = float("nan")
    nu_plus: float = float("nan")
    r2_minus: float = float("nan")
    r2_plus: float = float("nan")
    classification: Classification | None = None
    spectral_shift: float = 0.0

    @classmethod
    def constant_state(
        cls, model: RelaxationModel, u, *, X: float = 20.0, dx: float = 0.1, s: float = 0.0
    ) -> ShockProfile:
        """Flat state on [-X, X]; a constant-coefficient medium."""
        shock = ShockData.from_model(model, u, u, s=s)
        x = _uniform_grid(X, dx)
        ones = np.ones((x.size, 1))
        return cls(
            model=model,
            shock=shock,
            x=x,
            u=ones * shock.u_minus[None, :],
            v=ones * shock.v_minus[None, :],
            du=np.zeros((x.size, model.n)),
            dv=np.zeros((x.size, model.r)),
        )

    @property
    def X(self) -> float:
        return float(self.x[-1])

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def state(self) -> np.ndarray:
        return np.hstack([self.u, self.v])

    @property
    def dstate(self) -> np.ndarray:
        return np.hstack([self.du, self.dv])

    @property
    def mass(self) -> np.ndarray:
        return self.shock.jump

    def endstate(self, side: Literal["-", "+"]) -> np.ndarray:
        return np.concatenate(self.shock.endstate(side))

    def interpolate(self, xq) -> np.ndarray:
        """(u, v) at xq; endstates outside the grid."""
        xq = np.asarray(xq, dtype=float)
        out = interp_rows(xq, self.x, self.state)
        out = np.where((xq < self.x[0])[..., None], self.endstate("-"), out)
        return np.where((xq > self.x[-1])[..., None], self.endstate("+"), out)

    def shift_mode(self, xq=None) -> np.ndarray:
        """d/d(delta) of (u, v)(x - delta), i.e. -(u', v')."""
        if xq is None:
            return -self.dstate
        xq = np.asarray(xq, dtype=float)
        out = interp_rows(xq, self.x, -self.dstate)
        return np.where(((xq < self.x[0]) | (xq > self.x[-1]))[..., None], 0.0, out)

    def with_spectral_shift(self, shift: float) -> ShockProfile:
        return dataclasses.replace(self, spectral_shift=float(shift))

    @cached_property
    def coefficients(self) -> ProfileCoefficients:
        from core.coefficients import ProfileCoefficients

        return ProfileCoefficients(self)

    def require_shock(self) -> None:
        if self.shock.is_constant:
            raise ClassificationError("constant state u+ = u- is not a shock")


def _uniform_grid(X: float, dx: float) -> np.ndarray:
    n_half = int(round(X / dx))
    return np.linspace(-n_half * dx, n_half * dx, 2 * n_half + 1)


def uniform_grid(X: float, dx: float) -> np.ndarray:
    """Symmetric grid with spacing dx and x = 0 as a node."""
    return _uniform_grid(X, dx)


def _merge_failures(left: dict[str, str], right: dict[str, str]) -> dict[str, str]:
    return {**left, **right}


class PipelineState(TypedDict, total=False):
    """State routed between pipeline stages; each stage adds its own keys."""

    config: dict
    completed: Annotated[list[str], operator.add]
    failed: Annotated[dict[str, str], _merge_failures]

    model: object  # RelaxationModel
    shock: ShockData
    hypotheses: HypothesisReport
    profile: ShockProfile
    fine_profile: ShockProfile
    profile_report: ProfileReport
    classification: Classification
    scattering: object
    fine_scattering: object
    verdict: object
    greens: dict
    simulation: dict
