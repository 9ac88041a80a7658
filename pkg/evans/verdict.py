"""Transversality determinant and the combined spectral stability verdict."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from core.errors import ClassificationError, ContourError, EvansError, SpectralSplittingError
from core.state import ShockData, ShockProfile
from evans.contour import ContourReport, default_contours, evans_on_contour
from evans.function import EvansSetup
from models.base import RelaxationModel
from models.equilibrium import equilibrium_data
from profiles.classify import ELL

logger = logging.getLogger(__name__)

_DELTA_TOL = 1e-10


def outgoing_modes(model: RelaxationModel, shock: ShockData) -> np.ndarray:
    """r*_j with a*_j - s < 0 at u_- followed by those with a*_j - s > 0 at u_+."""
    cols = []
    for side, sign in (("-", -1.0), ("+", 1.0)):
        eq = equilibrium_data(model, shock.endstate(side)[0])
        rel = eq.speeds - shock.s
        cols.extend(eq.right[:, j] for j in range(model.n) if sign * rel[j] > 0)
    return np.array(cols).T.reshape(model.n, len(cols))


def liu_majda_determinant(outgoing: np.ndarray, masses: np.ndarray) -> float:
    """det[outgoing | masses]; the columns must form a square matrix."""
    outgoing = np.atleast_2d(outgoing)
    masses = np.asarray(masses, dtype=float).reshape(outgoing.shape[0], -1)
    matrix = np.hstack([outgoing, masses])
    if matrix.shape[0] != matrix.shape[1]:
        raise ClassificationError(
            f"{outgoing.shape[1]} outgoing modes and {masses.shape[1]} mass vectors do not fill n={matrix.shape[0]}"
        )
    return float(np.linalg.det(matrix))


def liu_majda_delta(model: RelaxationModel, shock: ShockData, profile: ShockProfile | None = None) -> float:
    """Delta = det(r*_outgoing, u_- - u_+)."""
    mass = shock.u_minus - shock.u_plus
    if np.linalg.norm(mass) <= 1e-12 * (1.0 + np.linalg.norm(shock.u_minus)):
        logger.warning("zero-strength shock: Delta is degenerate (0)")
        return 0.0
    if profile is not None:
        quad = -trapezoid(profile.du, profile.x, axis=0)
        err = float(np.max(np.abs(quad - mass)))
        if err > 1e-6 * (1.0 + float(np.max(np.abs(mass)))):
            logger.warning("profile mass %s differs from u_- - u_+ by %.3g", quad.tolist(), err)
    delta = liu_majda_determinant(outgoing_modes(model, shock), mass)
    if abs(delta) <= _DELTA_TOL:
        logger.warning("Delta = %.3g: outgoing modes and mass are dependent", delta)
    return delta


@dataclass
class StabilityVerdict:
    """(D1), (D2) and their conjunction; None marks UNKNOWN."""

    D1: bool | None
    D2: bool | None
    script_D: bool | None
    winding_big: int | None
    winding_origin: int | None
    delta: float
    ell: int = ELL
    reason: str | None = None
    contours: dict[str, ContourReport] = field(default_factory=dict, repr=False)

    def label(self, name: str) -> str:
        value = getattr(self, name)
        return "UNKNOWN" if value is None else ("PASS" if value else "FAIL")

    def to_dict(self) -> dict:
        return {
            "D1": self.D1,
            "D2": self.D2,
            "script_D": self.script_D,
            "winding_big": self.winding_big,
            "winding_origin": self.winding_origin,
            "delta": self.delta,
            "ell": self.ell,
            "reason": self.reason,
            "contours": {name: report.to_dict() for name, report in self.contours.items()},
        }


def stability_verdict(
    profile: ShockProfile,
    *,
    eta1: float | None = None,
    r0: float | None = None,
    radius: float | None = None,
) -> StabilityVerdict:
    """Windings on the outer contour and the small circle, plus Delta."""
    model, shock = profile.model, profile.shock
    delta = liu_majda_delta(model, shock, profile)
    transversal = abs(delta) > _DELTA_TOL
    try:
        outer, inner = default_contours(profile, eta1=eta1, r0=r0, radius=radius)
        setup = EvansSetup(profile)
        outer_report = evans_on_contour(profile, outer, setup=setup)
        inner_report = evans_on_contour(profile, inner, setup=setup)
    except (ContourError, SpectralSplittingError, EvansError) as exc:
        logger.warning("stability verdict unknown: %s", exc)
        # a vanishing Delta fails (D2) whatever the windings are
        d2 = None if transversal else False
        return StabilityVerdict(None, d2, d2, None, None, delta, reason=str(exc))
    w_origin = inner_report.winding
    w_big = outer_report.winding - w_origin
    d1 = w_big == 0 and w_origin == ELL
    d2 = transversal and w_origin == ELL
    verdict = StabilityVerdict(
        d1, d2, d1 and d2, w_big, w_origin, delta,
        contours={"outer": outer_report, "inner": inner_report},
    )
    logger.info(
        "verdict: D1=%s D2=%s (winding big=%d origin=%d, Delta=%.6g)",
        verdict.label("D1"), verdict.label("D2"), w_big, w_origin, delta,
    )
    return verdict
