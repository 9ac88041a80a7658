"""Closed contours, adaptive sampling of D along them, and winding numbers."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from config import settings
from core.errors import ContourError
from core.state import ShockProfile
from evans.function import Charts, EvansSetup, EvansValue, contour_charts, evans_batch
from models.equilibrium import hyperbolic_modes
from worker.pool import ordered_map

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Arc:
    radius: float
    theta0: float
    theta1: float
    center: complex = 0.0

    def __call__(self, t: np.ndarray) -> np.ndarray:
        return self.center + self.radius * np.exp(1j * (self.theta0 + t * (self.theta1 - self.theta0)))


@dataclass(frozen=True)
class Segment:
    start: complex
    end: complex

    def __call__(self, t: np.ndarray) -> np.ndarray:
        return self.start + t * (self.end - self.start)


@dataclass(frozen=True)
class Contour:
    """Closed, counterclockwise path; parameter s runs over [0, len(pieces)]."""

    name: str
    pieces: tuple

    def __call__(self, s) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=float))
        idx = np.clip(np.floor(s).astype(int), 0, len(self.pieces) - 1)
        t = s - idx
        out = np.empty(s.shape, dtype=complex)
        for i, piece in enumerate(self.pieces):
            sel = idx == i
            if np.any(sel):
                out[sel] = piece(t[sel])
        return out

    def initial_params(self, per_piece: int) -> np.ndarray:
        params = [i + np.linspace(0.0, 1.0, per_piece, endpoint=False) for i in range(len(self.pieces))]
        return np.concatenate(params + [np.array([float(len(self.pieces))])])


def circle(radius: float, center: complex = 0.0, name: str = "circle") -> Contour:
    return Contour(name, (Arc(radius, -math.pi, math.pi, center),))


def outer_contour(radius: float, eta1: float) -> Contour:
    """Boundary of {Re lambda >= -eta1, |lambda| <= radius}."""
    if radius <= eta1:
        raise ContourError(f"radius {radius} must exceed eta1 {eta1}")
    height = math.sqrt(radius**2 - eta1**2)
    phi0 = math.atan2(height, -eta1)
    return Contour(
        "outer",
        (Arc(radius, -phi0, phi0), Segment(complex(-eta1, height), complex(-eta1, -height))),
    )


def default_radius(profile: ShockProfile) -> float:
    """10 (1 + max eta + max |a|) over both endstates."""
    if settings.contour_radius:
        return float(settings.contour_radius)
    eta, speed = 0.0, 0.0
    for side in ("-", "+"):
        modes = hyperbolic_modes(profile.model, *profile.shock.endstate(side), s=profile.shock.s)
        for fam in modes.families:
            eta = max(eta, float(np.max(np.linalg.eigvals(np.atleast_2d(fam.eta)).real)) + profile.spectral_shift)
            speed = max(speed, abs(fam.speed))
    return 10.0 * (1.0 + eta + speed)


def default_contours(
    profile: ShockProfile,
    *,
    eta1: float | None = None,
    r0: float | None = None,
    radius: float | None = None,
) -> tuple[Contour, Contour]:
    eta1 = settings.contour_eta1 if eta1 is None else eta1
    r0 = settings.contour_r0 if r0 is None else r0
    radius = default_radius(profile) if radius is None else radius
    return outer_contour(radius, eta1), circle(r0, name="inner")


@dataclass
class ContourReport:
    contour: str
    params: np.ndarray
    lam: np.ndarray
    log: np.ndarray  # log D with the argument unwound along the samples
    winding: int
    winding_raw: float
    refinements: int
    symmetry_defect: float
    charts: Charts | None = None
    values: list[EvansValue] = field(default_factory=list, repr=False)

    @property
    def samples(self) -> int:
        return int(self.lam.size)

    def to_dict(self) -> dict:
        return {
            "contour": self.contour,
            "samples": self.samples,
            "refinements": self.refinements,
            "winding": self.winding,
            "winding_raw": self.winding_raw,
            "symmetry_defect": self.symmetry_defect,
            "min_log_abs": float(np.min(self.log.real)),
        }


def _increments(logs: np.ndarray) -> np.ndarray:
    dlog = np.diff(logs)
    return dlog.real + 1j * np.angle(np.exp(1j * dlog.imag))


def _violations(logs: np.ndarray) -> np.ndarray:
    inc = _increments(logs)
    with np.errstate(over="ignore", invalid="ignore"):
        rel = np.abs(np.expm1(inc))
    return ~(rel <= settings.contour_max_rel_step) | (np.abs(inc.imag) >= settings.contour_max_arg_step)


def _symmetry_defect(lam: np.ndarray, logs: np.ndarray) -> float:
    """max |D(conj lambda) / conj D(lambda) - 1| over mirrored sample pairs."""
    key = {(round(z.real, 9), round(z.imag, 9)): i for i, z in enumerate(lam)}
    worst = float("nan")
    for i, z in enumerate(lam):
        j = key.get((round(z.real, 9), round(-z.imag, 9)))
        if j is None or abs(z.imag) < 1e-12:
            continue
        d = logs[j] - np.conj(logs[i])
        defect = abs(np.expm1(d.real + 1j * np.angle(np.exp(1j * d.imag))))
        worst = defect if math.isnan(worst) else max(worst, defect)
    return worst


def evans_on_contour(
    profile: ShockProfile,
    contour: Contour,
    *,
    charts: Charts | None = None,
    setup: EvansSetup | None = None,
    max_samples: int | None = None,
    threads: int | None = None,
) -> ContourReport:
    """Sample D on a closed contour, refining until consecutive ratios are small."""
    setup = setup or EvansSetup(profile)
    max_samples = max_samples or settings.contour_max_samples
    params = contour.initial_params(settings.contour_initial_samples)
    lam = contour(params)
    charts = charts or contour_charts(profile, lam[:-1], setup)

    def evaluate(chunk: np.ndarray) -> list[EvansValue]:
        return evans_batch(profile, chunk, charts=charts, setup=setup)

    values = ordered_map(evaluate, lam, threads)
    refinements = 0
    while True:
        logs = np.array([v.log for v in values])
        if not np.all(np.isfinite(logs)):
            bad = lam[int(np.argmin(np.isfinite(logs)))]
            raise ContourError(f"D vanishes or overflows on {contour.name} near lambda={bad}")
        bad = _violations(logs)
        if not np.any(bad):
            break
        if params.size + int(bad.sum()) > max_samples:
            raise ContourError(
                f"{contour.name}: sample budget {max_samples} exceeded with {int(bad.sum())} coarse steps left"
            )
        mids = 0.5 * (params[:-1][bad] + params[1:][bad])
        new_values = ordered_map(evaluate, contour(mids), threads)
        params = np.concatenate([params, mids])
        lam = np.concatenate([lam, contour(mids)])
        values = values + new_values
        order = np.argsort(params, kind="stable")
        params, lam = params[order], lam[order]
        values = [values[i] for i in order]
        refinements += 1

    inc = _increments(logs)
    raw = float(np.sum(inc.imag) / (2 * math.pi))
    winding = int(round(raw))
    if abs(raw - winding) > 1e-6:
        raise ContourError(f"{contour.name}: argument change {raw:.8f} turns is not an integer")
    unwound = logs[0] + np.concatenate([[0.0], np.cumsum(inc)])
    report = ContourReport(
        contour=contour.name,
        params=params,
        lam=lam,
        log=unwound,
        winding=winding,
        winding_raw=raw,
        refinements=refinements,
        symmetry_defect=_symmetry_defect(lam, logs),
        charts=charts,
        values=values,
    )
    logger.info(
        "%s contour: %d samples, %d refinement passes, winding %d", contour.name, report.samples, refinements, winding
    )
    return report
