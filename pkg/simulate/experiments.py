"""Cross-validation experiments: decay rates, Green's comparison, nonlinear orbital stability."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import trapezoid
from scipy.optimize import minimize_scalar

from config import settings
from core.errors import ConvergenceError, SimulationError
from core.linalg import LinearFit, linear_fit
from core.state import ShockProfile, uniform_grid
from greens.apply import green_apply
from greens.kernels import linear_shift
from greens.scattering import ScatteringTable
from models.base import RelaxationModel
from simulate.linear import SimRun, evolve_linear, padded_halfwidth
from simulate.nonlinear import evolve_nonlinear

logger = logging.getLogger(__name__)

_P_LABELS = {1.0: "L1", 2.0: "L2", float("inf"): "Linf"}


def _label(p: float) -> str:
    return _P_LABELS.get(float(p), f"L{p:g}")


def fit_window(times: np.ndarray, t_min: float, t_max: float | None = None) -> np.ndarray:
    """Mask of snapshot times in [t_min, t_max]; the window must span a decade."""
    t_max = float(times.max()) if t_max is None else t_max
    mask = (times >= t_min) & (times <= t_max)
    if t_min <= 0 or not np.any(mask) or times[mask].max() / t_min < 10.0 - 1e-9:
        raise SimulationError(f"decay fit window [{t_min}, {t_max}] spans less than one decade")
    return mask


# ==============================================================================
# Linear decay
# ==============================================================================


@dataclass
class DecayReport:
    times: np.ndarray
    delta: np.ndarray
    fits: dict[str, LinearFit]
    norms: dict[str, np.ndarray]

    def to_dict(self) -> dict:
        return {
            label: {"slope": fit.slope, "intercept": fit.intercept, "r2": fit.r2, "window": list(fit.window)}
            for label, fit in self.fits.items()
        }


def decay_report(
    run: SimRun,
    profile: ShockProfile,
    table: ScatteringTable,
    p_list=(1.0, 2.0, np.inf),
    *,
    t_min: float = 10.0,
) -> DecayReport:
    """Fit log ||U - phi||_{L^p} against log(1 + t) over t >= t_min; phi = delta(t) d_delta U."""
    if run.initial is None:
        raise SimulationError("decay report needs the initial data of the run")
    mask = fit_window(run.times, t_min)
    delta = np.array([linear_shift(table, run.initial, t, grid=run.x)[0] for t in run.times])
    dmass = table.dmass_at(run.x)
    phi = delta[:, None, None] * dmass[None]
    fits, norms = {}, {}
    for p in p_list:
        label = _label(p)
        values = run.norms(p, offset=phi)
        norms[label] = values
        fits[label] = linear_fit(np.log1p(run.times[mask]), np.log(values[mask]))
        logger.info("decay %s: slope=%.4f r2=%.4f", label, fits[label].slope, fits[label].r2)
    run.delta = delta
    run.fits = {label: fit.slope for label, fit in fits.items()}
    return DecayReport(times=run.times, delta=delta, fits=fits, norms=norms)


# ==============================================================================
# Green's function comparison
# ==============================================================================


def near_delta(x: np.ndarray, y0: float, component: int, N: int) -> np.ndarray:
    """Unit-mass hat of width 3 dx centred at y0 in one component."""
    dx = float(x[1] - x[0])
    hat = np.maximum(0.0, 1.0 - np.abs(x - y0) / (1.5 * dx))
    out = np.zeros((x.size, N))
    out[:, component] = hat / trapezoid(hat, x)
    return out


@dataclass
class GreensComparison:
    y0: float
    component: int
    rows: list[dict] = field(default_factory=list)

    def error(self, t: float, component: int = 0) -> float:
        row = min(self.rows, key=lambda r: abs(r["t"] - t))
        return row["errors"][component]

    @property
    def decreasing(self) -> bool:
        errs = [r["errors"][0] for r in self.rows]
        return len(errs) < 2 or errs[-1] < errs[0]

    def to_dict(self) -> dict:
        return {"y0": self.y0, "component": self.component, "rows": self.rows, "decreasing": self.decreasing}


def greens_compare(
    profile: ShockProfile,
    table: ScatteringTable,
    y0: float,
    times,
    *,
    component: int = 0,
    dx: float | None = None,
) -> GreensComparison:
    """Relative L1 difference between evolve_linear and green_apply from near-delta data at y0."""
    times = np.sort(np.asarray(times, dtype=float))
    dx = settings.sim_dx if dx is None else dx
    N = profile.model.N
    speed = float(np.max(np.abs(profile.coefficients.fields.speeds)))
    support = max(profile.X, abs(y0))
    grid = uniform_grid(support, dx)
    f0 = near_delta(grid, y0, component, N)
    run = evolve_linear(profile, f0, float(times[-1]), times=times, dx=dx, grid=grid)
    report = GreensComparison(y0=float(y0), component=component)
    for k, t in enumerate(run.times):
        predicted = green_apply(profile, table, f0, t, x=run.x, grid=grid)
        simulated = run.snapshots[k]
        errors = []
        for c in range(N):
            scale = trapezoid(np.abs(simulated[:, c]), run.x)
            diff = trapezoid(np.abs(simulated[:, c] - predicted[:, c]), run.x)
            errors.append(float(diff / scale) if scale > 0 else float("nan"))
        lo, hi = run.support(k)
        cone = (y0 - speed * t - 2 * dx, y0 + speed * t + 2 * dx)
        report.rows.append(
            {
                "t": float(t),
                "errors": errors,
                "support": [lo, hi],
                "cone": list(cone),
                "in_cone": bool(lo >= cone[0] and hi <= cone[1]),
            }
        )
        logger.info("greens compare t=%.4g: relative L1 error %s", t, ", ".join(f"{e:.4f}" for e in errors))
    return report


# ==============================================================================
# Nonlinear orbital stability
# ==============================================================================


def _shape(shape: str | Callable[[np.ndarray], np.ndarray]) -> Callable[[np.ndarray], np.ndarray]:
    if callable(shape):
        return shape
    if shape == "gaussian":
        return lambda x: np.exp(-(x**2))
    raise SimulationError(f"unknown perturbation shape '{shape}'")


def fit_shift(x: np.ndarray, W: np.ndarray, target: np.ndarray, guess: float, interior: np.ndarray) -> float:
    """argmin_delta ||W(. + delta) - target||_{L2} by golden-section search around guess."""

    def cost(delta: float) -> float:
        shifted = np.column_stack([np.interp(x + delta, x, W[:, c]) for c in range(W.shape[1])])
        diff = (shifted - target)[interior]
        return float(trapezoid(np.sum(diff**2, axis=1), x[interior]))

    res = minimize_scalar(cost, bracket=(guess - 0.05, guess + 0.05), method="golden", tol=1e-10)
    if not getattr(res, "success", True) or not np.isfinite(res.x) or abs(res.x - guess) > 1.0:
        raise ConvergenceError(f"shift search diverged (guess {guess:.4g}, got {res.x})")
    return float(res.x)


@dataclass
class NonlinearReport:
    amplitude: float
    mass: float
    times: np.ndarray
    delta_hat: np.ndarray
    delta_lin: np.ndarray
    sup_norm: np.ndarray
    fit: LinearFit
    predicted_shift: float
    run: SimRun | None = None

    @property
    def plateau(self) -> float:
        return float(self.delta_hat[-1])

    @property
    def plateau_error(self) -> float:
        return abs(self.plateau - self.predicted_shift) / abs(self.predicted_shift)

    def rows(self) -> list[dict]:
        return [
            {"t": float(t), "delta_hat": float(d), "delta_lin": float(dl), "Linf": float(s)}
            for t, d, dl, s in zip(self.times, self.delta_hat, self.delta_lin, self.sup_norm)
        ]

    def to_dict(self) -> dict:
        return {
            "amplitude": self.amplitude,
            "mass": self.mass,
            "predicted_shift": self.predicted_shift,
            "plateau": self.plateau,
            "plateau_error": self.plateau_error,
            "max_abs_delta": float(np.max(np.abs(self.delta_hat))),
            "Linf_slope": self.fit.slope,
            "Linf_r2": self.fit.r2,
        }


def nonlinear_experiment(
    model: RelaxationModel,
    profile: ShockProfile,
    table: ScatteringTable,
    amplitude: float = 0.01,
    shape: str | Callable[[np.ndarray], np.ndarray] = "gaussian",
    *,
    T: float = 100.0,
    times=None,
    dx: float | None = None,
    t_min: float = 10.0,
) -> NonlinearReport:
    """Perturb the u-component of the profile, evolve, and track the best-fit shift."""
    dx = settings.sim_dx if dx is None else dx
    shock = profile.shock
    times = np.linspace(0.0, T, int(round(T)) + 1) if times is None else np.asarray(times, dtype=float)
    speed = float(np.max(np.abs(profile.coefficients.fields.speeds)))
    x = uniform_grid(padded_halfwidth(profile.X, speed, T), dx)
    base = profile.interpolate(x)
    bump = amplitude * _shape(shape)(x)
    W0 = base.copy()
    W0[:, 0] += bump
    mass = float(trapezoid(bump, x))
    jump = float(shock.u_minus[0] - shock.u_plus[0])
    predicted = mass / jump

    run = evolve_nonlinear(model, W0, T, x=x, shock=shock, times=times)
    interior = np.abs(x) <= x[-1] - 2.0
    delta_hat, sup_norm = [], []
    guess = 0.0
    for k in range(run.times.size):
        W = run.snapshots[k]
        guess = fit_shift(x, W, base, guess, interior)
        delta_hat.append(guess)
        shifted = np.column_stack([np.interp(x + guess, x, W[:, c]) for c in range(model.N)])
        sup_norm.append(float(np.max(np.linalg.norm((shifted - base)[interior], axis=1))))
    delta_hat = np.asarray(delta_hat)
    sup_norm = np.asarray(sup_norm)
    delta_lin = np.array([linear_shift(table, W0 - base, t, grid=x)[0] for t in run.times])
    mask = fit_window(run.times, t_min)
    fit = linear_fit(np.log1p(run.times[mask]), np.log(sup_norm[mask]))
    run.delta = delta_hat
    run.fits = {"Linf": fit.slope}
    logger.info(
        "nonlinear run: plateau %.6g vs predicted %.6g, Linf slope %.3f", delta_hat[-1], predicted, fit.slope
    )
    return NonlinearReport(
        amplitude=float(amplitude),
        mass=mass,
        times=run.times,
        delta_hat=delta_hat,
        delta_lin=delta_lin,
        sup_norm=sup_norm,
        fit=fit,
        predicted_shift=predicted,
        run=run,
    )
