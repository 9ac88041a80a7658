"""Linearized evolution U_t = -((A - s) U)_x + Q U about a profile, and the SimRun record."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from config import settings
from core.errors import SimulationError
from core.state import ShockProfile, uniform_grid
from greens.characteristics import GridFunction, sample
from simulate.schemes import ExactTransport, linear_source, split_flux_matrices, upwind_step

logger = logging.getLogger(__name__)

_SUPPORT_FLOOR = 1e-12


@dataclass
class SimRun:
    """Snapshots of one run plus the traces measured on them."""

    x: np.ndarray
    dt: float
    scheme: str
    n: int  # conserved components
    times: np.ndarray = field(default_factory=lambda: np.empty(0))
    snapshots: np.ndarray = field(default_factory=lambda: np.empty((0, 0, 0)))  # (T, S, N)
    initial: np.ndarray | None = None
    delta: np.ndarray = field(default_factory=lambda: np.empty(0))
    fits: dict = field(default_factory=dict)

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    def norms(self, p: float, offset: np.ndarray | None = None) -> np.ndarray:
        """||U(t_k) - offset_k||_{L^p} with the pointwise Euclidean norm."""
        data = self.snapshots if offset is None else self.snapshots - offset
        pointwise = np.linalg.norm(data, axis=2)
        if np.isinf(p):
            return pointwise.max(axis=1)
        return trapezoid(pointwise**p, self.x, axis=1) ** (1.0 / p)

    def mass(self) -> np.ndarray:
        """Integral of the conserved components, (T, n)."""
        return trapezoid(self.snapshots[:, :, : self.n], self.x, axis=1)

    def mass_drift(self) -> float:
        if self.initial is None or not self.times.size:
            return 0.0
        m0 = trapezoid(self.initial[:, : self.n], self.x, axis=0)
        drift = np.max(np.abs(self.mass() - m0[None, :]))
        return float(drift / (1.0 + np.max(np.abs(m0))))

    def support(self, k: int) -> tuple[float, float]:
        """Smallest interval outside which |U(t_k)| is below the floor (relative to its max)."""
        pointwise = np.linalg.norm(self.snapshots[k], axis=1)
        top = pointwise.max()
        if top == 0.0:
            return (0.0, 0.0)
        idx = np.flatnonzero(pointwise > _SUPPORT_FLOOR * top)
        return float(self.x[idx[0]]), float(self.x[idx[-1]])

    def rows(self) -> list[dict]:
        """One row per snapshot: t, L1, L2, Linf, delta_hat."""
        l1, l2, linf = self.norms(1), self.norms(2), self.norms(np.inf)
        out = []
        for k, t in enumerate(self.times):
            out.append(
                {
                    "t": float(t),
                    "L1": float(l1[k]),
                    "L2": float(l2[k]),
                    "Linf": float(linf[k]),
                    "delta_hat": float(self.delta[k]) if self.delta.size else float("nan"),
                }
            )
        return out


def padded_halfwidth(X: float, speed: float, T: float, margin: float | None = None) -> float:
    """X + max|a| T + margin, so no signal reaches the edges before T."""
    margin = settings.sim_margin if margin is None else margin
    return X + speed * T + margin


def snapshot_steps(times, dt: float, T: float) -> tuple[np.ndarray, int]:
    """Step counts at which snapshots are taken, and the total step count."""
    times = np.asarray([0.0, T] if times is None else times, dtype=float)
    if np.any(times < 0) or np.any(times > T + 1e-12):
        raise SimulationError(f"snapshot times must lie in [0, {T}]")
    steps = np.unique(np.rint(times / dt).astype(int))
    return steps, int(steps[-1])


def snapshot_labels(times, dt: float, T: float) -> dict[int, float]:
    """Requested time recorded for each snapshot step; the first request wins."""
    times = np.asarray([0.0, T] if times is None else times, dtype=float)
    labels: dict[int, float] = {}
    for t in times:
        labels.setdefault(int(np.rint(t / dt)), float(t))
    return labels



def evolve_linear(
    profile: ShockProfile,
    U0: GridFunction,
    T: float,
    *,
    times=None,
    dx: float | None = None,
    grid: np.ndarray | None = None,
    margin: float | None = None,
) -> SimRun:
    """Evolve the linearized system from U0 to time T.

    Constant A: Strang splitting of grid-aligned characteristic transport and an
    RK2 source step. Variable A: first-order flux-split upwind, Lie splitting.
    U0 is a callable of x or values on `grid`.
    """
    dx = settings.sim_dx if dx is None else dx
    coeffs = profile.coefficients
    speed = float(np.max(np.abs(coeffs.fields.speeds)))
    support = profile.X
    if grid is not None:
        support = max(support, float(np.max(np.abs(grid))))
    x = uniform_grid(padded_halfwidth(support, speed, T, margin), dx)
    U = sample(U0, x, grid if grid is not None else profile.x).astype(float)
    if U.shape[1] != coeffs.N:
        raise SimulationError(f"initial data has {U.shape[1]} components, expected {coeffs.N}")
    A, Q = coeffs.at(x)
    zero = np.zeros(coeffs.N)

    transport = None
    if np.max(np.abs(coeffs.A - coeffs.A[0])) <= 1e-12:
        transport = ExactTransport.build(coeffs.A[0], dx)
    if transport is not None:
        dt, scheme = transport.dt, "exact-transport-strang"
    else:
        A_plus, A_minus = split_flux_matrices(A)
        dt, scheme = 0.9 * dx / speed, "upwind"
    if dt * speed > dx * (1.0 + 1e-12):
        raise SimulationError(f"CFL violated: dt*max|a| = {dt * speed:.6g} > dx = {dx:.6g}")

    _, total = snapshot_steps(times, dt, T)
    wanted = snapshot_labels(times, dt, T)
    run = SimRun(x=x, dt=dt, scheme=scheme, n=profile.model.n, initial=U.copy())
    snaps, taken = [], []
    logger.info("linear run: %d nodes, dt=%.4g, %d steps, scheme %s", x.size, dt, total, scheme)
    for step in range(total + 1):
        if step in wanted:
            if not np.all(np.isfinite(U)):
                raise SimulationError(f"non-finite state at t={step * dt:.4g}")
            snaps.append(U.copy())
            taken.append(wanted[step])
        if step == total:
            break
        if transport is not None:
            U = linear_source(U, Q, 0.5 * dt)
            U = transport.step(U, zero, zero)
            U = linear_source(U, Q, 0.5 * dt)
        else:
            U = upwind_step(U, A_plus, A_minus, dt, dx, zero, zero)
            U = linear_source(U, Q, dt)
    run.times = np.asarray(taken)
    run.snapshots = np.stack(snaps)
    logger.debug("linear run done: mass drift %.3g", run.mass_drift())
    return run
