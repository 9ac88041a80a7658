"""Total action of G: H + E + S in the time domain, and a Bromwich-line inversion of the resolvent."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from config import settings
from core.errors import ContourError
from core.state import ShockProfile
from evans.function import EvansSetup
from evans.resolvent import resolvent_apply, stored_bases
from greens.characteristics import GridFunction, H_apply, characteristic_share, sample
from greens.kernels import S_eval, linear_shift
from greens.scattering import ScatteringTable
from worker import ordered_map

logger = logging.getLogger(__name__)

_X_CHUNK = 128
_LAMBDA_CHUNK = 128


def green_apply(
    profile: ShockProfile,
    table: ScatteringTable,
    f: GridFunction,
    t: float,
    *,
    x: np.ndarray | None = None,
    grid: np.ndarray | None = None,
) -> np.ndarray:
    """(H + E + S) f at time t, values (len(x), N).

    E and S act on the data H has released by time t: the conserved part of f
    less the share the characteristic modes still carry. At t = 0 that is
    nothing, so G(0) f = f, and the u-mass stays split between H and the
    slow part instead of being counted twice. The y-quadrature is a
    trapezoid on `grid` (the profile grid by default).
    """
    x = profile.x if x is None else np.asarray(x, dtype=float)
    grid = profile.x if grid is None else np.asarray(grid, dtype=float)
    fy = sample(f, grid, grid)
    nonzero = np.flatnonzero(np.any(fy != 0.0, axis=1))
    if nonzero.size == 0:
        return np.zeros((x.size, fy.shape[1]))
    keep = slice(max(nonzero[0] - 1, 0), nonzero[-1] + 2)
    grid, fy = grid[keep], fy[keep]

    out = H_apply(profile, fy, t, x=x, grid=grid)
    if t <= 0.0:
        return out
    n = profile.model.n
    released = fy.copy()
    released[:, :n] -= characteristic_share(profile, fy, grid, t)
    delta, _ = linear_shift(table, released, t, grid=grid)
    out += delta * table.dmass_at(x)
    for start in range(0, x.size, _X_CHUNK):
        xs = x[start : start + _X_CHUNK]
        kernel = S_eval(profile, table, xs[:, None], t, grid[None, :], switch_on=False)
        out[start : start + _X_CHUNK] += trapezoid(np.einsum("xynm,ym->xyn", kernel, released), grid, axis=1)
    logger.debug("green_apply at t=%.4g: delta=%.6g", t, delta)
    return out



@dataclass
class BromwichResult:
    t: float
    x: np.ndarray
    values: np.ndarray  # (S, N)
    tail: float
    abscissa: float
    height: float
    samples: int

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "tail": self.tail,
            "abscissa": self.abscissa,
            "height": self.height,
            "samples": self.samples,
        }


def contour_green(
    profile: ShockProfile,
    f: GridFunction,
    t: float,
    *,
    abscissa: float | None = None,
    height: float | None = None,
    step: float | None = None,
    X: float | None = None,
    grid: np.ndarray | None = None,
    threads: int | None = None,
) -> BromwichResult:
    """e^{Lt} f = (1/2 pi i) int e^{lambda t} (lambda - L)^{-1} f d lambda along Re lambda = gamma.

    With w = (L - lambda)^{-1} f and conjugate symmetry of real data this is
    -(1/pi) Re int_0^Xi e^{lambda t} w d xi, summed by the trapezoid rule.
    """
    gamma = settings.bromwich_abscissa if abscissa is None else float(abscissa)
    Xi = settings.bromwich_height if height is None else float(height)
    h = settings.bromwich_step if step is None else float(step)
    if gamma <= 0:
        raise ContourError(f"Bromwich abscissa must be positive, got {gamma}")
    if t <= 0:
        raise ContourError(f"contour inversion needs t > 0, got {t}")
    X = min(profile.X, 40.0) if X is None else X
    setup = EvansSetup(profile, X=X)
    x = setup.coeffs.x[np.arange(setup.lo, setup.hi + 1, 2)]
    fx = sample(f, x, profile.x if grid is None else grid)

    xi = np.arange(0.0, Xi + 0.5 * h, h)
    lams = gamma + 1j * xi

    def _chunk(part: np.ndarray) -> list[np.ndarray]:
        out = []
        for start in range(0, part.size, _LAMBDA_CHUNK):
            bases = stored_bases(profile, part[start : start + _LAMBDA_CHUNK], setup=setup)
            out.extend(resolvent_apply(bases, fx))
        return out

    w = np.stack(ordered_map(_chunk, lams, threads))  # (L, S, N)
    integrand = np.exp(lams * t)[:, None, None] * w
    values = -trapezoid(integrand, xi, axis=0).real / np.pi
    scale = float(np.max(np.abs(values))) or 1.0
    tail = float(np.exp(gamma * t) * np.max(np.abs(w[-1])) / (np.pi * t))
    logger.info("Bromwich inversion at t=%.4g: %d samples, tail estimate %.3g", t, xi.size, tail)
    if tail > settings.bromwich_tail_tol * scale:
        raise ContourError(f"Bromwich truncation tail {tail:.3g} exceeds tolerance (height {Xi})")
    return BromwichResult(t=float(t), x=x, values=values, tail=tail, abscissa=gamma, height=Xi, samples=int(xi.size))
