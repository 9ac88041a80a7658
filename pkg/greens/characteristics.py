"""Characteristic paths of the frozen system and the hyperbolic part H of G."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import expm

from core.linalg import interp_rows
from core.state import ShockProfile

logger = logging.getLogger(__name__)

GridFunction = Callable[[np.ndarray], np.ndarray] | np.ndarray


@dataclass
class CharacteristicPath:
    family: int
    y: float
    t: float
    z: float  # z_j(y, t)
    zeta: np.ndarray  # m x m dissipation propagator
    eta_bar: np.ndarray  # m x m time average of eta_j along the path
    a_bar: float


class _FamilyField:
    """a_j(x), eta_j(x), r_j(x), l_j(x) for one family, constant beyond the grid."""

    def __init__(self, profile: ShockProfile, family: int):
        coeffs = profile.coefficients
        fields = coeffs.fields
        if not 0 <= family < len(fields.groups):
            raise IndexError(f"family {family} out of range ({len(fields.groups)} families)")
        g = fields.groups[family]
        self.x = coeffs.x
        self.speed = fields.speeds[:, g[0]]
        self.eta = fields.eta[:, g][:, :, g]
        self.right = fields.right[:, :, g]
        self.left = fields.left[:, g, :]
        self.m = int(g.size)
        self.max_speed = float(np.max(np.abs(fields.speeds)))
        self.dx = profile.dx

    def a(self, z: np.ndarray) -> np.ndarray:
        return np.interp(z, self.x, self.speed)

    def eta_at(self, z: np.ndarray) -> np.ndarray:
        return interp_rows(np.asarray(z, dtype=float), self.x, self.eta)

    def step(self, t: float) -> tuple[int, float]:
        if t <= 0:
            return 0, 0.0
        h = min(self.dx / self.max_speed, t / 100.0)
        count = int(math.ceil(t / h - 1e-12))
        return count, t / count


def _integrate(fam: _FamilyField, z0: np.ndarray, t: float, direction: float, need_zeta: bool):
    """RK4 on z' = direction * a(z); accumulates eta along the way.

    Returns z(t), the time integral of eta (m x m per point) and, when the
    family has multiplicity > 1, the ordered propagator of -eta.
    """
    z = np.asarray(z0, dtype=float).copy()
    count, h = fam.step(t)
    m = fam.m
    integral = np.zeros(z.shape + (m, m))
    zeta = np.broadcast_to(np.eye(m), z.shape + (m, m)).copy()
    for _ in range(count):
        k1 = direction * fam.a(z)
        k2 = direction * fam.a(z + 0.5 * h * k1)
        k3 = direction * fam.a(z + 0.5 * h * k2)
        k4 = direction * fam.a(z + h * k3)
        z_mid = z + 0.5 * h * k2
        z_new = z + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        e0, em, e1 = fam.eta_at(z), fam.eta_at(z_mid), fam.eta_at(z_new)
        increment = (h / 6.0) * (e0 + 4 * em + e1)
        integral += increment
        if need_zeta and m > 1:
            # forward time: zeta <- step @ zeta; backward sweep accumulates on the right
            step = expm(-increment)
            zeta = step @ zeta if direction > 0 else zeta @ step
        z = z_new
    return z, integral, zeta


def characteristic_path(profile: ShockProfile, family: int, y: float, t: float) -> CharacteristicPath:
    """z_j(y, t), zeta_j(y, t) and the averaged rates along the path."""
    fam = _FamilyField(profile, family)
    z, integral, zeta = _integrate(fam, np.array([y], dtype=float), t, 1.0, need_zeta=True)
    integral = integral[0]
    if fam.m == 1:
        zeta_j = np.exp(-integral)
    else:
        zeta_j = zeta[0]
    eta_bar = integral / t if t > 0 else fam.eta_at(np.array([y]))[0]
    a_bar = (float(z[0]) - y) / t if t > 0 else float(fam.a(np.array([y]))[0])
    return CharacteristicPath(
        family=family, y=float(y), t=float(t), z=float(z[0]), zeta=zeta_j, eta_bar=eta_bar, a_bar=a_bar
    )


def sample(f: GridFunction, x: np.ndarray, grid: np.ndarray | None = None) -> np.ndarray:
    """Values (len(x), N) of f, given as a callable or as values on `grid` (zero outside)."""
    if callable(f):
        return np.asarray(f(x), dtype=float).reshape(x.size, -1)
    values = np.asarray(f, dtype=float)
    if grid is None:
        raise ValueError("sampled f needs its grid")
    values = values.reshape(grid.size, -1)
    return np.column_stack(
        [np.interp(x, grid, values[:, c], left=0.0, right=0.0) for c in range(values.shape[1])]
    )


def H_apply(
    profile: ShockProfile,
    f: GridFunction,
    t: float,
    *,
    x: np.ndarray | None = None,
    grid: np.ndarray | None = None,
) -> np.ndarray:
    """(Hf)(x) = sum_j r_j(x) zeta_j(y_j, t) l_j(y_j)^T f(y_j) with z_j(y_j, t) = x."""
    x = profile.x if x is None else np.asarray(x, dtype=float)
    grid = profile.x if grid is None else grid
    N = profile.model.N
    out = np.zeros((x.size, N))
    families = len(profile.coefficients.fields.groups)
    for j in range(families):
        fam = _FamilyField(profile, j)
        y, integral, zeta = _integrate(fam, x, t, -1.0, need_zeta=True)
        if fam.m == 1:
            zeta = np.exp(-integral)
        fy = sample(f, y, grid)
        left_y = interp_rows(y, fam.x, fam.left)  # (len, m, N)
        right_x = interp_rows(x, fam.x, fam.right)  # (len, N, m)
        out += np.einsum("xnm,xmk,xkc,xc->xn", right_x, zeta, left_y, fy)
    logger.debug("H applied at t=%.4g over %d families", t, families)
    return out


def characteristic_share(profile: ShockProfile, fy: np.ndarray, grid: np.ndarray, t: float) -> np.ndarray:
    """Conserved components still carried by H at time t, per source point y on `grid`.

    sum_j [r_j(z_j(y, t))]_u zeta_j(y, t) l_j(y)^T f(y); equals f_u(y) at t = 0.
    """
    n = profile.model.n
    fy = np.asarray(fy, dtype=float).reshape(grid.size, -1)
    held = np.zeros((grid.size, n))
    for j in range(len(profile.coefficients.fields.groups)):
        fam = _FamilyField(profile, j)
        z, integral, zeta = _integrate(fam, grid, t, 1.0, need_zeta=True)
        if fam.m == 1:
            zeta = np.exp(-integral)
        right_z = interp_rows(z, fam.x, fam.right)[:, :n]  # (len, n, m)
        left_y = interp_rows(grid, fam.x, fam.left)  # (len, m, N)
        held += np.einsum("ynm,ymk,ykc,yc->yn", right_z, zeta, left_y, fy)
    return held
