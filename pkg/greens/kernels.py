"""Excited (E) and scattering (S) parts of G, and the linear shift kernel e(y, t)."""

from __future__ import annotations

import logging

import numpy as np
from scipy.integrate import trapezoid

from config import settings
from core.state import ShockProfile
from greens.characteristics import GridFunction, sample
from greens.errfn import arrival_bracket, heat_kernel
from greens.scattering import ScatteringTable

logger = logging.getLogger(__name__)

_OTHER = {"-": "+", "+": "-"}


def e_kernel(table: ScatteringTable, y, t: float) -> np.ndarray:
    """Row vectors e(y, t), shape y.shape + (N,), with E(x, t; y) = d_delta U(x) e(y, t)."""
    y = np.asarray(y, dtype=float)
    N = table.dmass.shape[1]
    out = np.zeros(y.shape + (N,))
    for side, mask in (("-", y < 0), ("+", y >= 0)):
        if not np.any(mask):
            continue
        modes = table.sides[side]
        for k in modes.incoming(side):
            c0 = table.coefficients[(side, int(k))]["zero"]
            row = c0.sum() * modes.L_star[:, k]
            bracket = arrival_bracket(y[mask], t, modes.speeds[k], modes.beta[k])
            out[mask] += bracket[..., None] * row
    return out


def E_eval(profile: ShockProfile, table: ScatteringTable, x, t: float, y) -> np.ndarray:
    """E(x, t; y), shape broadcast(x, y) + (N, N)."""
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    return table.dmass_at(x)[..., :, None] * e_kernel(table, y, t)[..., None, :]


def _weights(x: np.ndarray, side: str) -> tuple[np.ndarray, np.ndarray]:
    """(same-side weight, far-side weight) with e^{+-x} / (e^x + e^{-x}) written through tanh."""
    toward_minus = 0.5 * (1.0 - np.tanh(x))
    toward_plus = 0.5 * (1.0 + np.tanh(x))
    return (toward_minus, toward_plus) if side == "-" else (toward_plus, toward_minus)


def _S_side(table: ScatteringTable, side: str, x: np.ndarray, t: float, y: np.ndarray) -> np.ndarray:
    modes, other = table.sides[side], table.sides[_OTHER[side]]
    N = table.dmass.shape[1]
    cutoff = settings.gaussian_cutoff_sd
    out = np.zeros(x.shape + (N, N))
    same_w, far_w = _weights(x, side)
    outgoing_same = modes.outgoing(side)
    outgoing_far = other.outgoing(_OTHER[side])
    same_key, far_key = ("minus", "plus") if side == "-" else ("plus", "minus")
    for k in range(modes.speeds.size):
        a_k, b_k = modes.speeds[k], modes.beta[k]
        direct = heat_kernel(x - y - a_k * t, b_k * t, cutoff)
        proj = np.outer(modes.R_star[:, k], modes.L_star[:, k])
        if k in outgoing_same:
            out += direct[..., None, None] * proj
            continue
        out += (direct * same_w)[..., None, None] * proj
        coeffs = table.coefficients[(side, int(k))]
        lag = t - np.abs(y) / abs(a_k)
        for family, idx_set, key, weight in (
            (modes, outgoing_same, same_key, same_w),
            (other, outgoing_far, far_key, far_w),
        ):
            for pos, j in enumerate(idx_set):
                a_j, b_j = family.speeds[j], family.beta[j]
                z = a_j * lag
                beta_bar = np.abs(x) / abs(a_j * t) * b_j + np.abs(y) / abs(a_k * t) * (a_j / a_k) ** 2 * b_k
                g = heat_kernel(x - z, beta_bar * t, cutoff)
                scat = coeffs[key][pos] * np.outer(family.R_star[:, j], modes.L_star[:, k])
                out += (g * weight)[..., None, None] * scat
    return out


def S_eval(profile: ShockProfile, table: ScatteringTable, x, t: float, y, *, switch_on: bool = True) -> np.ndarray:
    """S(x, t; y), shape broadcast(x, y) + (N, N); identically zero for t < 1.

    switch_on=False drops the t >= 1 cutoff, for callers that hand S only the
    data the characteristic part has already released.
    """
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    N = table.dmass.shape[1]
    if t <= 0.0 or (switch_on and t < 1.0):
        return np.zeros(x.shape + (N, N))
    left = _S_side(table, "-", x, t, y)
    right = _S_side(table, "+", x, t, y)
    return np.where((y < 0)[..., None, None], left, right)


def linear_shift(
    table: ScatteringTable,
    U0: GridFunction,
    t: float,
    *,
    grid: np.ndarray | None = None,
) -> tuple[float, np.ndarray]:
    """delta(t) = int e(y, t) U0(y) dy and phi = delta(t) d_delta U on the table grid."""
    y = table.x if grid is None else np.asarray(grid, dtype=float)
    values = sample(U0, y, y) if callable(U0) else np.asarray(U0, dtype=float).reshape(y.size, -1)
    delta = float(trapezoid(np.einsum("yn,yn->y", e_kernel(table, y, t), values), y))
    logger.debug("linear shift at t=%.4g: delta=%.6g", t, delta)
    return delta, delta * table.dmass
