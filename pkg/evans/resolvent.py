"""Resolvent kernel G_lambda(x, y) of L = -d/dx A + Q from stored decaying bases."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from core.errors import NearEigenvalueError
from core.state import ShockProfile
from evans.function import Charts, EvansSetup, side_sweep

logger = logging.getLogger(__name__)

_NEAR_SINGULAR = 1e-8


@dataclass
class StoredBases:
    """Phi^+ and Phi^- (Z-form) on the step grid as exp(L) B, for a batch of lambda."""

    lam: np.ndarray  # (L,)
    x: np.ndarray  # (S,) ascending
    plus_B: np.ndarray  # (L, S, N, k)
    plus_L: np.ndarray  # (L, S)
    minus_B: np.ndarray  # (L, S, N, N - k)
    minus_L: np.ndarray  # (L, S)
    Ainv: np.ndarray  # (S, N, N)
    k: int

    def separation(self) -> np.ndarray:
        """|det| of the column-normalized [B^+ B^-] at every node, (L, S)."""
        M = np.concatenate([self.plus_B, self.minus_B], axis=3)
        M = M / np.linalg.norm(M, axis=2, keepdims=True)
        return np.abs(np.linalg.det(M))


def stored_bases(profile: ShockProfile, lams, *, charts: Charts | None = None, setup: EvansSetup | None = None) -> StoredBases:
    """Integrate both decaying bases across the whole grid and keep every step."""
    setup = setup or EvansSetup(profile)
    lams = np.atleast_1d(np.asarray(lams, dtype=complex))
    plus = side_sweep(setup, "+", lams, charts.plus if charts else None, setup.lo, store=True)
    minus = side_sweep(setup, "-", lams, charts.minus if charts else None, setup.hi, store=True)
    nodes = np.arange(setup.lo, setup.hi + 1, 2)
    return StoredBases(
        lam=lams,
        x=setup.coeffs.x[nodes],
        plus_B=plus.B_path[:, ::-1],
        plus_L=plus.Lg_path[:, ::-1],
        minus_B=minus.B_path,
        minus_L=minus.Lg_path,
        Ainv=setup.coeffs.Ainv[nodes],
        k=setup.k,
    )


def _locate(x: np.ndarray, xq: float) -> tuple[int, float]:
    j = int(np.clip(np.searchsorted(x, xq, side="right") - 1, 0, x.size - 2))
    w = float(np.clip((xq - x[j]) / (x[j + 1] - x[j]), 0.0, 1.0))
    return j, w


def _basis_at(L: np.ndarray, B: np.ndarray, j: int, w: float) -> tuple[complex, np.ndarray]:
    """exp(L) B interpolated linearly in the represented solution, scaled to L_j."""
    if w == 0.0:
        return L[j], B[j]
    return L[j], (1.0 - w) * B[j] + w * np.exp(L[j + 1] - L[j]) * B[j + 1]


def _ainv_at(bases: StoredBases, j: int, w: float) -> np.ndarray:
    return np.linalg.inv((1.0 - w) * np.linalg.inv(bases.Ainv[j]) + w * np.linalg.inv(bases.Ainv[j + 1]))


def kernel_from_bases(bases: StoredBases, index: int, x: float, y: float) -> np.ndarray:
    """G(x, y) for bases.lam[index]; x = y returns the x > y side."""
    jx, wx = _locate(bases.x, x)
    jy, wy = _locate(bases.x, y)
    Lp_y, Bp_y = _basis_at(bases.plus_L[index], bases.plus_B[index], jy, wy)
    Lm_y, Bm_y = _basis_at(bases.minus_L[index], bases.minus_B[index], jy, wy)
    By = np.concatenate([Bp_y, Bm_y], axis=1)
    sep = abs(np.linalg.det(By / np.linalg.norm(By, axis=0, keepdims=True)))
    if sep < _NEAR_SINGULAR:
        raise NearEigenvalueError(f"decaying bases nearly dependent at lambda={bases.lam[index]} (|det|={sep:.3g})")
    inv = np.linalg.inv(By)
    k = bases.k
    Ainv_x = _ainv_at(bases, jx, wx)
    if x >= y:
        Lp_x, Bp_x = _basis_at(bases.plus_L[index], bases.plus_B[index], jx, wx)
        return -np.exp(Lp_x - Lp_y) * Ainv_x @ Bp_x @ inv[:k]
    Lm_x, Bm_x = _basis_at(bases.minus_L[index], bases.minus_B[index], jx, wx)
    return np.exp(Lm_x - Lm_y) * Ainv_x @ Bm_x @ inv[k:]


def resolvent_kernel(profile: ShockProfile, lam: complex, x: float, y: float, *, bases: StoredBases | None = None) -> np.ndarray:
    """N x N kernel of (L - lambda)^{-1}; jump G(y+, y) - G(y-, y) = -A(y)^{-1}."""
    bases = bases or stored_bases(profile, [lam])
    index = int(np.argmin(np.abs(bases.lam - lam)))
    return kernel_from_bases(bases, index, x, y)


def resolvent_jump(profile: ShockProfile, lam: complex, y: float, *, bases: StoredBases | None = None) -> np.ndarray:
    """G(y+, y) - G(y-, y)."""
    bases = bases or stored_bases(profile, [lam])
    index = int(np.argmin(np.abs(bases.lam - lam)))
    upper = kernel_from_bases(bases, index, y, y)
    jy, wy = _locate(bases.x, y)
    Lm, Bm = _basis_at(bases.minus_L[index], bases.minus_B[index], jy, wy)
    Lp, Bp = _basis_at(bases.plus_L[index], bases.plus_B[index], jy, wy)
    inv = np.linalg.inv(np.concatenate([Bp, Bm], axis=1))
    lower = _ainv_at(bases, jy, wy) @ Bm @ inv[bases.k :]
    return upper - lower


def resolvent_apply(bases: StoredBases, f: np.ndarray) -> np.ndarray:
    """w_lambda(x) = int G_lambda(x, y) f(y) dy on the step grid, (L, S, N).

    f holds the N components at bases.x. Both halves are accumulated with
    trapezoid recursions so that only exp(L(x) - L(y)) with bounded real
    part is ever formed.
    """
    f = np.asarray(f, dtype=complex)
    k = bases.k
    S = bases.x.size
    h = bases.x[1] - bases.x[0]
    sep = bases.separation()[:, S // 2]
    if np.any(sep < _NEAR_SINGULAR):
        bad = bases.lam[int(np.argmin(sep))]
        raise NearEigenvalueError(f"decaying bases nearly dependent at lambda={bad}")
    M = np.concatenate([bases.plus_B, bases.minus_B], axis=3)
    g = np.linalg.solve(M, np.broadcast_to(f[None, :, :, None], M.shape[:3] + (1,)))[..., 0]
    g_plus, g_minus = g[:, :, :k], g[:, :, k:]

    L_count = bases.lam.size
    U = np.zeros((L_count, S, k), dtype=complex)
    for j in range(1, S):
        e = np.exp(bases.plus_L[:, j] - bases.plus_L[:, j - 1])[:, None]
        U[:, j] = e * (U[:, j - 1] + 0.5 * h * g_plus[:, j - 1]) + 0.5 * h * g_plus[:, j]
    V = np.zeros((L_count, S, bases.minus_B.shape[3]), dtype=complex)
    for j in range(S - 2, -1, -1):
        e = np.exp(bases.minus_L[:, j] - bases.minus_L[:, j + 1])[:, None]
        V[:, j] = e * (V[:, j + 1] + 0.5 * h * g_minus[:, j + 1]) + 0.5 * h * g_minus[:, j]

    w_plus = -np.einsum("sab,lsbc,lsc->lsa", bases.Ainv, bases.plus_B, U)
    w_minus = np.einsum("sab,lsbc,lsc->lsa", bases.Ainv, bases.minus_B, V)
    logger.debug("resolvent applied for %d lambda on %d nodes", L_count, S)
    return w_plus + w_minus
