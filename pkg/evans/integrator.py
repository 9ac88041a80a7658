"""Batched basis sweeps over the coefficient nodes with QR rescaling.

A sweep advances Y' = (P0(x) + lam P1(x) - c I) Y from one node to
another, two nodes per step. The represented solution is

    Z(x) = exp(Lg(x)) B(x),  Lg(x) = c x + logdet / m,

so Z ~ e^{c x} Y0 where the sweep starts. QR factors are folded into a
unit-determinant m x m matrix and a complex log scale.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from config import settings
from core.errors import EvansError

logger = logging.getLogger(__name__)

_GAUSS_LO = 1.0 - 1.0 / math.sqrt(3.0)  # node units from the step start
_GAUSS_HI = 1.0 / math.sqrt(3.0)  # weight toward the last node in the second half
_MAGNUS_C = math.sqrt(3.0) / 12.0


@dataclass
class SweepResult:
    B: np.ndarray  # (L, N, m) at the last node
    Lg: np.ndarray  # (L,) complex
    rescale: np.ndarray  # (L,) real part of the accumulated log det
    magnus: np.ndarray  # (L,) bool
    x: np.ndarray | None = None  # visited nodes, in visiting order
    B_path: np.ndarray | None = None  # (L, S, N, m)
    Lg_path: np.ndarray | None = None  # (L, S)


def qr_interval(h: float, spread: float) -> int:
    """Steps between re-orthonormalizations for a growth-rate spread."""
    if spread <= 0 or not math.isfinite(spread):
        return settings.evans_qr_interval
    return int(min(max(math.floor(4.0 / (abs(h) * spread)), 1), settings.evans_qr_interval))


def needs_magnus(lams: np.ndarray, h: float, min_speed: float) -> np.ndarray:
    return np.abs(h) * np.abs(lams) / min_speed > 1.0


def sweep(
    x_nodes: np.ndarray,
    P0: np.ndarray,
    P1: np.ndarray,
    lams: np.ndarray,
    c: np.ndarray,
    Y0: np.ndarray,
    start: int,
    stop: int,
    *,
    min_speed: float,
    spread: float,
    store: bool = False,
) -> SweepResult:
    """Advance the batch from node `start` to node `stop` (even node distance)."""
    if (stop - start) % 2:
        raise ValueError("sweep endpoints must be an even number of nodes apart")
    lams = np.asarray(lams, dtype=complex)
    spacing = x_nodes[1] - x_nodes[0]
    d = 1 if stop >= start else -1
    h = 2 * d * spacing
    magnus = needs_magnus(lams, h, min_speed)
    L, N, m = Y0.shape
    out = SweepResult(
        B=np.empty((L, N, m), dtype=complex),
        Lg=np.empty(L, dtype=complex),
        rescale=np.empty(L),
        magnus=magnus,
    )
    steps = abs(stop - start) // 2
    if store:
        out.x = x_nodes[np.arange(start, stop + d, 2 * d)]
        out.B_path = np.empty((L, steps + 1, N, m), dtype=complex)
        out.Lg_path = np.empty((L, steps + 1), dtype=complex)
    interval = qr_interval(h, spread)
    for mask, use_magnus in ((~magnus, False), (magnus, True)):
        if not np.any(mask):
            continue
        part = _run(
            x_nodes, P0, P1, lams[mask], c[mask], Y0[mask], start, steps, d, h,
            interval=interval, use_magnus=use_magnus, store=store,
        )
        out.B[mask], out.Lg[mask], out.rescale[mask] = part[0], part[1], part[2]
        if store:
            out.B_path[mask], out.Lg_path[mask] = part[3], part[4]
    logger.debug(
        "sweep nodes %d->%d: %d lambda (%d magnus), qr every %d steps",
        start, stop, L, int(magnus.sum()), interval,
    )
    return out


def _run(x_nodes, P0, P1, lams, c, Y, start, steps, d, h, *, interval, use_magnus, store):
    L, N, m = Y.shape
    eye = np.eye(N)
    lam_b = lams[:, None, None]
    shift_b = c[:, None, None] * eye

    def field(j: int) -> np.ndarray:
        return P0[j][None] + lam_b * P1[j][None] - shift_b

    Y = np.array(Y, dtype=complex, copy=True)
    Pt = np.broadcast_to(np.eye(m, dtype=complex), (L, m, m)).copy()
    logdet = np.zeros(L, dtype=complex)
    if store:
        B_path = np.empty((L, steps + 1, N, m), dtype=complex)
        Lg_path = np.empty((L, steps + 1), dtype=complex)
        B_path[:, 0] = Y
        Lg_path[:, 0] = c * x_nodes[start]

    i = start
    for step in range(1, steps + 1):
        j1, j2 = i + d, i + 2 * d
        if use_magnus:
            F0, F1, F2 = field(i), field(j1), field(j2)
            Ma = (1.0 - _GAUSS_LO) * F0 + _GAUSS_LO * F1
            Mb = (1.0 - _GAUSS_HI) * F1 + _GAUSS_HI * F2
            omega = 0.5 * h * (Ma + Mb) + _MAGNUS_C * h * h * (Mb @ Ma - Ma @ Mb)
            Y = expm(omega) @ Y
        else:
            M0, M1, M2 = field(i), field(j1), field(j2)
            k1 = M0 @ Y
            k2 = M1 @ (Y + 0.5 * h * k1)
            k3 = M1 @ (Y + 0.5 * h * k2)
            k4 = M2 @ (Y + h * k3)
            Y = Y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        i = j2
        if step % interval == 0 or step == steps:
            Qf, R = np.linalg.qr(Y)
            diag = np.diagonal(R, axis1=1, axis2=2)
            ld = np.sum(np.log(diag.astype(complex)), axis=1)
            if not np.all(np.isfinite(ld)):
                raise EvansError(f"basis lost rank or overflowed near x={x_nodes[i]:.4g}")
            Y = Qf
            Pt = (R @ Pt) * np.exp(-ld / m)[:, None, None]
            logdet = logdet + ld
        if store:
            B_path[:, step] = Y @ Pt
            Lg_path[:, step] = c * x_nodes[i] + logdet / m
    B = Y @ Pt
    if not np.all(np.isfinite(B)):
        raise EvansError("non-finite basis at the end of the sweep")
    Lg = c * x_nodes[i] + logdet / m
    if store:
        return B, Lg, logdet.real, B_path, Lg_path
    return B, Lg, logdet.real, None, None
