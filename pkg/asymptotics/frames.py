"""Goodman-normalized eigenframes and first-order block diagonalization of eps W' = (A0 + eps A1) W."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from asymptotics.sylvester import sylvester
from core.errors import FrameDegenerationError
from core.linalg import canonical_columns, group_eigenvalues

logger = logging.getLogger(__name__)

MatrixField = Callable[[float], np.ndarray]

_STENCIL_STEP = 1e-3
_NAIVE_STEP = 1e-5


def five_point(fn: Callable[[float], np.ndarray], x: float, h: float = _STENCIL_STEP) -> np.ndarray:
    """Fourth-order central difference of a matrix-valued function."""
    return (fn(x - 2 * h) - 8 * fn(x - h) + 8 * fn(x + h) - fn(x + 2 * h)) / (12 * h)


def _sorted_eig(M: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    vals, vecs = np.linalg.eig(M)
    order = np.lexsort((vals.imag, vals.real))
    R = canonical_columns(vecs[:, order])
    return vals[order], R, np.linalg.inv(R)


class GoodmanFrame:
    """Eigenframe (R_j, L_j) of A0(x) normalized so that L_j R_j' = 0."""

    def __init__(self, A0: MatrixField, x_range: tuple[float, float], x0: float = 0.0, tol: float = 1e-8):
        self.A0 = A0
        self.x_range = (float(x_range[0]), float(x_range[1]))
        self.x0 = float(np.clip(x0, *self.x_range))
        vals, R0, _ = _sorted_eig(np.asarray(A0(self.x0)))
        self.groups = group_eigenvalues(vals, tol * (1.0 + np.max(np.abs(vals))))
        if np.allclose(R0.imag, 0.0):
            R0 = R0.real
        self.R0 = R0
        self.N = R0.shape[0]
        self.dtype = np.result_type(R0, np.asarray(A0(self.x0)))
        self._solutions = {}
        for side, end in (("-", self.x_range[0]), ("+", self.x_range[1])):
            if end == self.x0:
                continue
            alpha0 = np.concatenate([np.eye(g.size, dtype=self.dtype).ravel() for g in self.groups])
            sol = solve_ivp(
                self._alpha_rhs, (self.x0, end), alpha0,
                method="DOP853", rtol=1e-11, atol=1e-13, dense_output=True,
            )
            if not sol.success:
                raise FrameDegenerationError(f"frame transport failed: {sol.message}")
            self._solutions[side] = sol.sol

    # naive frame R~_j = P_j(x) R_j(x0)
    def naive(self, x: float) -> list[tuple[np.ndarray, np.ndarray]]:
        _, R, L = _sorted_eig(np.asarray(self.A0(x)))
        out = []
        for g in self.groups:
            Rt = R[:, g] @ (L[g] @ self.R0[:, g])
            Lt = np.linalg.solve(L[g] @ Rt, L[g])
            out.append((Rt, Lt))
        return out

    def naive_coupling(self, x: float) -> list[np.ndarray]:
        """L~_j R~_j' for the un-normalized frame."""
        plus = self.naive(x + _NAIVE_STEP)
        minus = self.naive(x - _NAIVE_STEP)
        return [
            Lt @ ((rp - rm) / (2 * _NAIVE_STEP))
            for (_, Lt), (rp, _), (rm, _) in zip(self.naive(x), plus, minus)
        ]

    def _alpha_rhs(self, x: float, y: np.ndarray) -> np.ndarray:
        out = np.empty_like(y)
        k = 0
        for g, C in zip(self.groups, self.naive_coupling(x)):
            m = g.size
            alpha = y[k : k + m * m].reshape(m, m)
            out[k : k + m * m] = (-C @ alpha).ravel()
            k += m * m
        return out

    def alphas(self, x: float) -> list[np.ndarray]:
        if x == self.x0:
            return [np.eye(g.size, dtype=self.dtype) for g in self.groups]
        y = self._solutions["+" if x > self.x0 else "-"](x)
        out, k = [], 0
        for g in self.groups:
            m = g.size
            out.append(y[k : k + m * m].reshape(m, m))
            k += m * m
        return out

    def blocks(self, x: float) -> list[tuple[np.ndarray, np.ndarray]]:
        out = []
        for (Rt, Lt), alpha in zip(self.naive(x), self.alphas(x)):
            if abs(np.linalg.det(alpha)) < 1e-8:
                raise FrameDegenerationError(f"det(alpha) vanishes near x={x:.4g}")
            out.append((Rt @ alpha, np.linalg.solve(alpha, Lt)))
        return out

    def right(self, x: float) -> np.ndarray:
        """T0(x): block columns R_j side by side."""
        return np.hstack([R for R, _ in self.blocks(x)])

    def left(self, x: float) -> np.ndarray:
        return np.vstack([L for _, L in self.blocks(x)])

    def residual(self, xs) -> float:
        """max_x |L_j R_j'| relative to max |R_j'|."""
        worst, scale = 0.0, 0.0
        for x in np.atleast_1d(xs):
            dT = five_point(self.right, float(x))
            Tinv = self.left(float(x))
            start = 0
            for g in self.groups:
                cols = slice(start, start + g.size)
                worst = max(worst, float(np.max(np.abs(Tinv[cols] @ dT[:, cols]))))
                scale = max(scale, float(np.max(np.abs(dT[:, cols]))))
                start += g.size
        return worst / scale if scale > 0 else worst


def goodman_frame(A0: MatrixField, x_range: tuple[float, float], x0: float = 0.0) -> GoodmanFrame:
    frame = GoodmanFrame(A0, x_range, x0)
    logger.debug("goodman frame on %s with block sizes %s", frame.x_range, [g.size for g in frame.groups])
    return frame


@dataclass
class DiagonalizationStage:
    """T = T0 + eps T1 and D = D0 + eps D1 sampled on x."""

    eps: float
    x: np.ndarray
    groups: list[np.ndarray]
    T0: np.ndarray
    T1: np.ndarray
    D0: np.ndarray
    D1: np.ndarray
    residual: float
    order: int = 1


def _block_mask(groups: list[np.ndarray], N: int) -> np.ndarray:
    mask = np.zeros((N, N), dtype=bool)
    for g in groups:
        mask[np.ix_(g, g)] = True
    return mask


class _FirstOrder:
    def __init__(self, A0: MatrixField, A1: MatrixField, frame: GoodmanFrame):
        self.A0, self.A1, self.frame = A0, A1, frame
        # groups are consecutive runs of the sorted spectrum
        self.mask = _block_mask(frame.groups, frame.N)
        self.slices = [slice(int(g[0]), int(g[-1]) + 1) for g in frame.groups]

    def terms(self, x: float) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        T0 = self.frame.right(x)
        T0inv = self.frame.left(x)
        dT0 = five_point(self.frame.right, x)
        D0_full = T0inv @ np.asarray(self.A0(x)) @ T0
        F1 = T0inv @ np.asarray(self.A1(x)) @ T0 - T0inv @ dT0
        D0 = np.where(self.mask, D0_full, 0.0)
        D1 = np.where(self.mask, F1, 0.0)
        X = np.zeros_like(F1)
        for k, sk in enumerate(self.slices):
            for l, sl in enumerate(self.slices):
                if k != l:
                    X[sk, sl] = sylvester(D0[sk, sk], D0[sl, sl], -F1[sk, sl]).X
        return T0, T0 @ X, D0, D1

    def transform(self, x: float, eps: float) -> np.ndarray:
        T0, T1, _, _ = self.terms(x)
        return T0 + eps * T1


def block_diagonalize(
    A0: MatrixField,
    A1: MatrixField,
    eps: float,
    frame: GoodmanFrame | None = None,
    x=None,
) -> DiagonalizationStage:
    """First-order diagonalizing transform; residual is the off-diagonal remainder (order eps^2)."""
    xs = np.linspace(-1.0, 1.0, 11) if x is None else np.atleast_1d(np.asarray(x, dtype=float))
    if frame is None:
        frame = goodman_frame(A0, (float(xs.min()) - 0.1, float(xs.max()) + 0.1), x0=0.0)
    stage = _FirstOrder(A0, A1, frame)
    T0s, T1s, D0s, D1s = [], [], [], []
    worst = 0.0
    for xi in xs:
        T0, T1, D0, D1 = stage.terms(float(xi))
        T0s.append(T0)
        T1s.append(T1)
        D0s.append(D0)
        D1s.append(D1)
        T = T0 + eps * T1
        dT = five_point(lambda z: stage.transform(z, eps), float(xi))
        Tinv = np.linalg.inv(T)
        rem = Tinv @ (np.asarray(A0(xi)) + eps * np.asarray(A1(xi))) @ T - eps * Tinv @ dT
        worst = max(worst, float(np.max(np.abs(np.where(stage.mask, 0.0, rem)))))
    logger.debug("block diagonalization eps=%.3g residual=%.3e", eps, worst)
    return DiagonalizationStage(
        eps=float(eps),
        x=xs,
        groups=frame.groups,
        T0=np.array(T0s),
        T1=np.array(T1s),
        D0=np.array(D0s),
        D1=np.array(D1s),
        residual=worst,
    )
