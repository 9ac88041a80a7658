"""Time-step kernels: grid-aligned characteristic transport, relaxation source, upwind fluxes."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from core.errors import SimulationError
from core.linalg import real_eigensystem
from models.base import RelaxationModel

logger = logging.getLogger(__name__)

_SHIFT_TOL = 1e-9


@dataclass
class ExactTransport:
    """Constant-A transport, exact when every a_k dt / dx is an integer."""

    speeds: np.ndarray
    right: np.ndarray
    left: np.ndarray
    shifts: np.ndarray  # cells moved per step, one per family
    dt: float

    @classmethod
    def build(cls, A: np.ndarray, dx: float) -> ExactTransport | None:
        """None when the speeds cannot all be grid-aligned with one dt."""
        eig = real_eigensystem(A, what="transport matrix")
        speeds, R, L = eig.values, eig.right, eig.left
        top = float(np.max(np.abs(speeds)))
        if top == 0.0:
            raise SimulationError("transport matrix vanishes: no CFL step")
        dt = dx / top
        ratio = speeds * dt / dx
        shifts = np.rint(ratio)
        if np.max(np.abs(ratio - shifts)) > _SHIFT_TOL:
            return None
        return cls(speeds=speeds, right=R, left=L, shifts=shifts.astype(int), dt=dt)

    def step(self, U: np.ndarray, inflow_left: np.ndarray, inflow_right: np.ndarray) -> np.ndarray:
        """Shift characteristic variables; cells entering from the edges take the inflow states."""
        W = U @ self.left.T
        W_left = self.left @ inflow_left
        W_right = self.left @ inflow_right
        out = np.empty_like(W)
        for k, shift in enumerate(self.shifts):
            column = W[:, k]
            if shift > 0:
                out[shift:, k] = column[:-shift]
                out[:shift, k] = W_left[k]
            elif shift < 0:
                out[:shift, k] = column[-shift:]
                out[shift:, k] = W_right[k]
            else:
                out[:, k] = column
        return out @ self.right.T


def linear_source(U: np.ndarray, Q: np.ndarray, h: float) -> np.ndarray:
    """U + hQU + (hQ)^2 U / 2 with Q of shape (S, N, N); second-order Taylor/RK2 for U' = QU."""
    QU = np.einsum("sab,sb->sa", Q, U)
    QQU = np.einsum("sab,sb->sa", Q, QU)
    return U + h * QU + 0.5 * h * h * QQU


def pointwise(model: RelaxationModel, fn, W: np.ndarray) -> np.ndarray:
    """fn(u, v) at every row of W; Jin-Xin callables are vectorized, custom ones are looped."""
    n = model.n
    if model.kind == "jin-xin":
        return np.asarray(fn(W[:, :n].T, W[:, n:].T), dtype=float).T
    return np.stack([np.atleast_1d(np.asarray(fn(row[:n], row[n:]), dtype=float)) for row in W])


def nonlinear_source(model: RelaxationModel, W: np.ndarray, h: float) -> np.ndarray:
    """Explicit midpoint on v' = q(u, v), u frozen."""
    n = model.n

    def rate(state: np.ndarray) -> np.ndarray:
        out = np.zeros_like(state)
        out[:, n:] = pointwise(model, model.q, state)
        return out

    mid = W + 0.5 * h * rate(W)
    return W + h * rate(mid)


def split_flux_matrices(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """A^+ = R max(a, 0) L and A^- = R min(a, 0) L at every node of A (S, N, N)."""
    plus = np.empty_like(A)
    minus = np.empty_like(A)
    for i in range(A.shape[0]):
        eig = real_eigensystem(A[i], what="transport matrix")
        plus[i] = (eig.right * np.maximum(eig.values, 0.0)) @ eig.left
        minus[i] = (eig.right * np.minimum(eig.values, 0.0)) @ eig.left
    return plus, minus


def upwind_step(
    U: np.ndarray,
    A_plus: np.ndarray,
    A_minus: np.ndarray,
    dt: float,
    dx: float,
    inflow_left: np.ndarray,
    inflow_right: np.ndarray,
) -> np.ndarray:
    """Flux-vector-split upwind step for U_t + (A(x) U)_x = 0.

    F_{j+1/2} = A^+_j U_j + A^-_{j+1} U_{j+1}; ghost cells hold the inflow states.
    """
    pos = np.einsum("sab,sb->sa", A_plus, U)
    neg = np.einsum("sab,sb->sa", A_minus, U)
    pos_ghost = A_plus[0] @ inflow_left
    neg_ghost = A_minus[-1] @ inflow_right
    faces = pos[:-1] + neg[1:]
    left_face = np.vstack([(pos_ghost + neg[0])[None], faces])
    right_face = np.vstack([faces, (pos[-1] + neg_ghost)[None]])
    return U - (dt / dx) * (right_face - left_face)


def rusanov_step(
    model: RelaxationModel,
    W: np.ndarray,
    s: float,
    speed: float,
    dt: float,
    dx: float,
    inflow_left: np.ndarray,
    inflow_right: np.ndarray,
) -> np.ndarray:
    """Local Lax-Friedrichs step for W_t + (F(W) - sW)_x = 0, F = (f, g)."""
    padded = np.vstack([inflow_left[None], W, inflow_right[None]])
    flux = np.hstack([pointwise(model, model.f, padded), pointwise(model, model.g, padded)]) - s * padded
    face = 0.5 * (flux[:-1] + flux[1:]) - 0.5 * speed * (padded[1:] - padded[:-1])
    return W - (dt / dx) * (face[1:] - face[:-1])
