"""Profile-interpolated coefficients A(x) - s and Q(x) + shift on a refined node grid."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import TYPE_CHECKING

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from core.errors import HyperbolicityError
from core.linalg import interp_rows, real_eigensystem
from models.base import jacobians

if TYPE_CHECKING:
    from core.state import ShockProfile

logger = logging.getLogger(__name__)

REFINE = 4


@dataclass
class CharacteristicFields:
    """Eigen-data of A(x) - s on the node grid, columns ordered by speed."""

    speeds: np.ndarray  # (len, N)
    right: np.ndarray  # (len, N, N), columns r_j
    left: np.ndarray  # (len, N, N), rows l_j^T
    eta: np.ndarray  # (len, N, N), -L Q R
    groups: list[np.ndarray]


class ProfileCoefficients:
    """Coefficients of the linearized operator sampled every dx/4.

    The nodes include every profile grid point, so RK4 at step dx/2 only
    evaluates coefficients on nodes.
    """

    def __init__(self, profile: ShockProfile, refine: int = REFINE):
        model = profile.model
        self.profile = profile
        self.n, self.r, self.N = model.n, model.r, model.N
        self.s = profile.shock.s
        self.shift = profile.spectral_shift
        self.spacing = profile.dx / refine
        count = (profile.x.size - 1) * refine + 1
        self.x = np.linspace(profile.x[0], profile.x[-1], count)

        spline = CubicHermiteSpline(profile.x, profile.state, profile.dstate, axis=0)
        self.W = spline(self.x)
        eye = np.eye(self.N)
        A = np.empty((count, self.N, self.N))
        Q = np.empty((count, self.N, self.N))
        for i, w in enumerate(self.W):
            A[i], Q[i] = jacobians(model, w[: self.n], w[self.n :], check=False)
        self.A = A - self.s * eye
        self.Q = Q + self.shift * eye
        cond = np.linalg.cond(self.A)
        if np.max(cond) > 1e12:
            bad = self.x[int(np.argmax(cond))]
            raise HyperbolicityError(f"A(x) - s is singular near x={bad:.4g}")
        self.Ainv = np.linalg.inv(self.A)
        self.QAinv = self.Q @ self.Ainv
        self.constant = bool(np.allclose(self.A, self.A[0]) and np.allclose(self.Q, self.Q[0]))
        logger.debug("coefficients on %d nodes (constant=%s)", count, self.constant)

    def limit(self, side: str) -> tuple[np.ndarray, np.ndarray]:
        """Exact (A - s, Q + shift) at the endstate on `side`."""
        model = self.profile.model
        u, v = self.profile.shock.endstate(side)
        A, Q = jacobians(model, u, v)
        eye = np.eye(self.N)
        return A - self.s * eye, Q + self.shift * eye

    def node(self, x: float) -> int:
        """Index of the node at x (x must lie on the node grid)."""
        i = int(round((x - self.x[0]) / self.spacing))
        return min(max(i, 0), self.x.size - 1)

    def at(self, xq) -> tuple[np.ndarray, np.ndarray]:
        """(A - s, Q + shift) at xq by linear interpolation between nodes; limits beyond."""
        xq = np.asarray(xq, dtype=float)
        A = interp_rows(xq, self.x, self.A)
        Q = interp_rows(xq, self.x, self.Q)
        for side, mask in (("-", xq < self.x[0]), ("+", xq > self.x[-1])):
            if np.any(mask):
                A_lim, Q_lim = self.limit(side)
                A = np.where(mask[..., None, None], A_lim, A)
                Q = np.where(mask[..., None, None], Q_lim, Q)
        return A, Q

    def coefficient_matrix(self, lam: complex, xq) -> np.ndarray:
        """Z-form matrix (Q - lam) A^{-1} at xq."""
        A, Q = self.at(xq)
        return np.linalg.solve(np.swapaxes(A, -1, -2), np.swapaxes(Q - lam * np.eye(self.N), -1, -2)).swapaxes(-1, -2)

    @cached_property
    def fields(self) -> CharacteristicFields:
        """Eigen-decomposition of A(x) - s with columns kept sign-continuous in x."""
        count = self.x.size
        speeds = np.empty((count, self.N))
        right = np.empty((count, self.N, self.N))
        left = np.empty((count, self.N, self.N))
        groups: list[np.ndarray] = []
        for i in range(count):
            eig = real_eigensystem(self.A[i], what=f"A(x={self.x[i]:.4g})")
            R = eig.right
            if i > 0:
                flip = np.sign(np.einsum("ij,ij->j", R, right[i - 1]))
                flip[flip == 0] = 1.0
                R = R * flip
            speeds[i] = eig.values
            right[i] = R
            left[i] = np.linalg.inv(R)
            if i == 0:
                groups = eig.groups
        eta = -left @ self.Q @ right
        return CharacteristicFields(speeds=speeds, right=right, left=left, eta=eta, groups=groups)
