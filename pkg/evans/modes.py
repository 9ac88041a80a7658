"""Eigenvalue-ODE coefficients and asymptotic mode expansions at the endstates."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from core.errors import SpectralSplittingError
from core.linalg import match_branches
from core.state import ShockData, ShockProfile
from models.base import RelaxationModel, jacobians
from models.equilibrium import mode_data

logger = logging.getLogger(__name__)

Regime = Literal["exact", "high-frequency", "low-frequency"]


def coefficient_matrix(profile: ShockProfile, lam: complex, x, form: Literal["Z", "W"] = "Z") -> np.ndarray:
    """Z-form (Q - lam) A^{-1} or W-form A^{-1} (Q - lam) at x."""
    coeffs = profile.coefficients
    if form == "Z":
        return coeffs.coefficient_matrix(lam, x)
    A, Q = coeffs.at(x)
    return np.linalg.solve(A, Q - lam * np.eye(coeffs.N))


def limit_matrices(model: RelaxationModel, shock: ShockData, side: str, shift: float = 0.0):
    """(A - s, Q + shift) at an endstate."""
    A, Q = jacobians(model, *shock.endstate(side))
    eye = np.eye(model.N)
    return A - shock.s * eye, Q + shift * eye


def limit_roots(A: np.ndarray, Q: np.ndarray, lams) -> tuple[np.ndarray, np.ndarray]:
    """Roots mu and unit vectors V of (-mu A + Q - lam) V = 0, ascending in Re mu.

    Batched over lams: returns mu (L, N) and V (L, N, N).
    """
    lams = np.atleast_1d(np.asarray(lams, dtype=complex))
    N = A.shape[0]
    M = np.linalg.solve(A, Q)[None] - lams[:, None, None] * np.linalg.inv(A)[None]
    mu, V = np.linalg.eig(M)
    order = np.argsort(mu.real + 1e-300 * mu.imag, axis=1, kind="stable")
    mu = np.take_along_axis(mu, order, axis=1)
    V = np.take_along_axis(V, order[:, None, :].repeat(N, axis=1), axis=2)
    V = V / np.linalg.norm(V, axis=1, keepdims=True)
    return mu, V


def stable_count(A: np.ndarray, Q: np.ndarray, lam_ref: float) -> int:
    """k: number of roots with Re mu < 0 at the + endstate for a real reference lambda."""
    mu, _ = limit_roots(A, Q, [lam_ref])
    return int(np.sum(mu[0].real < 0))


def check_splitting(mu: np.ndarray, k: int, lams: np.ndarray, what: str) -> None:
    """Raise when Re mu_k and Re mu_{k+1} meet (no gap between the selected groups)."""
    if k <= 0 or k >= mu.shape[1]:
        return
    gap = mu[:, k].real - mu[:, k - 1].real
    tol = 1e-8 * (1.0 + np.abs(lams))
    bad = gap <= tol
    if np.any(bad):
        lam = lams[int(np.argmax(bad))]
        raise SpectralSplittingError(f"{what}: selected roots meet unselected ones at lambda={lam:.6g}")


@dataclass
class ModeExpansion:
    lam: complex
    side: str
    regime: Regime
    mu: np.ndarray  # exact roots, ascending real part
    V: np.ndarray  # columns
    k: int  # roots with Re mu < 0
    predicted: np.ndarray | None = None  # matched to mu
    residual: float = float("nan")  # max |(-mu A + Q - lam) V|
    error: float = float("nan")  # max |mu - predicted| over predicted entries
    fast: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=complex))

    @property
    def stable(self) -> np.ndarray:
        return self.mu[: self.k]

    @property
    def unstable(self) -> np.ndarray:
        return self.mu[self.k :]


def mode_expansion(
    model: RelaxationModel,
    shock: ShockData,
    lam: complex,
    side: str,
    regime: Regime = "exact",
    *,
    shift: float = 0.0,
) -> ModeExpansion:
    """Exact roots of (-mu A + Q - lam) V = 0 plus the regime's predicted values."""
    A, Q = limit_matrices(model, shock, side, shift)
    mu, V = limit_roots(A, Q, [lam])
    mu, V = mu[0], V[0]
    gaps = np.abs(mu[:, None] - mu[None, :])
    np.fill_diagonal(gaps, np.inf)
    # eig splits a defective pair by O(sqrt(eps))
    if gaps.min() <= 1e-6 * (1.0 + abs(lam)):
        raise SpectralSplittingError(f"roots coalesce at lambda={lam}")
    residual = float(np.max(np.abs(np.einsum("ij,jk->ik", Q - lam * np.eye(model.N), V) - A @ V * mu[None, :])))
    out = ModeExpansion(
        lam=complex(lam), side=side, regime=regime, mu=mu, V=V,
        k=int(np.sum(mu.real < 0)), residual=residual,
    )
    if regime == "exact":
        return out

    md = mode_data(model, shock.endstate(side)[0], shock.s)
    if regime == "high-frequency":
        pred = []
        for fam in md.families:
            etas = np.linalg.eigvals(np.atleast_2d(fam.eta)) - shift
            pred.extend(-lam / fam.speed - etas / fam.speed)
        pred = np.asarray(pred, dtype=complex)
        perm = match_branches(pred, mu)
        out.predicted = np.empty_like(mu)
        out.predicted[perm] = pred
        out.error = float(np.max(np.abs(mu - out.predicted)))
        return out

    # low frequency: n slow roots from the equilibrium expansion, r fast roots at lam = 0
    eq = md.equilibrium
    slow = []
    for group, beta in zip(eq.groups, md.beta):
        a_star = float(np.mean(eq.speeds[group])) - shock.s
        for b in np.linalg.eigvals(beta):
            slow.append(-lam / a_star + lam**2 * b / a_star**3)
    slow = np.asarray(slow, dtype=complex)
    mu0, _ = limit_roots(A, Q, [0.0])
    fast = mu0[0][np.abs(mu0[0]) > 1e-10]
    out.fast = fast
    pred = np.concatenate([slow, fast])
    perm = match_branches(pred, mu)
    out.predicted = np.empty_like(mu)
    out.predicted[perm] = pred
    # only the slow prediction carries lambda dependence
    slow_pos = perm[: slow.size]
    out.error = float(np.max(np.abs(mu[slow_pos] - slow)))
    logger.debug("mode expansion side=%s lam=%s regime=%s error=%.3e", side, lam, regime, out.error)
    return out
