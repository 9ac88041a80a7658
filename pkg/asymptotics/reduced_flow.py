"""First-order expansion of the perturbed reduced flow zeta' = (eta M(z) + delta Theta(z)) zeta."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp, trapezoid

from core.errors import FlowDecayError

logger = logging.getLogger(__name__)

BlockFn = Callable[[float], np.ndarray]

_DECAY_CONSTANT = 10.0


@dataclass
class ReducedFlow:
    x: float
    y: float
    delta: float
    eta: float
    F: np.ndarray  # unperturbed flow F^{y -> x}
    E: np.ndarray  # first-order correction
    approx: np.ndarray  # F + (delta / eta) E

    def error(self, exact: np.ndarray) -> float:
        return float(np.max(np.abs(self.approx - exact)))


def _as_block(fn: BlockFn, z: float) -> np.ndarray:
    return np.atleast_2d(np.asarray(fn(z), dtype=float))


def _flows(M: BlockFn, eta: float, y: float, x: float, steps: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes z_k and fundamental matrices Phi(z_k) = F^{y -> z_k}."""
    m = _as_block(M, y).shape[0]
    z = np.linspace(y, x, steps + 1)

    def rhs(t, p):
        return (eta * _as_block(M, t) @ p.reshape(m, m)).ravel()

    sol = solve_ivp(rhs, (y, x), np.eye(m).ravel(), t_eval=z, method="DOP853", rtol=1e-12, atol=1e-14)
    return z, sol.y.T.reshape(-1, m, m)


def _check_decay(phi: np.ndarray) -> None:
    """|F^{z_j -> z_k}| must stay below a fixed constant for z_k past z_j."""
    norms = np.linalg.norm(phi, ord=2, axis=(1, 2))
    sample = np.unique(np.linspace(0, phi.shape[0] - 1, 17).astype(int))
    for j in sample:
        inv = np.linalg.inv(phi[j])
        growth = np.linalg.norm(phi[j:] @ inv, ord=2, axis=(1, 2))
        if np.max(growth) > _DECAY_CONSTANT:
            raise FlowDecayError(f"flow grows by {np.max(growth):.3g} (|F| range {norms.min():.3g}..{norms.max():.3g})")


def reduced_flow_first_order(
    M: BlockFn,
    Theta: BlockFn,
    delta: float,
    eta: float,
    y: float,
    x: float,
    *,
    steps: int = 2000,
) -> ReducedFlow:
    """F + (delta/eta) E with E = eta int_y^x F^{z->x} Theta(z) F^{y->z} dz."""
    z, phi = _flows(M, eta, y, x, steps)
    _check_decay(phi)
    F = phi[-1]
    phi_inv = np.linalg.inv(phi)
    theta = np.array([_as_block(Theta, zk) for zk in z])
    integrand = F @ phi_inv @ theta @ phi
    E = eta * trapezoid(integrand, z, axis=0)
    logger.debug("reduced flow y=%.3g x=%.3g: |F|=%.4g |E|=%.4g", y, x, np.linalg.norm(F), np.linalg.norm(E))
    return ReducedFlow(x=x, y=y, delta=delta, eta=eta, F=F, E=E, approx=F + (delta / eta) * E)


def direct_flow(M: BlockFn, Theta: BlockFn, delta: float, eta: float, y: float, x: float) -> np.ndarray:
    """Flow of zeta' = (eta M + delta Theta) zeta from y to x."""
    m = _as_block(M, y).shape[0]

    def rhs(t, p):
        return ((eta * _as_block(M, t) + delta * _as_block(Theta, t)) @ p.reshape(m, m)).ravel()

    sol = solve_ivp(rhs, (y, x), np.eye(m).ravel(), method="DOP853", rtol=1e-12, atol=1e-14)
    return sol.y[:, -1].reshape(m, m)
