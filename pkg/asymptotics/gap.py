"""Gap-Lemma construction of a solution W = e^{mu x} V(x) with V -> V^- as x -> -infinity."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from core.errors import ConvergenceError, SpectralSplittingError
from core.linalg import linear_fit

logger = logging.getLogger(__name__)

ALPHA_LOW = 0.45
ALPHA_HIGH = 0.9
_SPLIT = 0.5 * (ALPHA_LOW + ALPHA_HIGH)
_MAX_ITER = 100
_TOL = 1e-10
_TAIL_LENGTHS = 32.0


@dataclass
class GapSolution:
    lam: complex
    mu: complex
    V_minus: np.ndarray
    M: float
    alpha: float
    x: np.ndarray
    V: np.ndarray  # (len, N), V(x) = e^{-mu x} W(x)
    history: list[float] = field(default_factory=list)
    contraction: float = float("nan")
    fitted_rate: float = float("nan")
    residual: float = float("nan")

    @property
    def W(self) -> np.ndarray:
        return np.exp(self.mu * self.x)[:, None] * self.V


def _weights(kappa: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
    """(a, b) with int_0^h e^{kappa (h - t)} [g0 (1 - t/h) + g1 t/h] dt = a g0 + b g1."""
    z = kappa * h
    small = np.abs(z) < 1e-2
    zs = np.where(small, 0.0, z)
    ks = np.where(small, 1.0, kappa)
    phi = np.where(small, h * (1 + z / 2 + z**2 / 6 + z**3 / 24 + z**4 / 120), np.expm1(zs) / ks)
    psi = np.where(
        small,
        h * (0.5 + z / 6 + z**2 / 24 + z**3 / 120 + z**4 / 720),
        (np.expm1(zs) - zs) / (ks * np.where(small, 1.0, zs)),
    )
    return phi - psi, psi


def _forward(kappa: np.ndarray, g: np.ndarray, h: float) -> np.ndarray:
    """I(x_k) = int_{x_0}^{x_k} e^{kappa (x_k - y)} g(y) dy, piecewise-linear g."""
    a, b = _weights(kappa, h)
    decay = np.exp(kappa * h)
    out = np.zeros_like(g)
    for k in range(1, g.shape[0]):
        out[k] = decay * out[k - 1] + a * g[k - 1] + b * g[k]
    return out


def _backward(kappa: np.ndarray, g: np.ndarray, h: float) -> np.ndarray:
    """J(x_k) = int_{x_k}^{x_end} e^{kappa (x_k - y)} g(y) dy."""
    a, b = _weights(-kappa, h)
    decay = np.exp(-kappa * h)
    out = np.zeros_like(g)
    for k in range(g.shape[0] - 2, -1, -1):
        out[k] = decay * out[k + 1] + a * g[k + 1] + b * g[k]
    return out


def estimate_decay_rate(coeff: Callable[[float], np.ndarray], limit: np.ndarray, window=(-60.0, -20.0)) -> float:
    """Exponential rate alpha of |coeff(x) - limit| as x -> -infinity."""
    xs = np.linspace(window[0], window[1], 21)
    gaps = np.array([np.linalg.norm(np.asarray(coeff(x)) - limit) for x in xs])
    keep = gaps > 1e-15
    if keep.sum() < 3:
        return math.inf
    return linear_fit(xs[keep], np.log(gaps[keep])).slope


def gap_basis(
    coeff: Callable[[float], np.ndarray],
    limit: np.ndarray,
    target: tuple[complex, np.ndarray],
    M: float = 5.0,
    x_range: tuple[float, float] | None = None,
    *,
    alpha: float | None = None,
    h: float = 0.01,
    lam: complex = 0.0,
) -> GapSolution:
    """Fixed-point solution on (-infinity, -M] extended by RK4 to x_range[1].

    coeff(x) is the matrix of W' = coeff(x) W and tends to `limit`
    exponentially; target = (mu, V^-) is an eigenpair of `limit`.
    """
    mu, V_minus = complex(target[0]), np.asarray(target[1], dtype=complex)
    limit = np.asarray(limit, dtype=complex)
    alpha = estimate_decay_rate(coeff, limit) if alpha is None else alpha
    nu, S = np.linalg.eig(limit)
    if np.linalg.cond(S) > 1e12:
        raise SpectralSplittingError("limiting matrix is not diagonalizable")
    Sinv = np.linalg.inv(S)
    kappa = nu - mu
    if not np.isfinite(alpha):
        # constant coefficients: V = V^- solves the equation exactly
        x_end = 0.0 if x_range is None else x_range[1]
        x = np.arange(-M, x_end + 0.5 * h, h)
        return GapSolution(
            lam=lam, mu=mu, V_minus=V_minus, M=M, alpha=alpha, x=x, V=np.tile(V_minus, (x.size, 1)),
            history=[0.0], contraction=0.0, fitted_rate=math.inf, residual=0.0,
        )
    p_mask = kappa.real < _SPLIT * alpha
    c_minus = Sinv @ V_minus

    def grid(M_: float) -> np.ndarray:
        x_far = -M_ - _TAIL_LENGTHS / alpha if x_range is None else min(x_range[0], -M_ - 1.0)
        count = int(math.ceil((-M_ - x_far) / h))
        return np.linspace(-M_ - count * h, -M_, count + 1)

    def bound(xs: np.ndarray, B_norm: np.ndarray) -> float:
        kr = kappa.real
        fwd = _forward(kr[p_mask], np.tile(B_norm[:, None], (1, int(p_mask.sum()))), h) if p_mask.any() else 0.0
        bwd = _backward(kr[~p_mask], np.tile(B_norm[:, None], (1, int((~p_mask).sum()))), h) if (~p_mask).any() else 0.0
        return float(max(np.max(fwd, initial=0.0), np.max(bwd, initial=0.0))) * float(np.linalg.cond(S))

    # enlarge M until the fixed-point map contracts by 1/2
    while True:
        xs = grid(M)
        B = np.einsum("ij,kjl,lm->kim", Sinv, np.array([np.asarray(coeff(x), dtype=complex) for x in xs]) - limit, S)
        contraction = bound(xs, np.linalg.norm(B, ord=2, axis=(1, 2)))
        if contraction < 0.5:
            break
        if M > 1e3 / alpha:
            raise ConvergenceError(f"no contracting M found (bound {contraction:.3g})")
        M += max(2.0, 1.0 / alpha)
        logger.debug("gap_basis: enlarging M to %.4g (bound %.3g)", M, contraction)

    c = np.tile(c_minus, (xs.size, 1))
    history: list[float] = []
    for it in range(_MAX_ITER):
        g = np.einsum("kij,kj->ki", B, c)
        new = np.empty_like(c)
        new[:, p_mask] = c_minus[p_mask] + _forward(kappa[p_mask], g[:, p_mask], h)
        new[:, ~p_mask] = -_backward(kappa[~p_mask], g[:, ~p_mask], h)
        diff = float(np.max(np.abs(new - c))) / max(float(np.max(np.abs(c_minus))), 1e-300)
        history.append(diff)
        c = new
        if diff <= _TOL:
            break
    else:
        raise ConvergenceError(f"gap_basis did not converge in {_MAX_ITER} iterations")
    V_far = c @ S.T

    # extend by RK4 on V' = (coeff - mu) V
    x_end = 0.0 if x_range is None else x_range[1]
    steps = int(round((x_end + M) / h))
    x_ext = -M + h * np.arange(steps + 1)
    V_ext = np.empty((steps + 1, V_minus.size), dtype=complex)
    V_ext[0] = V_far[-1]
    eye = np.eye(V_minus.size)

    def f(x, v):
        return (np.asarray(coeff(x), dtype=complex) - mu * eye) @ v

    for k in range(steps):
        x0, v = x_ext[k], V_ext[k]
        k1 = f(x0, v)
        k2 = f(x0 + h / 2, v + h / 2 * k1)
        k3 = f(x0 + h / 2, v + h / 2 * k2)
        k4 = f(x0 + h, v + h * k3)
        V_ext[k + 1] = v + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)

    x = np.concatenate([xs, x_ext[1:]])
    V = np.vstack([V_far, V_ext[1:]])
    dist = np.max(np.abs(V_far - V_minus), axis=1)
    keep = dist > 1e-14 * np.max(np.abs(V_minus))
    rate = linear_fit(xs[keep], np.log(dist[keep])).slope if keep.sum() > 2 else math.inf
    residual = _ode_residual(coeff, mu, x_ext, V_ext, h) if steps >= 4 else 0.0
    logger.debug(
        "gap_basis: M=%.4g, %d iterations, contraction %.3g, fitted rate %.4g", M, len(history), contraction, rate
    )
    return GapSolution(
        lam=lam, mu=mu, V_minus=V_minus, M=M, alpha=alpha, x=x, V=V,
        history=history, contraction=contraction, fitted_rate=rate, residual=residual,
    )


def _ode_residual(coeff, mu, x, V, h) -> float:
    """max |V' - (coeff - mu) V| on [-M, x_end], V' from the five-point stencil, relative to max |V|."""
    dV = (V[:-4] - 8 * V[1:-3] + 8 * V[3:-1] - V[4:]) / (12 * h)
    eye = np.eye(V.shape[1])
    rhs = np.array([(np.asarray(coeff(xk), dtype=complex) - mu * eye) @ v for xk, v in zip(x[2:-2], V[2:-2])])
    return float(np.max(np.abs(dV - rhs)) / np.max(np.abs(V)))
