"""Traveling-wave profiles of relaxation shocks."""

from __future__ import annotations

import logging
import math

import numpy as np
from scipy.integrate import solve_ivp

from config import settings
from core.errors import ClassificationError, ProfileError
from core.linalg import linear_fit
from core.state import ShockData, ShockProfile, uniform_grid
from models.base import RelaxationModel, jacobians
from models.equilibrium import rest_point_rates

logger = logging.getLogger(__name__)

_IVP = {"method": "DOP853", "rtol": 1e-12, "atol": 1e-14}
_SEED_OFFSET = 1e-7
_BLOWUP = 1e6
_ANGLE_SAMPLES = 24


def predicted_rates(model: RelaxationModel, shock: ShockData) -> tuple[float, float]:
    """Slowest tail rates: unstable at -infinity, stable at +infinity."""
    rm = rest_point_rates(model, shock.u_minus, shock.v_minus, shock.s).real
    rp = rest_point_rates(model, shock.u_plus, shock.v_plus, shock.s).real
    unstable = rm[rm > 0]
    stable = -rp[rp < 0]
    if unstable.size == 0 or stable.size == 0:
        raise ProfileError("endstates admit no connecting orbit (no unstable/stable rest-point directions)")
    return float(unstable.min()), float(stable.min())


def default_halfwidth(model: RelaxationModel, shock: ShockData, dx: float) -> float:
    nu_min = min(predicted_rates(model, shock))
    X = max(settings.profile_min_halfwidth, settings.profile_decay_lengths / nu_min)
    return math.ceil(X / dx) * dx


def solve_profile(
    model: RelaxationModel,
    shock: ShockData,
    X: float | None = None,
    dx: float | None = None,
) -> ShockProfile:
    """Solve for (u, v)(x) joining the endstates with u_1(0) at the endstate midpoint."""
    if shock.is_constant:
        raise ClassificationError("constant state u+ = u- is not a shock")
    dx = settings.profile_dx if dx is None else dx
    X = default_halfwidth(model, shock, dx) if X is None else X
    x = uniform_grid(X, dx)
    if model.kind == "jin-xin":
        W = _jin_xin_profile(model, shock, x)
    else:
        W = _shoot_profile(model, shock, x)
    dW = np.array([_rhs(model, shock, w) for w in W])
    n = model.n
    profile = ShockProfile(
        model=model,
        shock=shock,
        x=x,
        u=W[:, :n],
        v=W[:, n:],
        du=dW[:, :n],
        dv=dW[:, n:],
    )
    fits = fit_tails(profile)
    profile.nu_minus, profile.r2_minus = fits["-"]
    profile.nu_plus, profile.r2_plus = fits["+"]
    logger.info(
        "Profile solved for %s on [-%.4g, %.4g] (dx=%.3g): nu-=%.5g nu+=%.5g",
        model.name, X, X, dx, profile.nu_minus, profile.nu_plus,
    )
    return profile


def _rhs(model: RelaxationModel, shock: ShockData, w: np.ndarray) -> np.ndarray:
    """W' = (A(W) - s)^{-1} (0, q(W))."""
    u, v = w[: model.n], w[model.n :]
    A, _ = jacobians(model, u, v, check=False)
    src = np.concatenate([np.zeros(model.n), np.atleast_1d(model.q(u, v))])
    return np.linalg.solve(A - shock.s * np.eye(model.N), src)


def _jin_xin_profile(model: RelaxationModel, shock: ShockData, x: np.ndarray) -> np.ndarray:
    """(a^2 - s^2) u' = h(u) - s u - (h(u-) - s u-), then v from the first integral."""
    if model.n != 1:
        raise ProfileError("built-in Jin-Xin profiles are scalar")
    s = shock.s
    um = float(shock.u_minus[0])
    denom = float(model.a) ** 2 - s**2
    const = float(model.h(um)) - s * um

    def rhs(_, u):
        return (model.h(u) - s * u - const) / denom

    mid = 0.5 * (um + float(shock.u_plus[0]))
    right = x[x >= 0]
    left = x[x <= 0][::-1]
    fwd = solve_ivp(rhs, (0.0, right[-1]), [mid], t_eval=right, **_IVP)
    bwd = solve_ivp(rhs, (0.0, left[-1]), [mid], t_eval=left, **_IVP)
    if not (fwd.success and bwd.success):
        raise ProfileError(f"profile integration failed: {fwd.message or bwd.message}")
    u = np.concatenate([bwd.y[0][::-1][:-1], fwd.y[0]])
    v = float(shock.v_minus[0]) + s * (u - um)
    return np.column_stack([u, v])


def _unstable_directions(model: RelaxationModel, shock: ShockData) -> np.ndarray:
    """Columns spanning the unstable eigenspace of (A - s)^{-1} Q at the left endstate."""
    A, Q = jacobians(model, shock.u_minus, shock.v_minus)
    M = np.linalg.solve(A - shock.s * np.eye(model.N), Q)
    vals, vecs = np.linalg.eig(M)
    keep = vals.real > 1e-12
    if np.any(np.abs(vals[keep].imag) > 1e-12):
        raise ProfileError("spiral rest point at -infinity is not supported")
    return np.real(vecs[:, keep])


def _shoot(model, shock, w0: np.ndarray, x_max: float, mid: float):
    """Integrate from w0 until u_1 crosses mid; returns the crossing state or None."""
    sign = 1.0 if shock.u_plus[0] > shock.u_minus[0] else -1.0

    def phase(_, w):
        return sign * (w[0] - mid)

    phase.terminal = True
    phase.direction = 1.0

    def blowup(_, w):
        return _BLOWUP - np.max(np.abs(w))

    blowup.terminal = True
    sol = solve_ivp(lambda _, w: _rhs(model, shock, w), (0.0, x_max), w0, events=[phase, blowup], **_IVP)
    if sol.t_events[0].size:
        return sol.y_events[0][0]
    return None


def _shoot_profile(model: RelaxationModel, shock: ShockData, x: np.ndarray) -> np.ndarray:
    nu_minus, nu_plus = predicted_rates(model, shock)
    w_minus = np.concatenate([shock.u_minus, shock.v_minus])
    w_plus = np.concatenate([shock.u_plus, shock.v_plus])
    directions = _unstable_directions(model, shock)
    mid = 0.5 * float(shock.u_minus[0] + shock.u_plus[0])
    x_max = (math.log(1.0 / _SEED_OFFSET) + 4.0 * x[-1]) / nu_minus
    toward = np.sign(shock.u_plus[0] - shock.u_minus[0])

    if directions.shape[1] == 1:
        r = directions[:, 0] * (np.sign(directions[0, 0]) * toward or 1.0)
        w_mid = _shoot(model, shock, w_minus + _SEED_OFFSET * r / np.linalg.norm(r), x_max, mid)
        if w_mid is None:
            raise ProfileError("unstable manifold never reaches the phase condition")
        W = _sweep(model, shock, w_mid, x)
    elif directions.shape[1] == 2:
        W = _shoot_on_angle(model, shock, directions, w_minus, mid, x_max, x)
    else:
        raise ProfileError(f"{directions.shape[1]}-dimensional unstable manifold is not supported")

    # the connection is still approaching w+ at rate nu_plus when the grid ends
    tail = 10.0 * float(np.max(np.abs(w_minus - w_plus))) * math.exp(-nu_plus * x[-1])
    miss = float(np.max(np.abs(W[-1] - w_plus)))
    if not np.all(np.isfinite(W)) or miss > tail + 1e3 * settings.shooting_tol + 1e-6:
        raise ProfileError(f"shooting missed the right endstate by {miss:.3e} (tail allowance {tail:.3e})")
    return W


def _sweep(model, shock, w_mid: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Integrate from the phase point to both ends of the grid."""
    right = x[x >= 0]
    left = x[x <= 0][::-1]
    f = lambda _, w: _rhs(model, shock, w)  # noqa: E731
    fwd = solve_ivp(f, (0.0, right[-1]), w_mid, t_eval=right, **_IVP)
    bwd = solve_ivp(f, (0.0, left[-1]), w_mid, t_eval=left, **_IVP)
    if not (fwd.success and bwd.success) or fwd.y.shape[1] != right.size or bwd.y.shape[1] != left.size:
        raise ProfileError("profile blow-up while sweeping from the phase point")
    return np.vstack([bwd.y.T[::-1][:-1], fwd.y.T])


def _shoot_on_angle(model, shock, directions, w_minus, mid, x_max, x) -> np.ndarray:
    """Bisection on the angle within a two-dimensional unstable manifold."""
    A, Q = jacobians(model, shock.u_plus, shock.v_plus)
    M = np.linalg.solve(A - shock.s * np.eye(model.N), Q)
    vals, vecs = np.linalg.eig(M.T)
    k = int(np.argmax(vals.real))
    if vals[k].real <= 0:
        raise ProfileError("right endstate has no unstable direction to shoot against")
    ell = np.real(vecs[:, k])
    w_plus = np.concatenate([shock.u_plus, shock.v_plus])
    basis, _ = np.linalg.qr(directions)

    def miss(theta: float) -> float:
        r = basis @ np.array([math.cos(theta), math.sin(theta)])
        w_mid = _shoot(model, shock, w_minus + _SEED_OFFSET * r, x_max, mid)
        if w_mid is None:
            return math.nan
        end = solve_ivp(lambda _, w: _rhs(model, shock, w), (0.0, x[-1]), w_mid, **_IVP)
        return float(ell @ (end.y[:, -1] - w_plus))

    thetas = np.linspace(0.0, 2.0 * math.pi, 2 * _ANGLE_SAMPLES, endpoint=False)
    values = np.array([miss(t) for t in thetas])
    bracket = None
    for i in range(thetas.size - 1):
        if np.isfinite(values[i]) and np.isfinite(values[i + 1]) and values[i] * values[i + 1] <= 0:
            bracket = (thetas[i], thetas[i + 1], values[i])
            break
    if bracket is None:
        raise ProfileError("no connection found: shooting miss never changes sign")
    lo, hi, f_lo = bracket
    while hi - lo > settings.shooting_tol:
        midpoint = 0.5 * (lo + hi)
        f_mid = miss(midpoint)
        if not np.isfinite(f_mid):
            raise ProfileError("shooting trajectory lost during bisection")
        if f_lo * f_mid <= 0:
            hi = midpoint
        else:
            lo, f_lo = midpoint, f_mid
    r = basis @ np.array([math.cos(lo), math.sin(lo)])
    w_mid = _shoot(model, shock, w_minus + _SEED_OFFSET * r, x_max, mid)
    logger.debug("angle shooting converged at theta=%.10f", lo)
    return _sweep(model, shock, w_mid, x)


def fit_tails(profile: ShockProfile) -> dict[str, tuple[float, float]]:
    """Exponential tail rates from log|W - W_-| on [-X, -X/2] and log|W - W_+| on [X/2, X]."""
    X = profile.X
    W = profile.state
    out = {}
    for side, mask, sign in (("-", profile.x <= -0.5 * X, 1.0), ("+", profile.x >= 0.5 * X, -1.0)):
        dist = np.max(np.abs(W[mask] - profile.endstate(side)), axis=1)
        keep = dist > 1e-13
        fit = linear_fit(profile.x[mask][keep], np.log(dist[keep]))
        out[side] = (sign * fit.slope, fit.r2)
    return out
