"""Evans function D(lambda) = det[Phi^+(0), Phi^-(0)] and dual (adjoint) bases."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass

import numpy as np

from core.state import ShockProfile
from evans.integrator import SweepResult, sweep
from evans.modes import check_splitting, limit_roots, stable_count

logger = logging.getLogger(__name__)

Chart = tuple[int, ...]


@dataclass
class EvansValue:
    """One value of D, kept as log|D| and arg D.

    rescale is the real log of the QR factors folded out of both bases.
    """

    lam: complex
    log_abs: float
    arg: float
    k: int
    rescale: float
    scheme: str

    @property
    def log(self) -> complex:
        return complex(self.log_abs, self.arg)

    @property
    def value(self) -> complex:
        return complex(np.exp(self.log))


@dataclass
class Charts:
    """Coordinate subsets that normalize the selected subspaces, V (V_S)^{-1}."""

    plus: Chart
    minus: Chart


class EvansSetup:
    """Data shared by every lambda for one profile: limits, k, sweep range."""

    def __init__(self, profile: ShockProfile, X: float | None = None, lam_ref: float | None = None):
        self.profile = profile
        coeffs = profile.coefficients
        self.coeffs = coeffs
        self.N = coeffs.N
        self.limits = {side: coeffs.limit(side) for side in ("-", "+")}
        speeds = np.concatenate([np.abs(np.linalg.eigvals(A)) for A, _ in self.limits.values()])
        self.min_speed = float(np.min(speeds))
        if lam_ref is None:
            eta_scale = max(float(np.max(np.abs(np.linalg.eigvals(Q)))) for _, Q in self.limits.values())
            lam_ref = 10.0 * (1.0 + eta_scale + float(np.max(speeds)))
        self.lam_ref = float(lam_ref)
        self.k = stable_count(*self.limits["+"], self.lam_ref)
        last = coeffs.x.size - 1
        self.center = last // 2
        if X is None or X >= profile.X:
            self.lo, self.hi = 0, last
        else:
            half = int(np.floor(X / coeffs.spacing / 2)) * 2
            self.lo, self.hi = self.center - half, self.center + half
        # forward Z-form field (Q - lam) A^{-1}, adjoint W-form field -A^{-T} (Q^T - conj(lam))
        self.P0 = coeffs.QAinv
        self.P1 = -coeffs.Ainv
        self.P0_adj = -np.swapaxes(coeffs.QAinv, 1, 2)
        self.P1_adj = np.swapaxes(coeffs.Ainv, 1, 2)

    # -- initial data ------------------------------------------------------

    def roots(self, side: str, lams: np.ndarray):
        A, Q = self.limits[side]
        mu, V = limit_roots(A, Q, lams)
        check_splitting(mu, self.k, lams, f"{side} endstate")
        return mu, V

    def selected(self, side: str, lams: np.ndarray):
        """(mu, V) of the decaying subspace: k lowest Re mu at +, N - k highest at -."""
        mu, V = self.roots(side, lams)
        cols = slice(0, self.k) if side == "+" else slice(self.k, self.N)
        return mu, mu[:, cols], V[:, :, cols]

    def spread(self, lams: np.ndarray) -> float:
        out = 0.0
        for side in ("-", "+"):
            mu, _ = limit_roots(*self.limits[side], lams)
            out = max(out, float(np.max(mu.real[:, -1] - mu.real[:, 0])))
        return out


def best_chart(V: np.ndarray, per_lambda: bool = False):
    """Coordinate subset S maximizing |det Q_S| of the orthonormalized subspace.

    With per_lambda the choice is made separately for each lambda (returns
    an index array into the combination list); otherwise one subset for the batch.
    """
    L, N, m = V.shape
    combos = list(itertools.combinations(range(N), m))
    Qf = np.linalg.qr(V)[0]
    scores = np.stack([np.abs(np.linalg.det(Qf[:, list(c), :])) for c in combos], axis=1)
    if per_lambda:
        return combos, np.argmax(scores, axis=1)
    best = int(np.argmax(scores.min(axis=0)))
    if scores[:, best].min() < 1e-8:
        logger.warning("normalizing chart %s is nearly singular on the sample set", combos[best])
    return combos[best]


def normalize(V: np.ndarray, chart: Chart | None) -> np.ndarray:
    """V (V_S)^{-1}, with S chosen per lambda when chart is None."""
    if chart is not None:
        return V @ np.linalg.inv(V[:, list(chart), :])
    combos, pick = best_chart(V, per_lambda=True)
    out = np.empty_like(V)
    for idx, combo in enumerate(combos):
        sel = pick == idx
        if np.any(sel):
            out[sel] = V[sel] @ np.linalg.inv(V[sel][:, list(combo), :])
    return out


def contour_charts(profile: ShockProfile, lams, setup: EvansSetup | None = None) -> Charts:
    """One chart per side for a whole contour, chosen on preview samples."""
    setup = setup or EvansSetup(profile)
    lams = np.asarray(lams, dtype=complex)
    return Charts(
        plus=best_chart(setup.selected("+", lams)[2]),
        minus=best_chart(setup.selected("-", lams)[2]),
    )


# -- forward sweeps ----------------------------------------------------------


def side_sweep(setup: EvansSetup, side: str, lams: np.ndarray, chart: Chart | None, stop: int, store: bool) -> SweepResult:
    """Sweep the decaying basis of `side` from its far node to node `stop`."""
    A, _ = setup.limits[side]
    _, mu_sel, V_sel = setup.selected(side, lams)
    Y0 = A[None] @ normalize(V_sel, chart)
    c = mu_sel.mean(axis=1)
    start = setup.hi if side == "+" else setup.lo
    return sweep(
        setup.coeffs.x, setup.P0, setup.P1, lams, c, Y0, start, stop,
        min_speed=setup.min_speed, spread=setup.spread(lams), store=store,
    )


def evans_batch(
    profile: ShockProfile,
    lams,
    *,
    X: float | None = None,
    charts: Charts | None = None,
    setup: EvansSetup | None = None,
) -> list[EvansValue]:
    """D at many lambda, integrated together."""
    setup = setup or EvansSetup(profile, X)
    lams = np.atleast_1d(np.asarray(lams, dtype=complex))
    plus = side_sweep(setup, "+", lams, charts.plus if charts else None, setup.center, store=False)
    minus = side_sweep(setup, "-", lams, charts.minus if charts else None, setup.center, store=False)
    k, N = setup.k, setup.N
    sign, logabs = np.linalg.slogdet(np.concatenate([plus.B, minus.B], axis=2))
    log_d = k * plus.Lg + (N - k) * minus.Lg + logabs + 1j * np.angle(sign)
    scheme = np.where(plus.magnus | minus.magnus, "magnus", "rk4")
    return [
        EvansValue(
            lam=complex(lam), log_abs=float(ld.real), arg=float(np.angle(np.exp(1j * ld.imag))),
            k=k, rescale=float(rp + rm), scheme=str(sc),
        )
        for lam, ld, rp, rm, sc in zip(lams, log_d, plus.rescale, minus.rescale, scheme)
    ]


def evans_value(profile: ShockProfile, lam: complex, X: float | None = None) -> EvansValue:
    """D(lambda) with per-lambda normalizing charts."""
    value = evans_batch(profile, [lam], X=X)[0]
    logger.debug("D(%s): log|D|=%.6g arg=%.6g", lam, value.log_abs, value.arg)
    return value


# -- adjoint bases -----------------------------------------------------------


@dataclass
class AdjointBasis:
    """Dual bases on the step grid, normalized against the forward bases at x = 0.

    minus: k columns decaying at -infinity, dual to Phi^+.
    plus:  N - k columns decaying at +infinity, dual to Phi^-.
    Each basis is exp(L) B with B (S, N, m) and L (S,) complex.
    """

    lam: complex
    x: np.ndarray
    minus_B: np.ndarray
    minus_L: np.ndarray
    plus_B: np.ndarray
    plus_L: np.ndarray

    def minus_at(self, j: int) -> np.ndarray:
        return np.exp(self.minus_L[j]) * self.minus_B[j]

    def plus_at(self, j: int) -> np.ndarray:
        return np.exp(self.plus_L[j]) * self.plus_B[j]


def _adjoint_sweep(setup: EvansSetup, side: str, lam: complex) -> SweepResult:
    """Decaying adjoint solutions W~ = e^{nu x} V~, nu = -conj(mu)."""
    A, Q = setup.limits[side]
    lam_c = np.array([np.conj(lam)])
    M = -np.linalg.solve(A.T, Q.T - lam_c[0] * np.eye(setup.N))
    nu, V = np.linalg.eig(M)
    order = np.argsort(nu.real, kind="stable")
    nu, V = nu[order], V[:, order]
    if side == "-":
        cols = slice(setup.N - setup.k, setup.N)  # growing toward +x
        start, stop = setup.lo, setup.hi
    else:
        cols = slice(0, setup.N - setup.k)
        start, stop = setup.hi, setup.lo
    V_sel = normalize(V[None, :, cols], None)
    c = nu[cols].mean()[None]
    return sweep(
        setup.coeffs.x, setup.P0_adj, setup.P1_adj, lam_c, c, V_sel, start, stop,
        min_speed=setup.min_speed, spread=setup.spread(np.array([lam])), store=True,
    )


def adjoint_basis(profile: ShockProfile, lam: complex, X: float | None = None) -> AdjointBasis:
    """Solutions of A^T W~' + Q^T W~ = conj(lam) W~ with Psi~^* A Phi = I at x = 0."""
    setup = EvansSetup(profile, X)
    lams = np.array([lam], dtype=complex)
    fwd_plus = side_sweep(setup, "+", lams, None, setup.center, store=False)
    fwd_minus = side_sweep(setup, "-", lams, None, setup.center, store=False)
    adj_minus = _adjoint_sweep(setup, "-", lam)
    adj_plus = _adjoint_sweep(setup, "+", lam)
    x = adj_minus.x
    plus_B, plus_L = adj_plus.B_path[0][::-1], adj_plus.Lg_path[0][::-1]
    minus_B, minus_L = adj_minus.B_path[0], adj_minus.Lg_path[0]
    j0 = int(np.argmin(np.abs(x)))

    def pair(B_adj, L_adj, fwd: SweepResult):
        # <Psi~, Z> at 0 = conj(e^{L~}) e^{L} B~^H B
        gram = B_adj[j0].conj().T @ fwd.B[0]
        C = np.linalg.inv(gram).conj().T
        scale = -(L_adj[j0] + np.conj(fwd.Lg[0]))
        return B_adj @ C, L_adj + scale

    minus_B, minus_L = pair(minus_B, minus_L, fwd_plus)
    plus_B, plus_L = pair(plus_B, plus_L, fwd_minus)
    return AdjointBasis(lam=complex(lam), x=x, minus_B=minus_B, minus_L=minus_L, plus_B=plus_B, plus_L=plus_L)
