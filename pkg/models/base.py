"""General relaxation systems (u, v)_t + (f, g)_x = (0, q) and their Jacobians."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np
from scipy.optimize import root

from config import settings
from core.errors import HyperbolicityError, ModelError, SingularRelaxationError

logger = logging.getLogger(__name__)

VectorFn = Callable[[np.ndarray, np.ndarray], np.ndarray]
MatrixFn = Callable[[np.ndarray, np.ndarray], np.ndarray]

_BLOCKS = ("f_u", "f_v", "g_u", "g_v", "q_u", "q_v")


@dataclass(eq=False)
class RelaxationModel:
    """Relaxation system with n conserved and r relaxing components.

    Analytic Jacobian blocks are optional; any block left as None is
    evaluated by central finite differences.
    """

    n: int
    r: int
    f: VectorFn
    g: VectorFn
    q: VectorFn
    v_star: Callable[[np.ndarray], np.ndarray] | None = None
    f_u: MatrixFn | None = None
    f_v: MatrixFn | None = None
    g_u: MatrixFn | None = None
    g_v: MatrixFn | None = None
    q_u: MatrixFn | None = None
    q_v: MatrixFn | None = None
    kind: Literal["jin-xin", "custom"] = "custom"
    name: str = "custom"
    # jin-xin only
    a: float | None = None
    h: Callable[[np.ndarray], np.ndarray] | None = None
    dh: Callable[[np.ndarray], np.ndarray] | None = None
    fd_step: float = field(default_factory=lambda: settings.fd_rel_step)

    @property
    def N(self) -> int:
        return self.n + self.r

    @property
    def finite_difference(self) -> bool:
        return any(getattr(self, b) is None for b in _BLOCKS)

    def split(self, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        w = np.asarray(w, dtype=float)
        return w[: self.n], w[self.n :]

    def equilibrium(self, u: np.ndarray) -> np.ndarray:
        """v*(u); Newton on q(u, v) = 0 when no closed form is registered."""
        u = np.atleast_1d(np.asarray(u, dtype=float))
        if self.v_star is not None:
            return np.atleast_1d(np.asarray(self.v_star(u), dtype=float))
        sol = root(lambda v: self.q(u, v), np.zeros(self.r), method="hybr", tol=1e-14)
        if not sol.success:
            raise ModelError(f"equilibrium solve failed at u={u}: {sol.message}")
        return np.asarray(sol.x, dtype=float)

    def block(self, name: str, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """One Jacobian block, analytic if registered, else central differences."""
        u = np.atleast_1d(np.asarray(u, dtype=float))
        v = np.atleast_1d(np.asarray(v, dtype=float))
        fn = getattr(self, name)
        if fn is not None:
            return np.atleast_2d(np.asarray(fn(u, v), dtype=float))
        return self.fd_block(name, u, v)

    def fd_block(self, name: str, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        func = {"f": self.f, "g": self.g, "q": self.q}[name[0]]
        wrt_u = name.endswith("_u")
        x0 = u if wrt_u else v
        out_dim = self.n if name[0] == "f" else self.r
        J = np.empty((out_dim, x0.size))
        for k in range(x0.size):
            step = self.fd_step * (1.0 + abs(x0[k]))
            xp = x0.copy()
            xm = x0.copy()
            xp[k] += step
            xm[k] -= step
            if wrt_u:
                fp, fm = func(xp, v), func(xm, v)
            else:
                fp, fm = func(u, xp), func(u, xm)
            J[:, k] = (np.asarray(fp, dtype=float) - np.asarray(fm, dtype=float)) / (2.0 * step)
        return J


def jacobians(
    model: RelaxationModel, u: np.ndarray, v: np.ndarray, *, check: bool = True
) -> tuple[np.ndarray, np.ndarray]:
    """A = (df, dg)^T and Q = (0, dq)^T at (u, v)."""
    n, r = model.n, model.r
    N = n + r
    blocks = {b: model.block(b, u, v) for b in _BLOCKS}
    A = np.zeros((N, N))
    A[:n, :n] = blocks["f_u"]
    A[:n, n:] = blocks["f_v"]
    A[n:, :n] = blocks["g_u"]
    A[n:, n:] = blocks["g_v"]
    Q = np.zeros((N, N))
    Q[n:, :n] = blocks["q_u"]
    Q[n:, n:] = blocks["q_v"]
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(Q))):
        raise ModelError(f"non-finite Jacobian entries at u={u}, v={v}")
    if check:
        eig = np.linalg.eigvals(A)
        scale = 1.0 + np.linalg.norm(A, ord=2)
        if np.max(np.abs(eig.imag)) > settings.hyperbolicity_tol * scale:
            raise HyperbolicityError(f"A(u,v) not hyperbolic at u={u}: eigenvalues {eig}")
    return A, Q


def relaxation_blocks(model: RelaxationModel, u: np.ndarray, v: np.ndarray) -> dict[str, np.ndarray]:
    """All six Jacobian blocks, with q_v checked for invertibility."""
    blocks = {b: model.block(b, u, v) for b in _BLOCKS}
    q_v = blocks["q_v"]
    if np.linalg.cond(q_v) > 1e12:
        raise SingularRelaxationError(f"q_v singular at u={u}")
    return blocks


def validate_model(
    model: RelaxationModel,
    u_samples: np.ndarray | None = None,
    *,
    seed: int = 0,
    n_random: int = 8,
) -> list[str]:
    """Check equilibrium residual, q_v stability and analytic Jacobians on samples."""
    rng = np.random.default_rng(seed)
    if u_samples is None:
        u_samples = rng.uniform(-1.0, 1.0, size=(n_random, model.n))
    findings: list[str] = []
    for u in np.atleast_2d(u_samples):
        v = model.equilibrium(u)
        resid = np.max(np.abs(model.q(u, v)))
        if resid > 1e-12:
            findings.append(f"q(u, v*(u)) = {resid:.3e} at u={u.tolist()}")
        q_v = model.block("q_v", u, v)
        if np.max(np.linalg.eigvals(q_v).real) >= 0:
            findings.append(f"q_v not stable at u={u.tolist()}")
    if model.finite_difference:
        return findings
    for _ in range(n_random):
        u = rng.uniform(-1.0, 1.0, size=model.n)
        v = rng.uniform(-1.0, 1.0, size=model.r)
        for b in _BLOCKS:
            analytic = model.block(b, u, v)
            numeric = model.fd_block(b, u, v)
            err = np.max(np.abs(analytic - numeric)) / (1.0 + np.max(np.abs(analytic)))
            if err > 1e-6:
                findings.append(f"{b} mismatch {err:.3e} at u={u.tolist()}, v={v.tolist()}")
    if findings:
        logger.warning("Model %s validation: %d finding(s)", model.name, len(findings))
    return findings
