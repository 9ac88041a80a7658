"""Scattering coefficients of incoming equilibrium modes at the shock."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from core.errors import ScatteringError
from core.state import ShockData, ShockProfile
from evans.verdict import liu_majda_delta
from models.base import RelaxationModel
from models.equilibrium import mode_data
from profiles.classify import ELL, classify

logger = logging.getLogger(__name__)


@dataclass
class SideModes:
    """Equilibrium modes at one endstate, speeds in the shock frame."""

    speeds: np.ndarray  # (n,) a*_j - s
    right: np.ndarray  # n x n, columns r*_j
    R_star: np.ndarray  # N x n lifted right vectors
    L_star: np.ndarray  # N x n lifted left vectors
    beta: np.ndarray  # (n,) l*_j^T B* r*_j

    def outgoing(self, side: str) -> np.ndarray:
        return np.flatnonzero(self.speeds < 0) if side == "-" else np.flatnonzero(self.speeds > 0)

    def incoming(self, side: str) -> np.ndarray:
        return np.flatnonzero(self.speeds > 0) if side == "-" else np.flatnonzero(self.speeds < 0)


@dataclass
class ScatteringTable:
    """c^{j,-}, c^{j,+}, c^{j,0} for every incoming (k, side), plus pi_j, m_j and Delta."""

    sides: dict[str, SideModes]
    masses: np.ndarray  # n x ell
    dmass: np.ndarray  # (len, N) d/d delta of the profile, i.e. -(u', v')
    x: np.ndarray
    coefficients: dict[tuple[str, int], dict[str, np.ndarray]] = field(default_factory=dict)
    pi: np.ndarray | None = None  # ell x N
    pi_by_side: dict[str, np.ndarray] = field(default_factory=dict)
    delta: float = float("nan")
    system_det: float = float("nan")
    residual: float = float("nan")

    @property
    def pi_mismatch(self) -> float:
        if len(self.pi_by_side) < 2:
            return 0.0
        return float(np.max(np.abs(self.pi_by_side["-"] - self.pi_by_side["+"])))

    def dmass_at(self, x) -> np.ndarray:
        """d/d delta of (u, v) at x, zero beyond the profile grid."""
        x = np.asarray(x, dtype=float)
        return np.stack(
            [np.interp(x, self.x, self.dmass[:, c], left=0.0, right=0.0) for c in range(self.dmass.shape[1])],
            axis=-1,
        )

    def to_dict(self) -> dict:
        return {
            "delta": self.delta,
            "system_det": self.system_det,
            "residual": self.residual,
            "pi": self.pi.tolist() if self.pi is not None else None,
            "pi_mismatch": self.pi_mismatch,
            "masses": self.masses.tolist(),
            "coefficients": [
                {"side": side, "k": k, **{key: val.tolist() for key, val in coeffs.items()}}
                for (side, k), coeffs in sorted(self.coefficients.items())
            ],
        }


def side_modes(model: RelaxationModel, shock: ShockData, side: str) -> SideModes:
    md = mode_data(model, shock.endstate(side)[0], shock.s)
    eq = md.equilibrium
    beta = np.diag(eq.left.T @ md.B_star @ eq.right)
    return SideModes(
        speeds=eq.speeds - shock.s,
        right=eq.right,
        R_star=md.R_star,
        L_star=md.L_star,
        beta=beta,
    )


def scattering_solve(model: RelaxationModel, shock: ShockData, profile: ShockProfile) -> ScatteringTable:
    """Solve sum c^- r*^- + sum c^+ r*^+ + c^0 m = r*_k for each incoming (k, side)."""
    cls = classify(model, shock, profile)
    if cls.kind not in ("Lax", "overcompressive") or not cls.pure:
        raise ScatteringError(f"scattering needs a pure Lax or overcompressive shock, got {cls.kind}")
    sides = {side: side_modes(model, shock, side) for side in ("-", "+")}
    dmass = -profile.dstate
    masses = np.asarray(shock.u_minus - shock.u_plus, dtype=float).reshape(model.n, ELL)
    out_minus = sides["-"].outgoing("-")
    out_plus = sides["+"].outgoing("+")
    matrix = np.hstack([sides["-"].right[:, out_minus], sides["+"].right[:, out_plus], masses])
    if matrix.shape[0] != matrix.shape[1]:
        raise ScatteringError(f"scattering system is {matrix.shape[0]}x{matrix.shape[1]}")
    system_det = float(np.linalg.det(matrix))
    if abs(system_det) <= 1e-10:
        raise ScatteringError("scattering system is singular: condition (D2) fails (Delta = 0)")

    table = ScatteringTable(sides=sides, masses=masses, dmass=dmass, x=profile.x, system_det=system_det)
    table.delta = liu_majda_delta(model, shock, profile)
    residual = 0.0
    p, q = out_minus.size, out_plus.size
    for side in ("-", "+"):
        modes = sides[side]
        pi_side = np.zeros((ELL, model.N))
        for k in modes.incoming(side):
            rhs = modes.right[:, k]
            c = np.linalg.solve(matrix, rhs)
            residual = max(residual, float(np.max(np.abs(matrix @ c - rhs))))
            table.coefficients[(side, int(k))] = {"minus": c[:p], "plus": c[p : p + q], "zero": c[p + q :]}
            pi_side += np.outer(c[p + q :], modes.L_star[:, k])
        table.pi_by_side[side] = pi_side
    table.pi = table.pi_by_side["-"]
    table.residual = residual
    logger.info(
        "scattering solved: det=%.6g, residual=%.3g, pi mismatch=%.3g", system_det, residual, table.pi_mismatch
    )
    return table
