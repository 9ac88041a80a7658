"""Equilibrium reduction, Chapman–Enskog diffusion, characteristic data and hypothesis checks."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from config import settings
from core.errors import DefectiveMatrixError, HyperbolicityError, ModelError
from core.linalg import (
    assignment_is_ambiguous,
    linear_fit,
    match_branches,
    real_eigensystem,
)
from core.state import (
    CharacteristicFamily,
    EquilibriumData,
    HypothesisReport,
    ModeData,
    ShockData,
)
from models.base import RelaxationModel, jacobians, relaxation_blocks

logger = logging.getLogger(__name__)

_SEGMENT_POINTS = 41
_MAX_BISECTIONS = 12


def _state(model: RelaxationModel, u, v=None) -> tuple[np.ndarray, np.ndarray]:
    u = np.atleast_1d(np.asarray(u, dtype=float))
    v = model.equilibrium(u) if v is None else np.atleast_1d(np.asarray(v, dtype=float))
    return u, v


def _reduction(model: RelaxationModel, u: np.ndarray, v: np.ndarray) -> tuple[dict, np.ndarray, np.ndarray]:
    """Jacobian blocks, v*_u = -q_v^{-1} q_u and df* = f_u + f_v v*_u."""
    blocks = relaxation_blocks(model, u, v)
    v_star_u = -np.linalg.solve(blocks["q_v"], blocks["q_u"])
    df_star = blocks["f_u"] + blocks["f_v"] @ v_star_u
    return blocks, v_star_u, df_star


def equilibrium_data(model: RelaxationModel, u) -> EquilibriumData:
    """f*(u) = f(u, v*(u)) and the ascending eigen-decomposition of df*(u)."""
    u, v = _state(model, u)
    _, _, df_star = _reduction(model, u, v)
    scale = 1.0 + np.linalg.norm(df_star, ord=2)
    eig = real_eigensystem(
        df_star,
        imag_tol=settings.hyperbolicity_tol,
        multiplicity_tol=settings.multiplicity_rel_tol,
        what=f"df*(u={u.tolist()})",
    )
    if len(eig.groups) < eig.values.size:
        logger.debug("df* has repeated speeds at u=%s (scale %.3g)", u.tolist(), scale)
    return EquilibriumData(
        u=u,
        v=v,
        f_star=np.atleast_1d(np.asarray(model.f(u, v), dtype=float)),
        df_star=df_star,
        speeds=eig.values,
        right=eig.right,
        left=eig.left.T,
        groups=eig.groups,
    )


def chapman_enskog(model: RelaxationModel, u) -> tuple[np.ndarray, list[np.ndarray]]:
    """B* = -f_v q_v^{-1} (g*_u - v*_u f*_u) and the modal blocks beta*_j = l*_j^T B* r*_j."""
    u, v = _state(model, u)
    blocks, v_star_u, df_star = _reduction(model, u, v)
    g_star_u = blocks["g_u"] + blocks["g_v"] @ v_star_u
    B_star = -blocks["f_v"] @ np.linalg.solve(blocks["q_v"], g_star_u - v_star_u @ df_star)
    eq = equilibrium_data(model, u)
    beta: list[np.ndarray] = []
    for group in eq.groups:
        block = eq.left[:, group].T @ B_star @ eq.right[:, group]
        if block.shape[0] > 1:
            _, vecs = np.linalg.eig(block)
            if np.linalg.cond(vecs) > 1e10:
                raise DefectiveMatrixError(f"beta* block at u={u.tolist()} is not diagonalizable")
        beta.append(block)
    return B_star, beta


def hyperbolic_modes(model: RelaxationModel, u, v=None, s: float = 0.0) -> ModeData:
    """Families of A - s with dissipation blocks eta_j = -l_j^T Q r_j.

    Speeds are eigenvalues of A - s, i.e. measured in the shock frame.
    """
    u, v = _state(model, u, v)
    A, Q = jacobians(model, u, v)
    eig = real_eigensystem(
        A - s * np.eye(model.N),
        imag_tol=settings.hyperbolicity_tol,
        multiplicity_tol=settings.multiplicity_rel_tol,
        what=f"A(u={u.tolist()})",
    )
    families = []
    for group in eig.groups:
        right = eig.right[:, group]
        left = eig.left[group].T
        families.append(
            CharacteristicFamily(
                speed=float(np.mean(eig.values[group])),
                multiplicity=int(group.size),
                right=right,
                left=left,
                eta=-left.T @ Q @ right,
            )
        )
    return ModeData(u=u, v=v, s=float(s), families=families)


def mode_data(model: RelaxationModel, u, s: float = 0.0) -> ModeData:
    """Characteristic, equilibrium and Chapman–Enskog data at an equilibrium state."""
    u, v = _state(model, u)
    modes = hyperbolic_modes(model, u, v, s)
    eq = equilibrium_data(model, u)
    B_star, beta = chapman_enskog(model, u)
    blocks, v_star_u, _ = _reduction(model, u, v)
    modes.equilibrium = eq
    modes.B_star = B_star
    modes.beta = beta
    modes.R_star = np.vstack([eq.right, v_star_u @ eq.right])
    modes.L_star = np.vstack([eq.left, np.zeros((model.r, model.n))])
    return modes


def rest_point_matrix(model: RelaxationModel, u, v=None, s: float = 0.0) -> np.ndarray:
    """r x r linearization of the profile ODE at a rest point.

    (A - s) W' = (0, q) linearizes to W' = (A - s)^{-1} Q W, whose nonzero
    spectrum is that of K = (q_u, q_v) (A - s)^{-1}[:, n:].
    """
    u, v = _state(model, u, v)
    A, Q = jacobians(model, u, v)
    shifted = A - s * np.eye(model.N)
    if np.linalg.cond(shifted) > 1e12:
        raise HyperbolicityError(f"rest point at u={u.tolist()} is characteristic (s is an eigenvalue of A)")
    cols = np.linalg.solve(shifted, np.vstack([np.zeros((model.n, model.r)), np.eye(model.r)]))
    return Q[model.n :] @ cols


def rest_point_rates(model: RelaxationModel, u, v=None, s: float = 0.0) -> np.ndarray:
    """Eigenvalues of rest_point_matrix sorted by real part."""
    vals = np.linalg.eigvals(rest_point_matrix(model, u, v, s))
    return vals[np.argsort(vals.real, kind="stable")]


# -- dispersion relation ---------------------------------------------------


def _symbol_eigs(A: np.ndarray, Q: np.ndarray, xi: float) -> np.ndarray:
    vals = np.linalg.eigvals(-1j * xi * A + Q)
    if not np.all(np.isfinite(vals)):
        raise ModelError(f"eigensolver failure at xi={xi}")
    return vals


def _track(A, Q, xi0: float, lam0: np.ndarray, xi1: float, depth: int = 0) -> np.ndarray:
    current = _symbol_eigs(A, Q, xi1)
    perm = match_branches(lam0, current)
    if depth < _MAX_BISECTIONS and assignment_is_ambiguous(lam0, current, perm):
        mid = 0.5 * (xi0 + xi1)
        lam_mid = _track(A, Q, xi0, lam0, mid, depth + 1)
        return _track(A, Q, mid, lam_mid, xi1, depth + 1)
    return current[perm]


def dispersion_exact(model: RelaxationModel, shock: ShockData, side: str, xi) -> np.ndarray:
    """Eigenvalues lambda_j(i xi) of -i xi (A - s) + Q at the endstate on `side`.

    Rows follow the xi sweep; columns keep branch identity by minimal-distance
    matching, bisecting the step when a match is ambiguous. The first row is
    ordered by real part.
    """
    u, v = shock.endstate(side)
    A, Q = jacobians(model, u, v)
    A = A - shock.s * np.eye(model.N)
    xi_arr = np.atleast_1d(np.asarray(xi, dtype=float))
    out = np.empty((xi_arr.size, model.N), dtype=complex)
    first = _symbol_eigs(A, Q, xi_arr[0])
    out[0] = first[np.lexsort((first.imag, first.real))]
    for k in range(1, xi_arr.size):
        out[k] = _track(A, Q, xi_arr[k - 1], out[k - 1], xi_arr[k])
    return out


@dataclass
class DispersionFit:
    """Rates recovered from exact dispersion curves at one endstate."""

    side: str
    beta: np.ndarray  # slow-branch xi^2 coefficients, ordered by equilibrium speed
    eta: np.ndarray  # -lim Re lambda at large xi, ordered by characteristic speed
    slow_speeds: np.ndarray
    fast_speeds: np.ndarray


def fit_dispersion_rates(
    model: RelaxationModel,
    shock: ShockData,
    side: str,
    *,
    xi_low: tuple[float, float] = (1e-3, 1e-1),
    xi_high: float | None = None,
    points: int = 41,
) -> DispersionFit:
    """Fit beta*_j from the slow branches and eta_j from the large-xi limit."""
    xi = np.logspace(np.log10(xi_low[0]), np.log10(xi_low[1]), points)
    lam = dispersion_exact(model, shock, side, xi)
    slow_idx = np.argsort(np.abs(lam[0]))[: model.n]
    slow_speeds = np.empty(model.n)
    beta = np.empty(model.n)
    for k, j in enumerate(slow_idx):
        branch = lam[:, j]
        slow_speeds[k] = float(np.mean(-branch.imag / xi))
        # Re lambda is even in xi: -Re lambda / xi^2 = beta + O(xi^2)
        fit = linear_fit(xi**2, -branch.real / xi**2)
        beta[k] = fit.intercept
        logger.debug("slow branch %d at side %s: beta=%.6g r2=%.4f", k, side, fit.intercept, fit.r2)
    order = np.argsort(slow_speeds)

    big = settings.theta_xi_max if xi_high is None else xi_high
    A, Q = jacobians(model, *shock.endstate(side))
    lam_big = _symbol_eigs(A - shock.s * np.eye(model.N), Q, big)
    fast_speeds = -lam_big.imag / big
    fast_order = np.argsort(fast_speeds)
    return DispersionFit(
        side=side,
        beta=beta[order],
        eta=-lam_big.real[fast_order],
        slow_speeds=slow_speeds[order],
        fast_speeds=fast_speeds[fast_order],
    )


# -- hypotheses ------------------------------------------------------------


def track_multiplicities(model: RelaxationModel, u_samples: np.ndarray, s: float = 0.0) -> tuple[int, ...]:
    """Family multiplicities of A - s along equilibrium samples; raises when they change."""
    reference: tuple[int, ...] | None = None
    for u in np.atleast_2d(u_samples):
        modes = hyperbolic_modes(model, u, None, s)
        mult = tuple(fam.multiplicity for fam in modes.families)
        if reference is None:
            reference = mult
        elif mult != reference:
            raise HyperbolicityError(f"multiplicities change from {reference} to {mult} at u={u.tolist()}")
    return reference or ()


def dissipativity_theta(model: RelaxationModel, u, v) -> float:
    """min over the xi grid of -max_j Re lambda_j(xi) (1 + xi^2) / xi^2."""
    A, Q = jacobians(model, u, v)
    xi = np.logspace(np.log10(settings.theta_xi_min), np.log10(settings.theta_xi_max), settings.theta_points)
    worst = np.array([np.max(_symbol_eigs(A, Q, x).real) for x in xi])
    return float(np.min(-worst * (1.0 + xi**2) / xi**2))


def _segment(shock: ShockData) -> np.ndarray:
    tau = np.linspace(0.0, 1.0, _SEGMENT_POINTS)[:, None]
    return shock.u_minus[None, :] + tau * (shock.u_plus - shock.u_minus)[None, :]


def check_hypotheses(model: RelaxationModel, shock: ShockData) -> HypothesisReport:
    """Run the structural checks at both endstates; failures are recorded, not raised."""
    report = HypothesisReport()
    sides = ("-", "+")
    margin = settings.noncharacteristic_margin

    # equilibria and Rankine–Hugoniot
    eq_resid = 0.0
    for side in sides:
        u, v = shock.endstate(side)
        eq_resid = max(eq_resid, float(np.max(np.abs(model.q(u, v)))))
        eq_resid = max(eq_resid, float(np.max(np.abs(v - model.equilibrium(u)))))
    report.checks["equilibria"] = eq_resid <= 1e-12
    report.details["equilibria"] = f"max residual {eq_resid:.3e}"
    rh = model.f(shock.u_plus, shock.v_plus) - model.f(shock.u_minus, shock.v_minus)
    rh = float(np.max(np.abs(rh - shock.s * (shock.u_plus - shock.u_minus))))
    report.checks["rankine_hugoniot"] = rh <= 1e-10
    report.details["rankine_hugoniot"] = f"residual {rh:.3e}"

    # H1: hyperbolicity with constant multiplicity, frozen noncharacteristic endstates
    try:
        mult = track_multiplicities(model, _segment(shock), shock.s)
        ok = True
        for side in sides:
            A, _ = jacobians(model, *shock.endstate(side))
            speeds = np.linalg.eigvals(A).real
            ok &= bool(np.min(np.abs(speeds - shock.s)) > margin * (1.0 + np.max(np.abs(speeds))))
        report.checks["H1"] = True
        report.checks["frozen_noncharacteristic"] = ok
        report.details["H1"] = f"multiplicities {mult}"
    except (HyperbolicityError, DefectiveMatrixError) as exc:
        report.checks["H1"] = False
        report.details["H1"] = str(exc)

    # H2: equilibrium speeds distinct, real and not equal to s
    try:
        ok = True
        notes = []
        for side in sides:
            eq = equilibrium_data(model, shock.endstate(side)[0])
            distinct = len(eq.groups) == eq.speeds.size
            gap = float(np.min(np.abs(eq.speeds - shock.s)))
            ok &= distinct and gap > margin * (1.0 + float(np.max(np.abs(eq.speeds))))
            notes.append(f"a*{side}={eq.speeds.tolist()}")
        report.checks["H2"] = ok
        report.details["H2"] = ", ".join(notes)
    except (HyperbolicityError, DefectiveMatrixError, ModelError) as exc:
        report.checks["H2"] = False
        report.details["H2"] = str(exc)

    # H3: symbol dissipativity at the endstates
    try:
        thetas = [dissipativity_theta(model, *shock.endstate(side)) for side in sides]
        report.theta = min(thetas)
        positive = True
        for side in sides:
            md = mode_data(model, shock.endstate(side)[0], shock.s)
            positive &= all(fam.eta_min > 0 for fam in md.families)
            positive &= all(np.min(np.linalg.eigvals(b).real) > 0 for b in md.beta)
        report.checks["H3"] = report.theta > 0
        report.details["H3"] = f"theta_est={report.theta:.6g}; eta, beta positive: {positive}"
        if report.theta > 0 and not positive:
            report.warnings.append("H3 grid passed but an endstate eta or beta block is not positive")
    except (HyperbolicityError, DefectiveMatrixError, ModelError) as exc:
        report.checks["H3"] = False
        report.details["H3"] = str(exc)

    if model.kind == "jin-xin":
        a2 = float(model.a) ** 2
        speeds2 = [float(np.max(np.asarray(model.dh(shock.endstate(side)[0])) ** 2)) for side in sides]
        report.checks["subcharacteristic"] = all(a2 - d > 1e-12 * a2 for d in speeds2)
        report.details["subcharacteristic"] = f"a^2={a2:.6g}, dh^2={speeds2}"

    _interior_dissipativity(model, shock, report)

    if report.passed:
        logger.info("Hypotheses PASS for %s (theta_est=%.4g)", model.name, report.theta)
    else:
        failed = [k for k, ok in report.checks.items() if not ok]
        logger.warning("Hypotheses FAIL for %s: %s", model.name, ", ".join(failed))
    return report


def _interior_dissipativity(model: RelaxationModel, shock: ShockData, report: HypothesisReport) -> None:
    mode = settings.interior_dissipativity
    if mode == "off":
        return
    bad: list[float] = []
    for u in _segment(shock)[1:-1]:
        try:
            modes = hyperbolic_modes(model, u, None, shock.s)
        except (HyperbolicityError, DefectiveMatrixError):
            continue
        if min(fam.eta_min for fam in modes.families) <= 0:
            bad.append(float(u[0]))
    if mode == "fail":
        report.checks["interior_dissipativity"] = not bad
    if bad:
        msg = f"eta_j not positive at {len(bad)} interior segment point(s), first u_1={bad[0]:.4g}"
        report.warnings.append(msg)
        logger.warning("%s", msg)
