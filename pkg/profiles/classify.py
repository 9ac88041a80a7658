"""Shock classification and profile verification."""

from __future__ import annotations

import logging

import numpy as np

from core.errors import ClassificationError
from core.state import Classification, ProfileReport, ShockData, ShockProfile
from models.base import RelaxationModel
from models.equilibrium import equilibrium_data, rest_point_rates
from profiles.solver import fit_tails

logger = logging.getLogger(__name__)

ELL = 1


def classify(model: RelaxationModel, shock: ShockData, profile: ShockProfile | None = None) -> Classification:
    """Indices i_+-, d_+- and the shock type, with d - r = i - n enforced."""
    if shock.is_constant:
        raise ClassificationError("constant state u+ = u- is not a shock")
    a_minus = equilibrium_data(model, shock.u_minus).speeds - shock.s
    a_plus = equilibrium_data(model, shock.u_plus).speeds - shock.s
    i_minus = int(np.sum(a_minus > 0))
    i_plus = int(np.sum(a_plus < 0))
    d_minus = int(np.sum(rest_point_rates(model, shock.u_minus, shock.v_minus, shock.s).real > 0))
    d_plus = int(np.sum(rest_point_rates(model, shock.u_plus, shock.v_plus, shock.s).real < 0))
    result = classify_indices(model.n, model.r, i_minus, i_plus, d_minus, d_plus)
    if profile is not None:
        profile.classification = result
    logger.info(
        "Classified %s shock: i=(%d,%d) d=(%d,%d) kind=%s pure=%s",
        model.name, i_minus, i_plus, d_minus, d_plus, result.kind, result.pure,
    )
    return result


def classify_indices(n: int, r: int, i_minus: int, i_plus: int, d_minus: int, d_plus: int) -> Classification:
    """Type from the incoming count i against n + 1; pure when the degree matches ell."""
    i = i_minus + i_plus
    d = d_minus + d_plus
    if d - r != i - n:
        raise ClassificationError(f"index identity violated: d - r = {d - r} but i - n = {i - n}")
    if i == n + 1:
        kind, pure = "Lax", True
    elif i > n + 1:
        kind, pure = "overcompressive", i - n == ELL
    else:
        kind, pure = "undercompressive", n + 1 - i == ELL
    if not pure:
        kind = "mixed"
    return Classification(
        n=n,
        r=r,
        i_minus=i_minus,
        i_plus=i_plus,
        d_minus=d_minus,
        d_plus=d_plus,
        ell=ELL,
        kind=kind,
        pure=pure,
        extreme=i_minus == n or i_plus == n,
    )


def verify_profile(profile: ShockProfile) -> ProfileReport:
    """Residuals of a sampled profile; problems become flags, never exceptions."""
    model, shock = profile.model, profile.shock
    flags: list[str] = []

    rh = model.f(shock.u_plus, shock.v_plus) - model.f(shock.u_minus, shock.v_minus)
    rh = float(np.max(np.abs(rh - shock.s * (shock.u_plus - shock.u_minus))))
    if rh > 1e-10:
        flags.append("rankine_hugoniot")

    ref = model.f(shock.u_minus, shock.v_minus) - shock.s * shock.u_minus
    integral = np.array([model.f(u, v) for u, v in zip(profile.u, profile.v)]) - shock.s * profile.u
    drift = float(np.max(np.abs(integral - ref)))
    if drift > 1e-8:
        flags.append("first_integral")

    err_minus = float(np.max(np.abs(profile.state[0] - profile.endstate("-"))))
    err_plus = float(np.max(np.abs(profile.state[-1] - profile.endstate("+"))))
    if err_minus > 1e-6:
        flags.append("endstate_minus")
    if err_plus > 1e-6:
        flags.append("endstate_plus")

    rm = rest_point_rates(model, shock.u_minus, shock.v_minus, shock.s).real
    rp = rest_point_rates(model, shock.u_plus, shock.v_plus, shock.s).real
    pred_minus = float(rm[rm > 0].min()) if np.any(rm > 0) else float("nan")
    pred_plus = float(-rp[rp < 0].max()) if np.any(rp < 0) else float("nan")
    fits = fit_tails(profile)
    for side, pred in (("-", pred_minus), ("+", pred_plus)):
        nu, r2 = fits[side]
        if not (r2 >= 0.999 and abs(nu - pred) <= 0.02 * abs(pred)):
            flags.append(f"tail_fit{side}")

    report = ProfileReport(
        rh_residual=rh,
        first_integral_drift=drift,
        endstate_error_minus=err_minus,
        endstate_error_plus=err_plus,
        nu_minus=fits["-"][0],
        nu_plus=fits["+"][0],
        r2_minus=fits["-"][1],
        r2_plus=fits["+"][1],
        predicted_nu_minus=pred_minus,
        predicted_nu_plus=pred_plus,
        flags=flags,
    )
    if flags:
        logger.warning("Profile verification flags: %s", ", ".join(flags))
    return report
