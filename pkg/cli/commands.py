"""Pipeline stages behind the CLI subcommands; each records PASS/FAIL checks and artifacts."""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from asymptotics.frames import goodman_frame
from asymptotics.gap import gap_basis
from asymptotics.reduced_flow import direct_flow, reduced_flow_first_order
from asymptotics.sylvester import sylvester
from core.linalg import linear_fit
from core.pipeline import Pipeline, Stage
from core.state import PipelineState, ShockData, uniform_grid
from evans.function import evans_value
from evans.modes import coefficient_matrix, limit_matrices, limit_roots, mode_expansion
from evans.resolvent import kernel_from_bases, resolvent_jump, stored_bases
from evans.verdict import stability_verdict
from greens.apply import contour_green, green_apply
from greens.characteristics import H_apply
from greens.kernels import E_eval, S_eval
from greens.scattering import scattering_solve
from memory.artifact_store import ArtifactStore
from models.base import RelaxationModel
from models.equilibrium import check_hypotheses, fit_dispersion_rates, mode_data
from models.jin_xin import jin_xin
from profiles.classify import classify, verify_profile
from profiles.solver import solve_profile
from reports.schemas import CheckResult, ExperimentConfig
from simulate.experiments import decay_report, greens_compare, near_delta, nonlinear_experiment
from simulate.linear import evolve_linear

logger = logging.getLogger(__name__)

SUBCOMMANDS: dict[str, list[str]] = {
    "hypotheses": ["hypotheses"],
    "profile": ["profile"],
    "scattering": ["scattering"],
    "evans": ["evans"],
    "greens": ["greens"],
    "simulate": ["simulate"],
    "verify-all": ["hypotheses", "profile", "scattering", "evans", "greens", "simulate"],
}


@dataclass
class RunContext:
    config: ExperimentConfig
    store: ArtifactStore
    tol_scale: float = 1.0
    seed: int = 0
    checks: list[CheckResult] = field(default_factory=list)
    metrics: list[dict] = field(default_factory=list)

    def check(self, name: str, passed: bool, detail: str, value: float | None = None, tolerance: str = "") -> None:
        result = CheckResult(name=name, passed=bool(passed), detail=detail, value=value, tolerance=tolerance)
        self.checks.append(result)
        logger.info("%s", result.line())

    def metric(self, section: str, key: str, value) -> None:
        self.metrics.append({"section": section, "key": key, "value": value})

    def tol(self, value: float) -> float:
        return value * self.tol_scale


def build_model(config: ExperimentConfig) -> tuple[RelaxationModel, ShockData]:
    model = jin_xin(config.model.a, config.model.h_poly, name=config.model.name)
    shock = ShockData.from_model(model, config.shock.u_minus, config.shock.u_plus, s=config.shock.s)
    return model, shock


def _rel_l1(a: np.ndarray, b: np.ndarray, x: np.ndarray) -> float:
    scale = trapezoid(np.linalg.norm(b, axis=1), x)
    return float(trapezoid(np.linalg.norm(a - b, axis=1), x) / scale)


def _smooth_bump(center: float, half_width: float, N: int):
    """(1 - z^2)^4 on |z| < 1 in the u-component, z = (x - center) / half_width."""

    def bump(x: np.ndarray) -> np.ndarray:
        z = (np.asarray(x, dtype=float) - center) / half_width
        out = np.zeros((z.size, N))
        out[:, 0] = np.where(np.abs(z) < 1.0, (1.0 - z**2) ** 4, 0.0)
        return out

    return bump


def _order(lams: np.ndarray, errors: np.ndarray) -> float:
    return linear_fit(np.log(np.abs(lams)), np.log(errors)).slope


def _rotated_field(x: float) -> np.ndarray:
    c, s = np.cos(0.5 * x), np.sin(0.5 * x)
    R = np.array([[c, -s], [s, c]])
    return R @ np.diag([1.0, -1.0]) @ R.T


def _appendix_check(ctx: RunContext, profile, rng: np.random.Generator) -> None:
    """Commutator solve, Goodman frame, Gap-Lemma basis and the scalar reduced flow."""
    model, shock = profile.model, profile.shock
    d1 = np.diag(rng.uniform(1.0, 2.0, 3))
    d2 = np.diag(rng.uniform(-2.0, -1.0, 2))
    syl = sylvester(d1, d2, rng.standard_normal((3, 2)))

    frame = goodman_frame(_rotated_field, (-1.0, 1.0))
    frame_res = frame.residual(np.linspace(-0.9, 0.9, 7))

    lam0 = 0.5 + 0.5j
    A_lim, Q_lim = limit_matrices(model, shock, "-")
    mu, V = limit_roots(A_lim, Q_lim, [lam0])
    limit = np.linalg.solve(A_lim, Q_lim - lam0 * np.eye(model.N))
    gap = gap_basis(
        lambda z: coefficient_matrix(profile, lam0, z, form="W"),
        limit,
        (mu[0, -1], V[0][:, -1]),
        lam=lam0,
    )

    # zeta' = (-eta + delta) zeta from 0 to 2: exact e^{-1.8}, first order e^{-2}(1 + 0.2)
    flow = reduced_flow_first_order(lambda z: -1.0, lambda z: 1.0, 0.1, 1.0, 0.0, 2.0)
    flow_err = flow.error(direct_flow(lambda z: -1.0, lambda z: 1.0, 0.1, 1.0, 0.0, 2.0))
    expected = np.exp(-2.0) * (np.exp(0.2) - 1.2)

    ok = (
        syl.residual <= ctx.tol(1e-12)
        and frame_res <= ctx.tol(1e-8)
        and gap.residual <= ctx.tol(1e-5)
        and abs(flow_err - expected) <= 0.2 * expected
    )
    ctx.check(
        "asymptotics",
        ok,
        f"sylvester residual {syl.residual:.2e}; frame |LR'| {frame_res:.2e}; "
        f"gap basis residual {gap.residual:.2e}; reduced flow error {flow_err:.3e}",
    )


# ==============================================================================
# Stages
# ==============================================================================


def build_stages(ctx: RunContext) -> list[Stage]:
    cfg = ctx.config

    def setup_stage(state: PipelineState) -> dict:
        model, shock = build_model(cfg)
        ctx.store.store_json("shock.json", shock.to_dict())
        return {"model": model, "shock": shock}

    def hypotheses_stage(state: PipelineState) -> dict:
        model, shock = state["model"], state["shock"]
        report = check_hypotheses(model, shock)
        ctx.store.store_json(
            "hypotheses.json",
            {"checks": report.checks, "details": report.details, "warnings": report.warnings, "theta": report.theta},
        )
        failed = [name for name, ok in report.checks.items() if not ok]
        ctx.check("hypotheses", report.passed, "all structural checks pass" if not failed else f"failed: {failed}")
        ctx.check("dissipativity", report.theta > 0, f"theta_est={report.theta:.6g}", report.theta)
        ctx.metric("hypotheses", "theta_est", report.theta)

        rows, worst = [], 0.0
        for side in ("-", "+"):
            md = mode_data(model, shock.endstate(side)[0], shock.s)
            fit = fit_dispersion_rates(model, shock, side)
            eta = np.sort(np.concatenate([np.linalg.eigvals(np.atleast_2d(e)).real for e in md.etas]))
            beta = np.sort(np.concatenate([np.linalg.eigvals(np.atleast_2d(b)).real for b in md.beta]))
            worst = max(worst, float(np.max(np.abs(np.sort(fit.eta) - eta))))
            worst = max(worst, float(np.max(np.abs(np.sort(fit.beta) - beta))))
            for j, value in enumerate(eta):
                rows.append({"side": side, "quantity": "eta", "index": j, "formula": value, "fit": float(np.sort(fit.eta)[j])})
            for j, value in enumerate(beta):
                rows.append({"side": side, "quantity": "beta", "index": j, "formula": value, "fit": float(np.sort(fit.beta)[j])})
        ctx.store.store_csv("rates.csv", rows, ["side", "quantity", "index", "formula", "fit"])
        ctx.check("rates", worst <= ctx.tol(1e-3), f"max |formula - dispersion fit| = {worst:.3e}", worst, "1e-3")
        return {"hypotheses": report}

    def profile_stage(state: PipelineState) -> dict:
        model, shock = state["model"], state["shock"]
        profile = solve_profile(model, shock, X=cfg.grid.X, dx=cfg.grid.dx)
        report = verify_profile(profile)
        cls = classify(model, shock, profile)
        rows = [
            {"x": float(x), **{f"u{j}": float(u[j]) for j in range(model.n)}, **{f"v{j}": float(v[j]) for j in range(model.r)}}
            for x, u, v in zip(profile.x, profile.u, profile.v)
        ]
        ctx.store.store_csv("profile.csv", rows)
        ctx.store.store_json("profile_report.json", {**dataclasses.asdict(report), "ok": report.ok})
        ctx.store.store_json("classification.json", {**dataclasses.asdict(cls), "i": cls.i, "d": cls.d})
        ctx.check("profile", report.ok, f"flags={report.flags}; nu-={report.nu_minus:.5g} nu+={report.nu_plus:.5g}")
        ctx.check(
            "structure",
            cls.identity_holds and cls.pure,
            f"i={cls.i} d={cls.d} kind={cls.kind} pure={cls.pure}",
        )
        ctx.metric("profile", "nu_minus", report.nu_minus)
        ctx.metric("profile", "nu_plus", report.nu_plus)
        fine = profile if np.isclose(profile.dx, cfg.grid.fine_dx) else solve_profile(model, shock, X=cfg.grid.X, dx=cfg.grid.fine_dx)
        return {"profile": profile, "profile_report": report, "classification": cls, "fine_profile": fine}

    def scattering_stage(state: PipelineState) -> dict:
        model, shock, profile = state["model"], state["shock"], state["profile"]
        table = scattering_solve(model, shock, profile)
        ctx.store.store_json("scattering.json", table.to_dict())
        ok = (
            table.residual <= ctx.tol(1e-10)
            and table.pi_mismatch <= ctx.tol(1e-10)
            and abs(abs(table.system_det) - abs(table.delta)) <= ctx.tol(1e-8) * (1.0 + abs(table.delta))
        )
        ctx.check(
            "scattering",
            ok,
            f"det={table.system_det:.6g} Delta={table.delta:.6g} residual={table.residual:.2e} pi mismatch={table.pi_mismatch:.2e}",
        )
        ctx.metric("scattering", "Delta", table.delta)
        ctx.metric("scattering", "system_det", table.system_det)
        fine = state["fine_profile"]
        fine_table = table if fine is profile else scattering_solve(model, shock, fine)
        return {"scattering": table, "fine_scattering": fine_table}

    def evans_stage(state: PipelineState) -> dict:
        model, shock, profile = state["model"], state["shock"], state["profile"]

        # mode expansions: residual orders over two decades
        high = np.logspace(1, 3, 9)
        low = np.logspace(-3, -1, 9)
        high_order, low_order = np.inf, np.inf
        for side in ("-", "+"):
            e_high = np.array([mode_expansion(model, shock, lam, side, "high-frequency").error for lam in high])
            e_low = np.array([mode_expansion(model, shock, lam, side, "low-frequency").error for lam in low])
            high_order = min(high_order, -_order(high, e_high))
            low_order = min(low_order, _order(low, e_low))
        ctx.check("mode_expansions", high_order >= 0.9 and low_order >= 2.7,
                  f"high-frequency order {high_order:.3f}, low-frequency order {low_order:.3f}")

        # resolvent: jump and decay
        rng = np.random.default_rng(ctx.seed)
        lams = rng.uniform(0.2, 2.0, 20) + 1j * rng.uniform(-3.0, 3.0, 20)
        ys = rng.uniform(-5.0, 5.0, 20)
        bases = stored_bases(profile, lams)
        worst = 0.0
        for lam, y in zip(lams, ys):
            jump = resolvent_jump(profile, lam, y, bases=bases)
            expected = -np.linalg.inv(profile.coefficients.at(y)[0])
            worst = max(worst, float(np.max(np.abs(jump - expected)) / np.max(np.abs(expected))))
        dist = np.linspace(1.0, 10.0, 10)
        rates = []
        for index in range(4):
            mags = [np.linalg.norm(kernel_from_bases(bases, index, d, 0.0)) for d in dist]
            rates.append(-linear_fit(dist, np.log(mags)).slope)
        ctx.check("resolvent", worst <= ctx.tol(1e-8) and min(rates) > 0,
                  f"max jump error {worst:.2e}; min decay rate {min(rates):.4g}", worst, "1e-8")

        # conjugate symmetry and windings
        sym = 0.0
        for re, im in cfg.contour.symmetry_points:
            lam = complex(re, im)
            d = evans_value(profile, lam)
            dc = evans_value(profile, lam.conjugate())
            sym = max(sym, abs(np.exp(dc.log - np.conj(d.log)) - 1.0))
        verdict = stability_verdict(profile, eta1=cfg.contour.eta1, r0=cfg.contour.r0, radius=cfg.contour.radius)
        ctx.store.store_json("evans_verdict.json", {**verdict.to_dict(), "symmetry_defect": sym})
        for name, report in verdict.contours.items():
            ctx.store.store_csv(
                f"contour_{name}.csv",
                [
                    {"s": float(s), "re_lambda": lam.real, "im_lambda": lam.imag, "log_abs_D": lg.real, "arg_D": lg.imag}
                    for s, lam, lg in zip(report.params, report.lam, report.log)
                ],
            )
        ctx.check("evans_symmetry", sym <= ctx.tol(1e-8), f"|D(conj lam)/conj D(lam) - 1| = {sym:.2e}", sym, "1e-8")
        ctx.check(
            "evans_verdict",
            bool(verdict.script_D),
            f"D1={verdict.label('D1')} D2={verdict.label('D2')} D={verdict.label('script_D')} "
            f"winding big={verdict.winding_big} origin={verdict.winding_origin}",
        )
        # Q + 0.04 I moves the translation zero to lambda = 0.04: inside the outer contour,
        # outside the small circle. The segment Re lambda = -0.01 stays right of the shifted
        # branch points at 0.04 - a*^2 / (4 beta*).
        shifted = stability_verdict(profile.with_spectral_shift(0.04), eta1=0.01, r0=0.01, radius=cfg.contour.radius)
        ctx.check(
            "evans_oracle",
            shifted.winding_big is not None and shifted.winding_big > 0 and shifted.D1 is False,
            f"shifted coupling: D1={shifted.label('D1')} D={shifted.label('script_D')} "
            f"winding big={shifted.winding_big} origin={shifted.winding_origin}",
        )
        ctx.metric("evans", "winding_big", verdict.winding_big)
        ctx.metric("evans", "winding_origin", verdict.winding_origin)
        ctx.metric("evans", "Delta", verdict.delta)
        ctx.metric("evans", "mode_order_high", high_order)
        ctx.metric("evans", "mode_order_low", low_order)

        _appendix_check(ctx, profile, rng)
        return {"verdict": verdict}

    def greens_stage(state: PipelineState) -> dict:
        profile, table = state["profile"], state["scattering"]
        x = profile.x
        N = profile.model.N
        g = cfg.greens

        f_mode = profile.dstate
        identity = float(np.max(np.abs(H_apply(profile, f_mode, 0.0) - f_mode)))
        ctx.check("H_identity", identity <= ctx.tol(1e-12), f"max |H(0) f - f| = {identity:.2e}", identity, "1e-12")

        delta_f = near_delta(x, g.y0, 0, N)
        rows = []
        for t in g.field_times:
            Hu = H_apply(profile, delta_f, t)[:, 0]
            Eu = E_eval(profile, table, x, t, g.y0)[:, 0, 0]
            Su = S_eval(profile, table, x, t, g.y0)[:, 0, 0]
            for xi, h, e, s in zip(x, Hu, Eu, Su):
                rows.append({"x": float(xi), "t": t, "y0": g.y0, "Hu": h, "Eu": e, "Su": s, "total_u": h + e + s})
        ctx.store.store_csv("greens_field.csv", rows, ["x", "t", "y0", "Hu", "Eu", "Su", "total_u"])

        speed = float(np.max(np.abs(profile.coefficients.fields.speeds)))
        t_cone = g.field_times[-1]
        H_t = np.linalg.norm(H_apply(profile, delta_f, t_cone), axis=1)
        inside = x[H_t > 1e-12 * H_t.max()]
        slack = speed * t_cone + 2.5 * profile.dx
        in_cone = bool(inside.min() >= g.y0 - slack and inside.max() <= g.y0 + slack)
        ctx.check("H_support", in_cone, f"support [{inside.min():.4g}, {inside.max():.4g}] at t={t_cone:g}, cone half-width {slack:.4g}")

        # the leading-order decomposition is exact only once the slow mass has crossed the layer
        stationary = [_rel_l1(green_apply(profile, table, f_mode, t), f_mode, x) for t in g.stationary_times]
        within = all(err <= ctx.tol(bound) for err, bound in zip(stationary, g.stationary_bounds))
        detail = ", ".join(
            f"t={t:g} {err:.4f} (<= {bound:g})" for t, err, bound in zip(g.stationary_times, stationary, g.stationary_bounds)
        )
        ctx.check("greens_stationary", within, f"L1 error of G applied to the shift mode: {detail}",
                  stationary[-1], f"{g.stationary_bounds[-1]:g}")

        late = green_apply(profile, table, delta_f, 200.0)
        mass_in = trapezoid(delta_f[:, 0], x)
        mass_out = trapezoid(late[:, 0], x)
        mass_err = abs(mass_out - mass_in) / abs(mass_in)
        ctx.check("greens_mass", mass_err <= ctx.tol(1e-6), f"relative u-mass error at t=200: {mass_err:.2e}", mass_err, "1e-6")

        bump = _smooth_bump(center=-5.0, half_width=4.0, N=N)
        inverted = contour_green(profile, bump, g.contour_t, height=g.contour_height)
        run = evolve_linear(profile, bump, g.contour_t, times=[g.contour_t], dx=profile.dx / 2)
        simulated = np.column_stack([np.interp(inverted.x, run.x, run.snapshots[-1][:, c]) for c in range(N)])
        contour_err = _rel_l1(inverted.values, simulated, inverted.x)
        ctx.store.store_json("contour_green.json", {**inverted.to_dict(), "relative_l1": contour_err})
        ctx.check("contour_inversion", contour_err <= ctx.tol(0.05),
                  f"relative L1 vs simulator at t={g.contour_t}: {contour_err:.4f} (tail {inverted.tail:.2e})", contour_err, "0.05")
        for t, err in zip(g.stationary_times, stationary):
            ctx.metric("greens", f"stationary_t{t:g}", err)
        ctx.metric("greens", "contour_error", contour_err)
        return {"greens": {"stationary": stationary, "mass_error": mass_err, "contour_error": contour_err}}

    def simulate_stage(state: PipelineState) -> dict:
        model = state["model"]
        profile, table = state["fine_profile"], state["fine_scattering"]
        sim = cfg.simulation
        dx = cfg.grid.sim_dx or profile.dx

        # linear decay from far-field data moving along the incoming equilibrium mode
        modes = table.sides["-"]
        direction = modes.R_star[:, modes.incoming("-")[0]]
        span = abs(sim.decay_center) + 6.0 * sim.decay_width
        grid = uniform_grid(span, dx)
        U0 = np.exp(-(((grid - sim.decay_center) / sim.decay_width) ** 2))[:, None] * direction[None, :]
        times = np.arange(0.0, sim.T_linear + 0.5, 1.0)
        run = evolve_linear(profile, U0, sim.T_linear, times=times, dx=dx, grid=grid)
        decay = decay_report(run, profile, table, t_min=sim.fit_start)
        ctx.store.store_csv("norms_linear.csv", run.rows(), ["t", "L1", "L2", "Linf", "delta_hat"])
        ctx.store.store_json("decay.json", decay.to_dict())
        fits = decay.fits
        ok = (
            -0.35 <= fits["L2"].slope <= -0.15
            and -0.65 <= fits["Linf"].slope <= -0.35
            and -0.1 <= fits["L1"].slope <= 0.1
            and min(fits["L2"].r2, fits["Linf"].r2) >= 0.95
        )
        ctx.check("linear_decay", ok, ", ".join(f"{k} slope {v.slope:.3f} (r2 {v.r2:.3f})" for k, v in fits.items()))
        for label, fit in fits.items():
            ctx.metric("decay", f"{label}_slope", fit.slope)

        g = cfg.greens
        compare = greens_compare(profile, table, g.y0, g.compare_times, dx=dx)
        ctx.store.store_json("greens_compare.json", compare.to_dict())
        at30 = compare.error(30.0)
        ctx.check("greens_compare", at30 <= ctx.tol(0.35) and compare.decreasing,
                  f"u error at t=30: {at30:.4f}; decreasing={compare.decreasing}", at30, "0.35")

        # conservation and finite propagation from the same near-delta data
        delta_grid = uniform_grid(max(profile.X, abs(g.y0)), dx)
        cons = evolve_linear(profile, near_delta(delta_grid, g.y0, 0, model.N), 50.0, times=np.arange(0, 51, 10.0), dx=dx, grid=delta_grid)
        drift = cons.mass_drift()
        in_cone = all(row["in_cone"] for row in compare.rows)
        ctx.check("conservation", drift <= ctx.tol(1e-8) and in_cone, f"u-mass drift {drift:.2e}; support in cone={in_cone}", drift, "1e-8")

        nl = nonlinear_experiment(model, profile, table, sim.amplitude, sim.shape, T=sim.T_nonlinear, t_min=sim.nonlinear_fit_start)
        ctx.store.store_csv("nonlinear.csv", nl.rows(), ["t", "delta_hat", "delta_lin", "Linf"])
        ctx.store.store_json("nonlinear.json", nl.to_dict())
        ok = -0.65 <= nl.fit.slope <= -0.35 and float(np.max(np.abs(nl.delta_hat))) <= 2 * sim.amplitude and nl.plateau_error <= ctx.tol(0.1)
        ctx.check("nonlinear_stability", ok,
                  f"Linf slope {nl.fit.slope:.3f}; plateau {nl.plateau:.6g} vs {nl.predicted_shift:.6g}")
        ctx.metric("nonlinear", "Linf_slope", nl.fit.slope)
        ctx.metric("nonlinear", "plateau", nl.plateau)
        return {"simulation": {"decay": decay.to_dict(), "compare": compare.to_dict(), "nonlinear": nl.to_dict()}}

    return [
        Stage("setup", setup_stage),
        Stage("hypotheses", hypotheses_stage, ("setup",)),
        Stage("profile", profile_stage, ("setup",)),
        Stage("scattering", scattering_stage, ("profile",)),
        Stage("evans", evans_stage, ("profile",)),
        Stage("greens", greens_stage, ("scattering",)),
        Stage("simulate", simulate_stage, ("scattering",)),
    ]


def enabled_stages(config: ExperimentConfig, subcommand: str) -> list[str]:
    flags = config.experiments
    return [name for name in SUBCOMMANDS[subcommand] if getattr(flags, name)]


def build_pipeline(ctx: RunContext) -> Pipeline:
    return Pipeline(build_stages(ctx))
