"""Models, equilibrium data, dispersion rates and hypothesis checks."""

from __future__ import annotations

import numpy as np
import pytest

from core.errors import HyperbolicityError, ModelError
from core.state import ShockData
from models.base import RelaxationModel, jacobians, validate_model
from models.equilibrium import (
    chapman_enskog,
    check_hypotheses,
    dispersion_exact,
    dissipativity_theta,
    equilibrium_data,
    fit_dispersion_rates,
    mode_data,
    rest_point_rates,
)
from models.jin_xin import jin_xin

# ============================================================
# Helpers
# ============================================================


def _make_custom_burgers(a: float = 2.0, with_equilibrium: bool = False) -> RelaxationModel:
    """Jin-Xin Burgers written as a custom model: no analytic Jacobians."""
    a2 = a * a
    return RelaxationModel(
        n=1,
        r=1,
        f=lambda u, v: np.asarray(v, dtype=float),
        g=lambda u, v: a2 * np.asarray(u, dtype=float),
        q=lambda u, v: 0.5 * np.asarray(u, dtype=float) ** 2 - np.asarray(v, dtype=float),
        v_star=(lambda u: 0.5 * np.asarray(u) ** 2) if with_equilibrium else None,
        name="custom-burgers",
    )


# ============================================================
# Jin-Xin construction
# ============================================================


class TestJinXin:
    def test_blocks_at_left_state(self, jx_model):
        A, Q = jacobians(jx_model, np.array([1.0]), np.array([0.5]))
        np.testing.assert_allclose(A, [[0.0, 1.0], [4.0, 0.0]])
        np.testing.assert_allclose(Q, [[0.0, 0.0], [1.0, -1.0]])

    def test_equilibrium_is_h(self, jx_model):
        np.testing.assert_allclose(jx_model.equilibrium(np.array([0.3])), [0.045])

    def test_rejects_nonpositive_speed(self):
        with pytest.raises(ModelError):
            jin_xin(0.0, [0.0, 0.0, 0.5])

    def test_rejects_empty_flux(self):
        with pytest.raises(ModelError):
            jin_xin(1.0, [])

    def test_model_error_is_value_error(self):
        with pytest.raises(ValueError):
            jin_xin(-1.0, [1.0])

    def test_validate_builtin_has_no_findings(self, jx_model):
        assert validate_model(jx_model, seed=3) == []


# ============================================================
# Custom models
# ============================================================


class TestCustomModel:
    def test_newton_equilibrium(self):
        model = _make_custom_burgers()
        np.testing.assert_allclose(model.equilibrium(np.array([0.6])), [0.18], atol=1e-12)

    def test_finite_difference_jacobians_match_builtin(self, jx_model):
        model = _make_custom_burgers()
        assert model.finite_difference
        u, v = np.array([0.4]), np.array([0.1])
        A_fd, Q_fd = jacobians(model, u, v)
        A, Q = jacobians(jx_model, u, v)
        np.testing.assert_allclose(A_fd, A, atol=1e-6)
        np.testing.assert_allclose(Q_fd, Q, atol=1e-6)

    def test_validate_custom(self):
        assert validate_model(_make_custom_burgers(with_equilibrium=True), seed=1) == []

    def test_wrong_equilibrium_is_reported(self):
        model = _make_custom_burgers()
        model.v_star = lambda u: np.asarray(u, dtype=float)
        findings = validate_model(model, np.array([[0.5]]))
        assert any("q(u, v*(u))" in f for f in findings)

    def test_non_hyperbolic_raises(self):
        model = RelaxationModel(
            n=1,
            r=1,
            f=lambda u, v: np.asarray(v, dtype=float),
            g=lambda u, v: -np.asarray(u, dtype=float),
            q=lambda u, v: -np.asarray(v, dtype=float),
            f_u=lambda u, v: np.zeros((1, 1)),
            f_v=lambda u, v: np.eye(1),
            g_u=lambda u, v: -np.eye(1),
            g_v=lambda u, v: np.zeros((1, 1)),
            q_u=lambda u, v: np.zeros((1, 1)),
            q_v=lambda u, v: -np.eye(1),
        )
        with pytest.raises(HyperbolicityError):
            jacobians(model, np.array([0.0]), np.array([0.0]))


# ============================================================
# Equilibrium and characteristic data
# ============================================================


class TestModeData:
    def test_equilibrium_speeds(self, jx_model):
        assert equilibrium_data(jx_model, [1.0]).speeds == pytest.approx([1.0])
        assert equilibrium_data(jx_model, [-1.0]).speeds == pytest.approx([-1.0])

    @pytest.mark.parametrize("u, expected", [(1.0, [0.75, 0.25]), (-1.0, [0.25, 0.75])])
    def test_eta_by_family(self, jx_model, u, expected):
        md = mode_data(jx_model, [u])
        assert [fam.speed for fam in md.families] == pytest.approx([-2.0, 2.0])
        etas = [float(fam.eta[0, 0]) for fam in md.families]
        assert etas == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("u", [1.0, -1.0, 0.3])
    def test_beta_star(self, jx_model, u):
        B_star, beta = chapman_enskog(jx_model, [u])
        assert B_star[0, 0] == pytest.approx(4.0 - u * u)
        assert beta[0][0, 0] == pytest.approx(4.0 - u * u)

    def test_lifted_modes(self, jx_model):
        md = mode_data(jx_model, [1.0])
        r = md.R_star[:, 0] / md.R_star[0, 0]
        np.testing.assert_allclose(r, [1.0, 1.0])
        assert float(md.L_star[:, 0] @ md.R_star[:, 0]) == pytest.approx(1.0)

    def test_rest_point_rates(self, jx_model):
        assert rest_point_rates(jx_model, [1.0]).real == pytest.approx([0.25])
        assert rest_point_rates(jx_model, [-1.0]).real == pytest.approx([-0.25])


# ============================================================
# Dispersion curves
# ============================================================


class TestDispersion:
    @pytest.mark.parametrize("side", ["-", "+"])
    def test_fitted_rates_match_formulas(self, jx_model, jx_shock, side):
        fit = fit_dispersion_rates(jx_model, jx_shock, side)
        md = mode_data(jx_model, jx_shock.endstate(side)[0])
        assert fit.beta == pytest.approx([3.0], abs=1e-3)
        expected = sorted(float(fam.eta[0, 0]) for fam in md.families)
        assert sorted(fit.eta) == pytest.approx(expected, abs=1e-3)

    def test_sides_swap_eta(self, jx_model, jx_shock):
        left = fit_dispersion_rates(jx_model, jx_shock, "-")
        right = fit_dispersion_rates(jx_model, jx_shock, "+")
        assert left.eta == pytest.approx(right.eta[::-1], abs=1e-3)

    def test_branches_are_continuous(self, jx_model, jx_shock):
        xi = np.linspace(0.01, 5.0, 200)
        lam = dispersion_exact(jx_model, jx_shock, "-", xi)
        jumps = np.max(np.abs(np.diff(lam, axis=0)), axis=0)
        assert np.all(jumps < 0.2)

    def test_origin_is_a_root(self, jx_model, jx_shock):
        lam = dispersion_exact(jx_model, jx_shock, "-", [1e-8])
        assert np.min(np.abs(lam)) < 1e-7


# ============================================================
# Hypotheses
# ============================================================


class TestHypotheses:
    def test_jx_burgers_passes(self, jx_model, jx_shock):
        report = check_hypotheses(jx_model, jx_shock)
        assert report.passed, report.details
        for name in ("H1", "H2", "H3", "subcharacteristic", "rankine_hugoniot"):
            assert report.checks[name]

    def test_theta_estimate_range(self, jx_model, jx_shock):
        report = check_hypotheses(jx_model, jx_shock)
        assert 0.15 <= report.theta <= 0.30

    def test_theta_is_minimum_over_sides(self, jx_model, jx_shock):
        left = dissipativity_theta(jx_model, *jx_shock.endstate("-"))
        right = dissipativity_theta(jx_model, *jx_shock.endstate("+"))
        report = check_hypotheses(jx_model, jx_shock)
        assert report.theta == pytest.approx(min(left, right))

    def test_subcharacteristic_violation_is_reported(self):
        model = jin_xin(0.9, [0.0, 0.0, 0.5])
        shock = ShockData.from_model(model, [1.0], [-1.0])
        report = check_hypotheses(model, shock)
        assert not report.passed
        assert not report.checks["subcharacteristic"]

    def test_rankine_hugoniot_speed(self, jx_model):
        shock = ShockData.from_model(jx_model, [1.0], [0.0])
        assert shock.s == pytest.approx(0.5)
        assert check_hypotheses(jx_model, shock).checks["rankine_hugoniot"]
