"""Characteristic, excited and scattered parts of the Green's function."""

from __future__ import annotations

from types import SimpleNamespace

import numpy as np
import pytest
from scipy.integrate import trapezoid

from core.errors import ContourError, ScatteringError
from core.state import ShockData
from greens.apply import contour_green, green_apply
from greens.characteristics import H_apply, characteristic_path, characteristic_share, sample
from greens.errfn import arrival_bracket, errfn, heat_kernel
from greens.kernels import E_eval, S_eval, e_kernel, linear_shift
from greens.scattering import scattering_solve
from simulate.experiments import near_delta
from simulate.linear import evolve_linear

# ============================================================
# Helpers
# ============================================================


def _make_bump(center: float, half_width: float, N: int = 2):
    def bump(x: np.ndarray) -> np.ndarray:
        z = (np.asarray(x, dtype=float) - center) / half_width
        out = np.zeros((z.size, N))
        out[:, 0] = np.where(np.abs(z) < 1.0, (1.0 - z**2) ** 4, 0.0)
        return out

    return bump


def _rel_l1(a: np.ndarray, b: np.ndarray, x: np.ndarray) -> float:
    return float(trapezoid(np.linalg.norm(a - b, axis=1), x) / trapezoid(np.linalg.norm(b, axis=1), x))


# ============================================================
# Error function brackets
# ============================================================


class TestErrfn:
    def test_limits(self):
        assert errfn(-np.inf) == 0.0
        assert errfn(np.inf) == 1.0
        assert errfn(0.0) == pytest.approx(0.5)

    def test_bracket_starts_at_zero(self):
        assert arrival_bracket(-5.0, 0.0, 1.0, 3.0) == 0.0

    def test_bracket_tends_to_one(self):
        assert arrival_bracket(-5.0, 1e4, 1.0, 3.0) == pytest.approx(1.0, abs=1e-12)

    def test_heat_kernel_mass(self):
        z = np.linspace(-60.0, 60.0, 4001)
        assert trapezoid(heat_kernel(z, 3.0 * 10.0), z) == pytest.approx(1.0, rel=1e-8)


# ============================================================
# Characteristic part H
# ============================================================


class TestCharacteristics:
    def test_identity_at_time_zero(self, jx_profile):
        f = jx_profile.dstate
        assert np.max(np.abs(H_apply(jx_profile, f, 0.0) - f)) <= 1e-12

    def test_support_in_cone(self, jx_profile):
        y0, t = -10.0, 10.0
        delta_f = near_delta(jx_profile.x, y0, 0, 2)
        H = np.linalg.norm(H_apply(jx_profile, delta_f, t), axis=1)
        inside = jx_profile.x[H > 1e-12 * H.max()]
        slack = 2.0 * t + 2.5 * jx_profile.dx
        assert inside.min() >= y0 - slack
        assert inside.max() <= y0 + slack

    def test_damping_along_paths(self, jx_profile):
        path = characteristic_path(jx_profile, 0, -30.0, 5.0)
        assert path.z == pytest.approx(-30.0 + 5.0 * path.a_bar)
        assert abs(path.a_bar) == pytest.approx(2.0, rel=1e-3)
        assert path.eta_bar > 0

    def test_sample_zero_outside_grid(self):
        grid = np.linspace(0.0, 1.0, 11)
        out = sample(np.ones((11, 2)), np.array([-1.0, 0.5, 2.0]), grid)
        np.testing.assert_allclose(out, [[0.0, 0.0], [1.0, 1.0], [0.0, 0.0]])


# ============================================================
# Scattering table
# ============================================================


class TestScattering:
    def test_coefficients(self, jx_table):
        assert set(jx_table.coefficients) == {("-", 0), ("+", 0)}
        for key in jx_table.coefficients:
            assert jx_table.coefficients[key]["zero"] == pytest.approx([0.5])
            assert jx_table.coefficients[key]["minus"].size == 0

    def test_pi_agrees_across_sides(self, jx_table):
        assert jx_table.pi_mismatch <= 1e-12
        np.testing.assert_allclose(jx_table.pi, [[0.5, 0.0]], atol=1e-12)

    def test_determinants(self, jx_table):
        assert abs(jx_table.system_det) == pytest.approx(2.0)
        assert abs(jx_table.delta) == pytest.approx(2.0)
        assert jx_table.residual <= 1e-14

    def test_outgoing_and_incoming(self, jx_table):
        minus = jx_table.sides["-"]
        assert list(minus.incoming("-")) == [0]
        assert list(minus.outgoing("-")) == []
        assert minus.beta == pytest.approx([3.0])

    def test_rejects_undercompressive(self, jx_model):
        shock = ShockData.from_model(jx_model, [-1.0], [1.0])
        with pytest.raises(ScatteringError):
            scattering_solve(jx_model, shock, SimpleNamespace(classification=None))

    def test_to_dict(self, jx_table):
        data = jx_table.to_dict()
        assert [c["side"] for c in data["coefficients"]] == ["+", "-"]
        assert data["masses"] == [[2.0]]


# ============================================================
# Excited and scattered parts
# ============================================================


class TestKernels:
    def test_excited_limit_at_shock(self, jx_profile, jx_table):
        E = E_eval(jx_profile, jx_table, 0.0, 1e4, -1.0)
        assert E[0, 0] == pytest.approx(0.0625, rel=1e-6)

    def test_excited_vanishes_at_time_zero(self, jx_table):
        np.testing.assert_allclose(e_kernel(jx_table, np.array([-3.0, 4.0]), 0.0), 0.0)

    def test_scattered_vanishes_before_unit_time(self, jx_profile, jx_table):
        S = S_eval(jx_profile, jx_table, np.linspace(-5, 5, 11), 0.5, -2.0)
        assert np.all(S == 0.0)

    def test_scattered_switch_can_be_dropped(self, jx_profile, jx_table):
        S = S_eval(jx_profile, jx_table, np.linspace(-5, 5, 11), 0.5, -2.0, switch_on=False)
        assert np.any(S != 0.0)
        assert np.all(S_eval(jx_profile, jx_table, 0.0, 0.0, -2.0, switch_on=False) == 0.0)

    def test_scattered_peak_is_a_heat_kernel(self, jx_profile, jx_table):
        t, y = 5.0, -40.0
        modes = jx_table.sides["-"]
        S = S_eval(jx_profile, jx_table, y + modes.speeds[0] * t, t, y)
        expected = modes.R_star[0, 0] * modes.L_star[0, 0] / np.sqrt(4.0 * np.pi * 3.0 * t)
        assert S[0, 0] == pytest.approx(expected, rel=1e-6)

    def test_linear_shift_of_shift_mode(self, jx_table):
        delta, phi = linear_shift(jx_table, -jx_table.dmass, 0.0)
        assert delta == 0.0
        np.testing.assert_allclose(phi, 0.0)


# ============================================================
# Total action
# ============================================================


class TestGreenApply:
    @pytest.mark.slow
    @pytest.mark.parametrize("t, bound", [(1.0, 0.5), (5.0, 0.5), (20.0, 0.15), (60.0, 0.05)])
    def test_shift_mode_is_nearly_stationary(self, jx_profile, jx_table, t, bound):
        f = jx_profile.dstate
        assert _rel_l1(green_apply(jx_profile, jx_table, f, t), f, jx_profile.x) <= bound

    @pytest.mark.slow
    def test_shift_mode_error_shrinks(self, jx_profile, jx_table):
        f = jx_profile.dstate
        errors = [_rel_l1(green_apply(jx_profile, jx_table, f, t), f, jx_profile.x) for t in (5.0, 20.0, 60.0)]
        assert errors[0] > errors[1] > errors[2]

    def test_identity_at_time_zero(self, jx_profile, jx_table):
        f = jx_profile.dstate
        np.testing.assert_allclose(green_apply(jx_profile, jx_table, f, 0.0), f, atol=1e-12)

    def test_characteristic_share_starts_with_all_of_f(self, jx_profile):
        f = jx_profile.dstate
        held = characteristic_share(jx_profile, f, jx_profile.x, 0.0)
        np.testing.assert_allclose(held, f[:, :1], atol=1e-12)

    def test_characteristic_share_is_released(self, jx_profile):
        f = jx_profile.dstate
        x = jx_profile.x
        mass = abs(trapezoid(f[:, 0], x))
        early = abs(trapezoid(characteristic_share(jx_profile, f, x, 1.0)[:, 0], x))
        late = abs(trapezoid(characteristic_share(jx_profile, f, x, 30.0)[:, 0], x))
        # families damp at 1/4 or 3/4 on either side of the layer
        assert 0.4 * mass <= early <= 0.8 * mass
        assert late <= 1e-3 * mass

    @pytest.mark.slow
    def test_near_field_mass_is_not_double_counted(self, jx_profile, jx_table):
        f = jx_profile.dstate
        x = jx_profile.x
        mass_in = trapezoid(f[:, 0], x)
        mass_out = trapezoid(green_apply(jx_profile, jx_table, f, 1.0)[:, 0], x)
        assert abs(mass_out - mass_in) <= 0.2 * abs(mass_in)


    @pytest.mark.slow
    def test_mass_balance(self, jx_profile, jx_table):
        x = jx_profile.x
        delta_f = near_delta(x, -10.0, 0, 2)
        late = green_apply(jx_profile, jx_table, delta_f, 200.0)
        mass_in = trapezoid(delta_f[:, 0], x)
        assert abs(trapezoid(late[:, 0], x) - mass_in) <= 1e-6 * abs(mass_in)

    def test_zero_data(self, jx_profile, jx_table):
        out = green_apply(jx_profile, jx_table, np.zeros_like(jx_profile.dstate), 3.0)
        assert np.all(out == 0.0)


class TestBromwich:
    def test_rejects_nonpositive_abscissa(self, jx_profile):
        with pytest.raises(ContourError):
            contour_green(jx_profile, _make_bump(-5.0, 4.0), 1.0, abscissa=0.0)

    def test_rejects_nonpositive_time(self, jx_profile):
        with pytest.raises(ContourError):
            contour_green(jx_profile, _make_bump(-5.0, 4.0), 0.0)

    @pytest.mark.slow
    def test_matches_simulator(self, jx_profile):
        bump = _make_bump(-5.0, 4.0)
        inverted = contour_green(jx_profile, bump, 1.0)
        run = evolve_linear(jx_profile, bump, 1.0, times=[1.0], dx=jx_profile.dx / 2)
        simulated = np.column_stack([np.interp(inverted.x, run.x, run.snapshots[-1][:, c]) for c in range(2)])
        assert _rel_l1(inverted.values, simulated, inverted.x) <= 0.05
        assert inverted.to_dict()["samples"] == inverted.samples
