"""Time-step kernels, linear and nonlinear runs, and the decay experiments."""

from __future__ import annotations

import numpy as np
import pytest

from core.errors import SimulationError
from core.state import uniform_grid
from simulate.experiments import decay_report, fit_window, greens_compare, near_delta, nonlinear_experiment
from simulate.linear import evolve_linear, snapshot_labels, snapshot_steps
from simulate.nonlinear import evolve_nonlinear
from simulate.schemes import ExactTransport, linear_source, rusanov_step, split_flux_matrices, upwind_step

_JX_A = np.array([[0.0, 1.0], [4.0, 0.0]])

# ============================================================
# Helpers
# ============================================================


def _make_pulse(x: np.ndarray, center: float = 0.0, width: float = 1.0) -> np.ndarray:
    out = np.zeros((x.size, 2))
    out[:, 0] = np.exp(-(((x - center) / width) ** 2))
    return out


# ============================================================
# Kernels
# ============================================================


class TestExactTransport:
    def test_aligned_speeds(self):
        transport = ExactTransport.build(_JX_A, 0.1)
        assert transport is not None
        assert transport.dt == pytest.approx(0.05)
        assert sorted(transport.shifts.tolist()) == [-1, 1]

    def test_unaligned_speeds(self):
        assert ExactTransport.build(np.diag([1.0, 3.0 ** 0.5]), 0.1) is None

    def test_vanishing_matrix(self):
        with pytest.raises(SimulationError):
            ExactTransport.build(np.zeros((2, 2)), 0.1)

    def test_step_shifts_characteristic_variables(self):
        transport = ExactTransport.build(_JX_A, 0.1)
        x = uniform_grid(5.0, 0.1)
        r_plus = np.array([1.0, 2.0])  # right vector of speed +2
        U = np.exp(-(x**2))[:, None] * r_plus[None, :]
        out = transport.step(U, np.zeros(2), np.zeros(2))
        np.testing.assert_allclose(out[1:], U[:-1], atol=1e-12)


class TestFluxes:
    def test_split_matrices_sum(self):
        A = np.stack([_JX_A, np.array([[1.0, 0.5], [0.0, -2.0]])])
        plus, minus = split_flux_matrices(A)
        np.testing.assert_allclose(plus + minus, A, atol=1e-12)
        assert np.all(np.linalg.eigvals(plus[0]).real >= -1e-12)
        assert np.all(np.linalg.eigvals(minus[0]).real <= 1e-12)

    def test_upwind_conserves_mass(self):
        x = uniform_grid(20.0, 0.1)
        U = _make_pulse(x)
        A = np.broadcast_to(_JX_A, (x.size, 2, 2)).copy()
        plus, minus = split_flux_matrices(A)
        out = upwind_step(U, plus, minus, 0.04, 0.1, np.zeros(2), np.zeros(2))
        np.testing.assert_allclose(out.sum(axis=0), U.sum(axis=0), atol=1e-12)

    def test_rusanov_keeps_constant_state(self, jx_model):
        W = np.tile([0.5, 0.125], (50, 1))
        out = rusanov_step(jx_model, W, 0.0, 2.5, 0.01, 0.1, W[0], W[-1])
        np.testing.assert_allclose(out, W, atol=1e-14)

    def test_linear_source_without_coupling(self):
        U = np.ones((4, 2))
        np.testing.assert_allclose(linear_source(U, np.zeros((4, 2, 2)), 0.1), U)


class TestSnapshots:
    def test_steps(self):
        steps, total = snapshot_steps([0.0, 0.5, 1.0], 0.05, 1.0)
        assert steps.tolist() == [0, 10, 20]
        assert total == 20

    def test_times_beyond_horizon(self):
        with pytest.raises(SimulationError):
            snapshot_steps([2.0], 0.05, 1.0)

    def test_labels_keep_requested_times(self):
        labels = snapshot_labels([0.0, 0.3, 0.7], 0.1 / 3.0, 1.0)
        assert sorted(labels.values()) == [0.0, 0.3, 0.7]
        assert labels[21] == 0.7

    def test_fit_window_needs_a_decade(self):
        times = np.arange(0.0, 101.0)
        assert fit_window(times, 10.0).sum() == 91
        with pytest.raises(SimulationError):
            fit_window(times, 10.0, 50.0)


# ============================================================
# Linear runs
# ============================================================


class TestLinearRuns:
    def test_constant_state_uses_exact_transport(self, constant_profile):
        run = evolve_linear(constant_profile, _make_pulse, 5.0, times=[0.0, 5.0], dx=0.1)
        assert run.scheme == "exact-transport-strang"
        assert run.mass_drift() <= 1e-12

    def test_shock_mass_conservation(self, jx_profile):
        grid = uniform_grid(jx_profile.X, 0.1)
        f0 = near_delta(grid, -10.0, 0, 2)
        run = evolve_linear(jx_profile, f0, 50.0, times=np.arange(0.0, 51.0, 10.0), dx=0.1, grid=grid)
        assert run.mass_drift() <= 1e-8
        lo, hi = run.support(1)
        assert lo >= -10.0 - 2.0 * 10.0 - 0.2
        assert hi <= -10.0 + 2.0 * 10.0 + 0.2

    def test_rows(self, constant_profile):
        run = evolve_linear(constant_profile, _make_pulse, 1.0, times=[0.0, 0.3, 1.0], dx=0.1)
        rows = run.rows()
        assert [r["t"] for r in rows] == [0.0, 0.3, 1.0]
        assert set(rows[0]) == {"t", "L1", "L2", "Linf", "delta_hat"}
        assert rows[0]["Linf"] == pytest.approx(1.0)

    def test_component_mismatch(self, jx_profile):
        with pytest.raises(SimulationError):
            evolve_linear(jx_profile, lambda x: np.zeros((x.size, 3)), 1.0, dx=0.1)

    @pytest.mark.slow
    def test_decay_rates(self, jx_fine_profile, jx_fine_table):
        modes = jx_fine_table.sides["-"]
        direction = modes.R_star[:, modes.incoming("-")[0]]
        grid = uniform_grid(168.0, 0.05)
        U0 = np.exp(-(((grid + 150.0) / 3.0) ** 2))[:, None] * direction[None, :]
        run = evolve_linear(jx_fine_profile, U0, 100.0, times=np.arange(0.0, 101.0), dx=0.05, grid=grid)
        fits = decay_report(run, jx_fine_profile, jx_fine_table, t_min=10.0).fits
        assert -0.35 <= fits["L2"].slope <= -0.15
        assert -0.65 <= fits["Linf"].slope <= -0.35
        assert -0.1 <= fits["L1"].slope <= 0.1
        assert min(fits["L2"].r2, fits["Linf"].r2) >= 0.95

    @pytest.mark.slow
    def test_greens_comparison(self, jx_fine_profile, jx_fine_table):
        report = greens_compare(jx_fine_profile, jx_fine_table, -10.0, [10.0, 30.0, 40.0], dx=0.05)
        assert report.error(30.0) <= 0.35
        assert report.decreasing
        assert all(row["in_cone"] for row in report.rows)


# ============================================================
# Nonlinear runs
# ============================================================


class TestNonlinearRuns:
    def test_profile_is_a_steady_state(self, jx_model, jx_profile):
        x = uniform_grid(jx_profile.X + 20.0, 0.1)
        W0 = jx_profile.interpolate(x)
        run = evolve_nonlinear(jx_model, W0, 5.0, x=x, shock=jx_profile.shock, times=[0.0, 5.0])
        assert run.scheme == "exact-transport-strang"
        assert np.max(np.abs(run.snapshots[-1] - W0)) <= 5e-3

    @pytest.mark.slow
    def test_profile_drift_over_long_horizon(self, jx_model, jx_fine_profile):
        x = uniform_grid(jx_fine_profile.X + 20.0, jx_fine_profile.dx)
        W0 = jx_fine_profile.interpolate(x)
        run = evolve_nonlinear(jx_model, W0, 50.0, x=x, shock=jx_fine_profile.shock, times=[0.0, 25.0, 50.0])
        assert run.mass_drift() <= 1e-6
        assert np.max(np.abs(run.snapshots[-1] - W0)) <= 1e-4

    @pytest.mark.slow
    def test_orbital_stability(self, jx_model, jx_fine_profile, jx_fine_table):
        report = nonlinear_experiment(jx_model, jx_fine_profile, jx_fine_table, 0.01, T=100.0, t_min=10.0)
        assert -0.65 <= report.fit.slope <= -0.35
        assert report.fit.window[0] == pytest.approx(np.log1p(10.0))
        assert np.max(np.abs(report.delta_hat)) <= 0.02
        assert report.plateau_error <= 0.1
        assert report.predicted_shift == pytest.approx(0.01 * np.sqrt(np.pi) / 2.0, rel=1e-3)
