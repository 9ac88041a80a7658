"""Endstate modes, Evans function values, contours and the stability verdict."""

from __future__ import annotations

import numpy as np
import pytest

from core.errors import ClassificationError, ContourError, SpectralSplittingError
from core.linalg import linear_fit
from core.state import ShockData
from evans.contour import circle, default_contours, evans_on_contour, outer_contour
from evans.function import evans_value
from evans.modes import limit_matrices, limit_roots, mode_expansion, stable_count
from evans.verdict import liu_majda_delta, liu_majda_determinant, outgoing_modes, stability_verdict

# ============================================================
# Helpers
# ============================================================


def _make_order(lams: np.ndarray, errors: np.ndarray) -> float:
    return linear_fit(np.log(np.abs(lams)), np.log(errors)).slope


# ============================================================
# Endstate modes
# ============================================================


class TestLimitRoots:
    def test_roots_solve_the_pencil(self, jx_model, jx_shock):
        A, Q = limit_matrices(jx_model, jx_shock, "-")
        lams = np.array([0.3 + 1j, 2.0, -0.01 + 5j])
        mu, V = limit_roots(A, Q, lams)
        for lam, m, vecs in zip(lams, mu, V):
            for j in range(2):
                res = (-m[j] * A + Q - lam * np.eye(2)) @ vecs[:, j]
                assert np.max(np.abs(res)) <= 1e-12
            assert m[0].real <= m[1].real

    def test_stable_count(self, jx_model, jx_shock):
        A, Q = limit_matrices(jx_model, jx_shock, "+")
        assert stable_count(A, Q, 1.0) == 1

    def test_exact_regime(self, jx_model, jx_shock):
        exp = mode_expansion(jx_model, jx_shock, 1.0 + 1.0j, "-")
        assert exp.residual <= 1e-12
        assert exp.k == 1
        assert exp.stable.size + exp.unstable.size == 2


class TestModeExpansions:
    @pytest.mark.parametrize("side", ["-", "+"])
    def test_high_frequency_order(self, jx_model, jx_shock, side):
        lams = np.logspace(1, 3, 9)
        errors = np.array([mode_expansion(jx_model, jx_shock, lam, side, "high-frequency").error for lam in lams])
        assert -_make_order(lams, errors) >= 0.9

    @pytest.mark.parametrize("side", ["-", "+"])
    def test_low_frequency_order(self, jx_model, jx_shock, side):
        lams = np.logspace(-3, -1, 9)
        errors = np.array([mode_expansion(jx_model, jx_shock, lam, side, "low-frequency").error for lam in lams])
        assert _make_order(lams, errors) >= 2.7

    def test_low_frequency_fast_root(self, jx_model, jx_shock):
        exp = mode_expansion(jx_model, jx_shock, 1e-3, "-", "low-frequency")
        assert exp.fast.size == 1
        assert abs(exp.fast[0]) > 0.1

    def test_coalescing_roots_raise(self, jx_model):
        sonic = ShockData.from_model(jx_model, [0.0], [0.0])
        with pytest.raises(SpectralSplittingError):
            # sonic equilibrium state: A^{-1} Q is nilpotent, a double root at lambda = 0
            mode_expansion(jx_model, sonic, 0.0, "-")

    def test_distinct_roots_pass_the_guard(self, jx_model, jx_shock):
        exp = mode_expansion(jx_model, jx_shock, 0.3, "-")
        gaps = np.abs(exp.mu[:, None] - exp.mu[None, :])
        np.fill_diagonal(gaps, np.inf)
        assert np.isfinite(gaps.min())
        assert gaps.min() > 1e-3


# ============================================================
# Evans function
# ============================================================


class TestEvansValue:
    @pytest.mark.parametrize("lam", [0.5 + 0.5j, 2.0 - 1.0j, 0.1 + 3.0j])
    def test_conjugate_symmetry(self, jx_profile, lam):
        d = evans_value(jx_profile, lam)
        dc = evans_value(jx_profile, np.conj(lam))
        assert abs(np.exp(dc.log - np.conj(d.log)) - 1.0) <= 1e-8

    def test_real_on_real_axis(self, jx_profile):
        d = evans_value(jx_profile, 1.0)
        assert abs(np.sin(d.arg)) <= 1e-8

    def test_value_is_finite(self, jx_profile):
        d = evans_value(jx_profile, 1.0 + 2.0j)
        assert np.isfinite(d.log_abs)
        assert d.k == 1


class TestContours:
    def test_outer_contour_closes(self):
        contour = outer_contour(30.0, 0.05)
        params = contour.initial_params(64)
        lam = contour(params)
        assert lam[0] == pytest.approx(lam[-1])
        assert np.max(np.abs(lam)) <= 30.0 + 1e-12
        assert np.min(lam.real) == pytest.approx(-0.05)

    def test_radius_must_exceed_eta1(self):
        with pytest.raises(ContourError):
            outer_contour(0.01, 0.05)

    def test_default_contours(self, jx_profile):
        outer, inner = default_contours(jx_profile, eta1=0.05, r0=0.05, radius=30.0)
        assert outer.name == "outer"
        assert inner.name == "inner"

    @pytest.mark.slow
    def test_constant_state_has_no_zeros(self, constant_profile):
        report = evans_on_contour(constant_profile, circle(0.5, center=1.0))
        assert report.winding == 0


# ============================================================
# Transversality and verdict
# ============================================================


class TestVerdict:
    def test_outgoing_modes_of_lax_shock(self, jx_model, jx_shock):
        assert outgoing_modes(jx_model, jx_shock).shape == (1, 0)

    def test_delta(self, jx_model, jx_shock, jx_profile):
        assert abs(liu_majda_delta(jx_model, jx_shock, jx_profile)) == pytest.approx(2.0)

    def test_zero_strength_delta(self, jx_model):
        assert liu_majda_delta(jx_model, ShockData.from_model(jx_model, [0.3], [0.3])) == 0.0

    def test_determinant_needs_square_matrix(self):
        with pytest.raises(ClassificationError):
            liu_majda_determinant(np.ones((2, 2)), np.ones(2))

    def test_determinant(self):
        assert liu_majda_determinant(np.array([[1.0], [0.0]]), np.array([0.0, 3.0])) == pytest.approx(3.0)

    def test_zero_delta_fails_D2_without_windings(self, constant_profile, monkeypatch):
        def broken_contours(*args, **kwargs):
            raise ContourError("contour crosses the essential spectrum")

        monkeypatch.setattr("evans.verdict.default_contours", broken_contours)
        verdict = stability_verdict(constant_profile)
        assert verdict.delta == 0.0
        assert verdict.D1 is None
        assert verdict.D2 is False
        assert verdict.script_D is False
        assert verdict.label("D2") == "FAIL"
        assert "essential spectrum" in verdict.reason

    def test_nonzero_delta_stays_unknown_without_windings(self, jx_profile, monkeypatch):
        def broken_contours(*args, **kwargs):
            raise ContourError("no room for the small circle")

        monkeypatch.setattr("evans.verdict.default_contours", broken_contours)
        verdict = stability_verdict(jx_profile)
        assert verdict.D2 is None
        assert verdict.script_D is None

    @pytest.mark.slow
    def test_jx_shock_is_stable(self, jx_profile):
        verdict = stability_verdict(jx_profile, eta1=0.05, r0=0.05, radius=30.0)
        assert verdict.winding_origin == 1
        assert verdict.winding_big == 0
        assert verdict.D1 and verdict.D2 and verdict.script_D
        assert verdict.label("script_D") == "PASS"
        assert set(verdict.to_dict()["contours"]) == {"outer", "inner"}

    @pytest.mark.slow
    def test_shifted_coupling_is_not_stable(self, jx_profile):
        verdict = stability_verdict(jx_profile.with_spectral_shift(0.04), eta1=0.01, r0=0.01, radius=30.0)
        assert verdict.winding_big is not None and verdict.winding_big > 0
        assert verdict.winding_origin == 0
        assert verdict.D1 is False
        assert verdict.script_D is False

    def test_shifted_zero_sits_between_the_contours(self, jx_profile):
        outer, inner = default_contours(jx_profile.with_spectral_shift(0.04), eta1=0.01, r0=0.01, radius=30.0)
        lam = outer(outer.initial_params(64))
        assert lam.real.min() == pytest.approx(-0.01)
        assert np.abs(inner(inner.initial_params(16))).max() == pytest.approx(0.01)
        # slow branch 0.04 - i xi - 3 xi^2 has its double root at 0.04 - 1/12, left of the segment
        assert 0.04 - 1.0 / 12.0 < lam.real.min()

