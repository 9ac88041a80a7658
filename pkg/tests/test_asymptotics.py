"""Commutator solves, Goodman frames, block diagonalization, Gap-Lemma bases, reduced flows."""

from __future__ import annotations

import numpy as np
import pytest

from asymptotics.frames import block_diagonalize, goodman_frame
from asymptotics.gap import gap_basis
from asymptotics.reduced_flow import direct_flow, reduced_flow_first_order
from asymptotics.sylvester import spectral_separation, sylvester
from core.errors import FlowDecayError, SylvesterError
from evans.modes import coefficient_matrix, limit_matrices, limit_roots

# ============================================================
# Helpers
# ============================================================


def _make_rotated_field(x: float) -> np.ndarray:
    c, s = np.cos(0.5 * x), np.sin(0.5 * x)
    R = np.array([[c, -s], [s, c]])
    return R @ np.diag([1.0, -1.0]) @ R.T


def _make_coupling(x: float) -> np.ndarray:
    return np.array([[0.3, np.sin(x)], [0.5 * x, -0.2]])


# ============================================================
# Sylvester
# ============================================================


class TestSylvester:
    def test_residual(self, rng):
        d1 = np.diag(rng.uniform(1.0, 2.0, 3))
        d2 = np.diag(rng.uniform(-2.0, -1.0, 2))
        F = rng.standard_normal((3, 2))
        sol = sylvester(d1, d2, F)
        assert sol.residual <= 1e-12
        np.testing.assert_allclose(d1 @ sol.X - sol.X @ d2, F, atol=1e-12)
        assert sol.separation >= 2.0

    def test_non_diagonal_blocks(self, rng):
        d1 = np.array([[1.0, 5.0], [0.0, 1.5]])
        d2 = np.array([[-1.0]])
        sol = sylvester(d1, d2, rng.standard_normal((2, 1)))
        assert sol.residual <= 1e-12

    def test_close_spectra_raise(self):
        with pytest.raises(SylvesterError):
            sylvester(np.diag([1.0, 2.0]), np.array([[1.0]]), np.ones((2, 1)))

    def test_separation(self):
        assert spectral_separation(np.diag([1.0, 3.0]), np.diag([-1.0])) == pytest.approx(2.0)


# ============================================================
# Goodman frames and block diagonalization
# ============================================================


class TestGoodmanFrame:
    def test_normalization_residual(self):
        frame = goodman_frame(_make_rotated_field, (-1.0, 1.0))
        assert frame.residual(np.linspace(-0.9, 0.9, 7)) <= 1e-8

    def test_frame_diagonalizes(self):
        frame = goodman_frame(_make_rotated_field, (-1.0, 1.0))
        for x in (-0.7, 0.0, 0.6):
            D = frame.left(x) @ _make_rotated_field(x) @ frame.right(x)
            np.testing.assert_allclose(D, np.diag(np.diag(D)), atol=1e-9)

    def test_blocks_by_multiplicity(self):
        frame = goodman_frame(lambda x: np.diag([1.0, 1.0, -2.0 - x]), (-0.5, 0.5))
        assert sorted(g.size for g in frame.groups) == [1, 2]


class TestBlockDiagonalize:
    def test_remainder_is_second_order(self):
        xs = np.linspace(-0.5, 0.5, 5)
        coarse = block_diagonalize(_make_rotated_field, _make_coupling, 0.02, x=xs)
        fine = block_diagonalize(_make_rotated_field, _make_coupling, 0.01, x=xs)
        order = np.log2(coarse.residual / fine.residual)
        assert order >= 1.8

    def test_leading_blocks(self):
        stage = block_diagonalize(_make_rotated_field, _make_coupling, 0.01, x=[0.0])
        np.testing.assert_allclose(np.sort(np.diag(stage.D0[0])), [-1.0, 1.0], atol=1e-10)


# ============================================================
# Gap-Lemma bases
# ============================================================


class TestGapBasis:
    def test_jx_basis_solves_the_ode(self, jx_profile):
        lam = 0.5 + 0.5j
        model, shock = jx_profile.model, jx_profile.shock
        A, Q = limit_matrices(model, shock, "-")
        mu, V = limit_roots(A, Q, [lam])
        limit = np.linalg.solve(A, Q - lam * np.eye(model.N))
        sol = gap_basis(
            lambda z: coefficient_matrix(jx_profile, lam, z, form="W"),
            limit,
            (mu[0, -1], V[0][:, -1]),
            lam=lam,
        )
        assert sol.residual <= 1e-5
        assert sol.contraction < 0.5
        np.testing.assert_allclose(sol.V[0], V[0][:, -1], atol=1e-6)

    def test_decay_rate_matches_coefficient(self):
        limit = np.diag([1.0, -1.0]).astype(complex)
        B = np.array([[0.0, 1.0], [1.0, 0.0]])
        sol = gap_basis(lambda x: limit + np.exp(0.5 * x) * B, limit, (1.0, np.array([1.0, 0.0])), x_range=(-80.0, 0.0))
        assert sol.alpha == pytest.approx(0.5, rel=1e-6)
        assert sol.fitted_rate >= 0.45

    def test_constant_coefficients(self):
        limit = np.diag([2.0, -1.0])
        sol = gap_basis(lambda x: limit, limit, (-1.0, np.array([0.0, 1.0])))
        assert sol.residual == 0.0
        np.testing.assert_allclose(sol.V, np.tile([0.0, 1.0], (sol.x.size, 1)))


# ============================================================
# Reduced flows
# ============================================================


class TestReducedFlow:
    def test_first_order_error(self):
        flow = reduced_flow_first_order(lambda z: -1.0, lambda z: 1.0, 0.1, 1.0, 0.0, 2.0)
        exact = direct_flow(lambda z: -1.0, lambda z: 1.0, 0.1, 1.0, 0.0, 2.0)
        assert exact[0, 0] == pytest.approx(np.exp(-1.8), rel=1e-10)
        expected = np.exp(-2.0) * (np.exp(0.2) - 1.2)
        assert flow.error(exact) == pytest.approx(expected, rel=1e-4)

    def test_error_is_second_order_in_delta(self):
        errors = []
        for delta in (0.1, 0.05):
            flow = reduced_flow_first_order(lambda z: -1.0, lambda z: 1.0, delta, 1.0, 0.0, 2.0)
            errors.append(flow.error(direct_flow(lambda z: -1.0, lambda z: 1.0, delta, 1.0, 0.0, 2.0)))
        assert np.log2(errors[0] / errors[1]) >= 1.8

    def test_matrix_blocks(self):
        M = lambda z: np.array([[-1.0, 0.2], [0.0, -2.0]])
        Theta = lambda z: np.array([[np.cos(z), 0.0], [0.3, 1.0]])
        flow = reduced_flow_first_order(M, Theta, 0.01, 1.0, 0.0, 1.5)
        assert flow.error(direct_flow(M, Theta, 0.01, 1.0, 0.0, 1.5)) <= 1e-3

    def test_growing_flow_raises(self):
        with pytest.raises(FlowDecayError):
            reduced_flow_first_order(lambda z: 1.0, lambda z: 0.0, 0.1, 1.0, 0.0, 5.0)
