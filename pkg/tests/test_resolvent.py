"""Resolvent kernel built from stored decaying bases, and the dual bases paired with them."""

from __future__ import annotations

import numpy as np
import pytest

from core.linalg import linear_fit
from evans.function import adjoint_basis
from evans.resolvent import kernel_from_bases, resolvent_apply, resolvent_jump, resolvent_kernel, stored_bases


@pytest.fixture(scope="module")
def jx_bases(jx_profile):
    rng = np.random.default_rng(7)
    lams = rng.uniform(0.2, 2.0, 6) + 1j * rng.uniform(-3.0, 3.0, 6)
    return stored_bases(jx_profile, lams)


class TestStoredBases:
    def test_shapes(self, jx_bases, jx_profile):
        L, S = jx_bases.lam.size, jx_bases.x.size
        assert jx_bases.plus_B.shape == (L, S, 2, jx_bases.k)
        assert jx_bases.minus_B.shape == (L, S, 2, 2 - jx_bases.k)
        assert jx_bases.x[0] == pytest.approx(jx_profile.x[0])

    def test_bases_stay_independent(self, jx_bases):
        S = jx_bases.x.size
        assert np.min(jx_bases.separation()[:, S // 2]) > 1e-6


class TestKernel:
    def test_jump_is_minus_inverse_a(self, jx_profile, jx_bases, rng):
        for lam in jx_bases.lam:
            y = float(rng.uniform(-5.0, 5.0))
            jump = resolvent_jump(jx_profile, lam, y, bases=jx_bases)
            expected = -np.linalg.inv(jx_profile.coefficients.at(y)[0])
            assert np.max(np.abs(jump - expected)) <= 1e-8 * np.max(np.abs(expected))

    @pytest.mark.parametrize("index", [0, 3])
    def test_decays_away_from_source(self, jx_bases, index):
        dist = np.linspace(1.0, 10.0, 10)
        for sign in (1.0, -1.0):
            mags = [np.linalg.norm(kernel_from_bases(jx_bases, index, sign * d, 0.0)) for d in dist]
            assert linear_fit(dist, np.log(mags)).slope < 0

    def test_kernel_lookup_matches_index(self, jx_profile, jx_bases):
        lam = jx_bases.lam[2]
        np.testing.assert_allclose(
            resolvent_kernel(jx_profile, lam, 1.5, -0.5, bases=jx_bases),
            kernel_from_bases(jx_bases, 2, 1.5, -0.5),
        )


class TestResolventApply:
    def test_solves_the_resolvent_equation(self, jx_profile, jx_bases):
        x = jx_bases.x
        f = np.column_stack([np.exp(-((x - 1.0) ** 2) / 4.0), 0.5 * np.exp(-((x + 2.0) ** 2) / 4.0)])
        w = resolvent_apply(jx_bases, f)
        h = x[1] - x[0]
        A = np.linalg.inv(jx_bases.Ainv)
        for index, lam in enumerate(jx_bases.lam[:2]):
            Aw = np.einsum("sij,sj->si", A, w[index])
            dAw = (Aw[2:] - Aw[:-2]) / (2 * h)
            Q = np.array([jx_profile.coefficients.at(xi)[1] for xi in x[1:-1]])
            lhs = -dAw + np.einsum("sij,sj->si", Q, w[index][1:-1]) - lam * w[index][1:-1]
            interior = np.abs(x[1:-1]) <= 20.0
            err = np.max(np.abs(lhs[interior] - f[1:-1][interior]))
            assert err <= 0.05 * np.max(np.abs(f))


class TestAdjointBasis:
    def test_pairing_is_constant(self, jx_profile):
        lam = 1.0 + 0.5j
        dual = adjoint_basis(jx_profile, lam)
        forward = stored_bases(jx_profile, [lam])
        np.testing.assert_allclose(dual.x, forward.x)
        interior = np.flatnonzero(np.abs(dual.x) <= 20.0)
        for j in interior:
            log_scale = np.conj(dual.minus_L[j]) + forward.plus_L[0, j]
            pairing = np.exp(log_scale) * dual.minus_B[j].conj().T @ forward.plus_B[0, j]
            assert np.max(np.abs(pairing - np.eye(forward.k))) <= 1e-5
