"""Session fixtures for the Jin-Xin relaxation of Burgers' equation.

h(u) = u^2 / 2, a = 2, s = 0, u- = 1, u+ = -1: the profile is u = -tanh(x / 8)
with v = 1/2, so most checks have a closed form.
"""

from __future__ import annotations

import numpy as np
import pytest

from core.state import ShockData, ShockProfile
from greens.scattering import scattering_solve
from models.jin_xin import burgers_jin_xin
from profiles.solver import solve_profile

JX_A = 2.0
JX_X = 64.0


@pytest.fixture(scope="session")
def jx_model():
    return burgers_jin_xin(JX_A)


@pytest.fixture(scope="session")
def jx_shock(jx_model):
    return ShockData.from_model(jx_model, [1.0], [-1.0])


@pytest.fixture(scope="session")
def jx_profile(jx_model, jx_shock):
    return solve_profile(jx_model, jx_shock, X=JX_X, dx=0.1)


@pytest.fixture(scope="session")
def jx_fine_profile(jx_model, jx_shock):
    return solve_profile(jx_model, jx_shock, X=JX_X, dx=0.05)


@pytest.fixture(scope="session")
def jx_table(jx_model, jx_shock, jx_profile):
    return scattering_solve(jx_model, jx_shock, jx_profile)


@pytest.fixture(scope="session")
def jx_fine_table(jx_model, jx_shock, jx_fine_profile):
    return scattering_solve(jx_model, jx_shock, jx_fine_profile)


@pytest.fixture(scope="session")
def constant_profile(jx_model):
    """Constant state u = 0.5: a constant-coefficient medium with no shock."""
    return ShockProfile.constant_state(jx_model, [0.5], X=30.0, dx=0.1)


@pytest.fixture
def rng():
    return np.random.default_rng(0)
