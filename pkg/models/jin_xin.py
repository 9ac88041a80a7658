"""Built-in Jin–Xin relaxation family: u_t + v_x = 0, v_t + a^2 u_x = h(u) - v."""

from __future__ import annotations

from typing import Sequence

import numpy as np
from numpy.polynomial import Polynomial

from core.errors import ModelError
from models.base import RelaxationModel


def jin_xin(a: float, h_poly: Sequence[float], *, name: str | None = None) -> RelaxationModel:
    """Scalar Jin–Xin model with polynomial equilibrium flux h(u) = sum c_k u^k."""
    if a <= 0:
        raise ModelError(f"Jin-Xin wave speed must be positive, got a={a}")
    if len(h_poly) == 0:
        raise ModelError("h_poly must contain at least one coefficient")
    h = Polynomial(np.asarray(h_poly, dtype=float))
    dh = h.deriv()
    a2 = float(a) ** 2

    def f(u, v):
        return np.asarray(v, dtype=float).copy()

    def g(u, v):
        return a2 * np.asarray(u, dtype=float)

    def q(u, v):
        return h(u) - v

    def v_star(u):
        return h(np.asarray(u, dtype=float))

    return RelaxationModel(
        n=1,
        r=1,
        f=f,
        g=g,
        q=q,
        v_star=v_star,
        f_u=lambda u, v: np.zeros((1, 1)),
        f_v=lambda u, v: np.eye(1),
        g_u=lambda u, v: a2 * np.eye(1),
        g_v=lambda u, v: np.zeros((1, 1)),
        q_u=lambda u, v: np.atleast_2d(dh(u)),
        q_v=lambda u, v: -np.eye(1),
        kind="jin-xin",
        name=name or "jin-xin",
        a=float(a),
        h=lambda u: h(np.asarray(u, dtype=float)),
        dh=lambda u: dh(np.asarray(u, dtype=float)),
    )


def burgers_jin_xin(a: float = 2.0) -> RelaxationModel:
    """Jin–Xin relaxation of Burgers' flux h(u) = u^2 / 2."""
    return jin_xin(a, [0.0, 0.0, 0.5], name="jin-xin-burgers")
