"""Normalized error function and the heat-kernel brackets built from it."""

from __future__ import annotations

import numpy as np
from scipy.special import erfc


def errfn(z):
    """(1/sqrt(pi)) int_{-inf}^{z} e^{-y^2} dy, so errfn(+inf) = 1."""
    return 0.5 * erfc(-np.asarray(z, dtype=float))


def arrival_bracket(y, t, speed, beta):
    """errfn((|a| t - |y|)/sqrt(4 beta t)) - errfn((-|a| t - |y|)/sqrt(4 beta t)).

    Fraction of a Gaussian started at y and drifting toward the shock
    that has crossed x = 0 by time t. Zero at t = 0.
    """
    y = np.asarray(y, dtype=float)
    t = np.asarray(t, dtype=float)
    speed = abs(float(speed))
    with np.errstate(divide="ignore", invalid="ignore"):
        root = np.sqrt(4.0 * beta * t)
        hi = errfn(np.where(t > 0, (speed * t - np.abs(y)) / root, -np.inf))
        lo = errfn(np.where(t > 0, (-speed * t - np.abs(y)) / root, -np.inf))
    return hi - lo


def heat_kernel(z, beta_t, cutoff_sd: float | None = None):
    """(4 pi beta t)^{-1/2} exp(-z^2 / (4 beta t)), zero beyond cutoff_sd standard deviations."""
    z = np.asarray(z, dtype=float)
    beta_t = np.asarray(beta_t, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = np.exp(-(z**2) / (4.0 * beta_t)) / np.sqrt(4.0 * np.pi * beta_t)
        if cutoff_sd is not None:
            out = np.where(np.abs(z) <= cutoff_sd * np.sqrt(2.0 * beta_t), out, 0.0)
    return np.where(beta_t > 0, out, 0.0)
