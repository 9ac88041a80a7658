"""Small linear-algebra and fitting helpers used across modules."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from core.errors import DefectiveMatrixError, HyperbolicityError

logger = logging.getLogger(__name__)

_MAX_EIGVEC_COND = 1e10


@dataclass
class RealEigensystem:
    """Ascending real eigenvalues with right columns R and left rows L (L @ R = I)."""

    values: np.ndarray
    right: np.ndarray
    left: np.ndarray
    groups: list[np.ndarray]  # index blocks of equal eigenvalues


def canonical_columns(R: np.ndarray) -> np.ndarray:
    """Unit-norm columns whose largest-modulus entry is real positive."""
    R = np.array(R, dtype=np.result_type(R, float), copy=True)
    for j in range(R.shape[1]):
        col = R[:, j]
        norm = np.linalg.norm(col)
        if norm == 0:
            continue
        pivot = col[np.argmax(np.abs(col))]
        R[:, j] = col / norm * (abs(pivot) / pivot)
    return R


def group_eigenvalues(values: np.ndarray, tol: float) -> list[np.ndarray]:
    """Split sorted eigenvalues into runs whose neighbours differ by at most tol."""
    values = np.asarray(values)
    if values.size == 0:
        return []
    groups: list[list[int]] = [[0]]
    for i in range(1, values.size):
        if abs(values[i] - values[i - 1]) <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    return [np.array(g, dtype=int) for g in groups]


def real_eigensystem(
    M: np.ndarray,
    *,
    imag_tol: float = 1e-10,
    multiplicity_tol: float = 1e-8,
    what: str = "matrix",
) -> RealEigensystem:
    """Eigen-decomposition of a matrix that must have real semisimple spectrum."""
    M = np.asarray(M, dtype=float)
    if not np.all(np.isfinite(M)):
        raise HyperbolicityError(f"{what} has non-finite entries")
    scale = 1.0 + np.linalg.norm(M, ord=2)
    vals, vecs = np.linalg.eig(M)
    if np.max(np.abs(vals.imag), initial=0.0) > imag_tol * scale:
        raise HyperbolicityError(
            f"{what} has complex eigenvalues {vals[np.abs(vals.imag) > imag_tol * scale]}"
        )
    order = np.argsort(vals.real, kind="stable")
    vals = vals.real[order]
    vecs = np.real_if_close(vecs[:, order], tol=1e6).real
    R = canonical_columns(vecs)
    if np.linalg.cond(R) > _MAX_EIGVEC_COND:
        raise DefectiveMatrixError(f"{what} is not diagonalizable (eigenvector cond too large)")
    L = np.linalg.inv(R)
    groups = group_eigenvalues(vals, multiplicity_tol * scale)
    return RealEigensystem(values=vals, right=R, left=L, groups=groups)


def match_branches(previous: np.ndarray, current: np.ndarray) -> np.ndarray:
    """Permutation p such that current[p] follows previous by minimal total distance."""
    cost = np.abs(previous[:, None] - current[None, :])
    _, cols = linear_sum_assignment(cost)
    return cols


def assignment_is_ambiguous(previous: np.ndarray, current: np.ndarray, perm: np.ndarray) -> bool:
    """True when a matched jump is comparable to the gap between previous branches."""
    if previous.size < 2:
        return False
    gaps = np.abs(previous[:, None] - previous[None, :])
    gaps[np.diag_indices_from(gaps)] = np.inf
    jumps = np.abs(current[perm] - previous)
    return bool(np.any(jumps >= 0.5 * gaps.min(axis=1)))


@dataclass
class LinearFit:
    slope: float
    intercept: float
    r2: float
    window: tuple[float, float]


def linear_fit(x: np.ndarray, y: np.ndarray) -> LinearFit:
    """Least-squares line through (x, y) with coefficient of determination."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    mask = np.isfinite(x) & np.isfinite(y)
    x, y = x[mask], y[mask]
    if x.size < 2:
        return LinearFit(float("nan"), float("nan"), float("nan"), (float("nan"),) * 2)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return LinearFit(float(slope), float(intercept), r2, (float(x.min()), float(x.max())))


def interp_rows(xq: np.ndarray, x: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Piecewise-linear interpolation of values[i, ...] at xq, clamped to the end rows."""
    xq = np.asarray(xq, dtype=float)
    flat = values.reshape(values.shape[0], -1)
    idx = np.clip(np.searchsorted(x, xq, side="right") - 1, 0, x.size - 2)
    w = (xq - x[idx]) / (x[idx + 1] - x[idx])
    w = np.clip(w, 0.0, 1.0)[..., None]
    out = (1.0 - w) * flat[idx] + w * flat[idx + 1]
    return out.reshape(xq.shape + values.shape[1:])
