"""
Guarded factorizations reused across solves: partial-pivoted LU with a
1-norm condition check, Jacobi-scaled Cholesky for symmetric positive
definite systems, and an eigenvalue-truncated factor of a PSD matrix.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, LinAlgWarning, cho_solve, cholesky, eigh, get_lapack_funcs, lu_factor, lu_solve

from errors import NumericalError
from settings import DEFAULT_SETTINGS


@dataclass(frozen=True)
class Factorization:
    lu: np.ndarray
    piv: np.ndarray
    condition: float

    def solve(self, b: np.ndarray) -> np.ndarray:
        return lu_solve((self.lu, self.piv), b, check_finite=False)

    def solve_transposed(self, b: np.ndarray) -> np.ndarray:
        return lu_solve((self.lu, self.piv), b, trans=1, check_finite=False)


@dataclass(frozen=True)
class SpdFactorization:
    factor: np.ndarray  # upper Cholesky factor of the scaled matrix
    scale: np.ndarray  # diag(M)^{-1/2}
    condition: float  # of the scaled matrix

    def solve(self, b: np.ndarray) -> np.ndarray:
        b = np.asarray(b, dtype=float)
        s = self.scale[:, None] if b.ndim == 2 else self.scale
        return s * cho_solve((self.factor, False), s * b, check_finite=False)


def _check_finite(matrix: np.ndarray, what: str) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=float)
    if not np.all(np.isfinite(matrix)):
        raise NumericalError(f"{what} has non-finite entries")
    return matrix


def factorize(
    matrix: np.ndarray,
    threshold: float = DEFAULT_SETTINGS.condition_threshold,
    what: str = "linear system",
) -> Factorization:
    """Partial-pivoted LU; raises NumericalError when cond_1 exceeds `threshold`."""
    matrix = _check_finite(matrix, what)
    anorm = float(np.linalg.norm(matrix, 1))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(matrix, check_finite=False)
    gecon, = get_lapack_funcs(("gecon",), (lu,))
    rcond, info = gecon(lu, anorm, norm="1")
    condition = np.inf if rcond <= 0 else 1.0 / float(rcond)
    if info != 0 or not condition <= threshold:
        raise NumericalError(f"{what} is singular or ill-conditioned", condition, threshold)
    return Factorization(lu, piv, condition)


def factorize_spd(
    matrix: np.ndarray,
    threshold: float = DEFAULT_SETTINGS.condition_threshold,
    what: str = "linear system",
) -> SpdFactorization:
    """
    Cholesky of D^{-1/2} M D^{-1/2} with D = diag(M).

    The condition check applies to the scaled matrix, so a system that is
    stiff only through its diagonal (one huge variance component) passes.
    """
    matrix = _check_finite(matrix, what)
    diag = np.diag(matrix)
    if np.any(diag <= 0):
        raise NumericalError(f"{what} is not positive definite")
    scale = 1.0 / np.sqrt(diag)
    scaled = matrix * scale[:, None] * scale[None, :]
    try:
        factor = cholesky(scaled, lower=False, check_finite=False)
    except LinAlgError as e:
        raise NumericalError(f"{what} is not positive definite") from e
    pocon, = get_lapack_funcs(("pocon",), (factor,))
    rcond, info = pocon(factor, float(np.linalg.norm(scaled, 1)))
    condition = np.inf if rcond <= 0 else 1.0 / float(rcond)
    if info != 0 or not condition <= threshold:
        raise NumericalError(f"{what} is singular or ill-conditioned", condition, threshold)
    return SpdFactorization(factor, scale, condition)


def psd_factor(matrix: np.ndarray, what: str = "covariance") -> np.ndarray:
    """L with L L^T = matrix, eigenvalues below 16 d eps * max dropped; shape (d, rank)."""
    matrix = _check_finite(matrix, what)
    d = matrix.shape[0]
    if d == 0:
        return np.zeros((0, 0))
    w, v = eigh(matrix, check_finite=False)
    top = float(w[-1])
    if top <= 0:
        return np.zeros((d, 0))
    keep = w > 16 * d * np.finfo(float).eps * top
    return v[:, keep] * np.sqrt(w[keep])
