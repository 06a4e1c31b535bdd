"""Shared numerical linear algebra: compact SVD, rank, pinv, least squares.

Every rank decision in the package goes through :class:`RankTolerance` so the
threshold is overridable in one place.  The compact SVD fixes a deterministic
sign convention (largest-magnitude entry of each left singular vector is
positive), which makes identification and controllability outputs
reproducible across runs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, NumericError, ShapeError

_EPS = float(np.finfo(float).eps)


@dataclass(frozen=True)
class RankTolerance:
    """Threshold policy for discarding singular values.

    mode "relative" discards sigma <= value * sigma_max; mode "absolute"
    discards sigma <= value.  value None means the default relative factor
    max(rows, cols) * machine epsilon.
    """

    mode: str = "relative"
    value: float | None = None

    def __post_init__(self):
        if self.mode not in ("relative", "absolute"):
            raise ArgumentError(f"unknown tolerance mode {self.mode!r}")
        if self.value is not None and not self.value > 0:
            raise ArgumentError("tolerance value must be positive")

    def threshold(self, shape, sigma_max: float) -> float:
        if self.mode == "absolute":
            return float(self.value)
        factor = self.value if self.value is not None else max(shape) * _EPS
        return float(factor) * sigma_max


DEFAULT_TOL = RankTolerance()


def _resolve(tol: RankTolerance | None) -> RankTolerance:
    return DEFAULT_TOL if tol is None else tol


@dataclass(frozen=True)
class CompactSvd:
    """Compact SVD with factors U (m x r), S (r,), V (n x r)."""

    U: np.ndarray
    S: np.ndarray
    V: np.ndarray

    @property
    def rank(self) -> int:
        return self.S.shape[0]

    def matrix(self) -> np.ndarray:
        return (self.U * self.S) @ self.V.T


def compact_svd(matrix: np.ndarray, tol: RankTolerance | None = None) -> CompactSvd:
    """Compact SVD keeping singular values above the tolerance threshold."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    if not np.all(np.isfinite(matrix)):
        raise NumericError("matrix has non-finite entries")
    m, n = matrix.shape
    if m == 0 or n == 0 or not np.any(matrix):
        return CompactSvd(np.zeros((m, 0)), np.zeros(0), np.zeros((n, 0)))
    u, s, vt = np.linalg.svd(matrix, full_matrices=False)
    thr = _resolve(tol).threshold(matrix.shape, s[0])
    r = int(np.count_nonzero(s > thr))
    u, s, v = u[:, :r].copy(), s[:r].copy(), vt[:r].T.copy()
    for j in range(r):
        lead = int(np.argmax(np.abs(u[:, j])))
        if u[lead, j] < 0:
            u[:, j] = -u[:, j]
            v[:, j] = -v[:, j]
    return CompactSvd(u, s, v)


def numerical_rank(matrix: np.ndarray, tol: RankTolerance | None = None) -> int:
    return compact_svd(matrix, tol).rank


def pinv(matrix: np.ndarray, tol: RankTolerance | None = None) -> np.ndarray:
    """Moore-Penrose pseudo-inverse through the compact SVD."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    d = compact_svd(matrix, tol)
    if d.rank == 0:
        return np.zeros((matrix.shape[1], matrix.shape[0]))
    return (d.V / d.S) @ d.U.T


def least_squares(a: np.ndarray, b: np.ndarray,
                  tol: RankTolerance | None = None) -> np.ndarray:
    """Minimum-norm minimizer of ||a x - b||_F."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.asarray(b, dtype=float)
    if b.shape[0] != a.shape[0]:
        raise ShapeError(f"row mismatch: {a.shape[0]} vs {b.shape[0]}")
    return pinv(a, tol) @ b


def orthonormal_deviation(u: np.ndarray) -> float:
    u = np.atleast_2d(np.asarray(u, dtype=float))
    r = u.shape[1]
    if r == 0:
        return 0.0
    return float(np.max(np.abs(u.T @ u - np.eye(r))))


def subspace_angle(u1: np.ndarray, u2: np.ndarray) -> float:
    """Largest principal angle (radians) between equal-rank orthonormal bases.

    Computed from the sine, ||(I - U1 U1^T) U2||_2, which stays accurate for
    angles near zero where the cosine saturates.
    """
    resid = u2 - u1 @ (u1.T @ u2)
    s = np.linalg.svd(resid, compute_uv=False)
    return float(np.arcsin(min(1.0, s[0]))) if s.size else 0.0


def subspace_equal(u1: np.ndarray, u2: np.ndarray, tol: float = 1e-10) -> bool:
    """True iff the two orthonormal bases span the same subspace.

    Requires orthonormal columns on both sides; equality means equal ranks
    and largest principal angle at most ``tol`` radians.
    """
    u1 = np.atleast_2d(np.asarray(u1, dtype=float))
    u2 = np.atleast_2d(np.asarray(u2, dtype=float))
    for u in (u1, u2):
        if orthonormal_deviation(u) > 1e-8:
            raise ArgumentError("inputs must have orthonormal columns")
    if u1.shape != u2.shape:
        return False
    if u1.shape[1] == 0:
        return True
    return max(subspace_angle(u1, u2), subspace_angle(u2, u1)) <= tol
