"""Dense matrix primitives: SVD, null-space basis, pseudo-inverse.

Matrices are plain numpy arrays (real or complex, 2-D). The decompositions
are LAPACK-backed through ``numpy.linalg.svd``; this module fixes the
conventions the rest of the package relies on (full ``V``, descending
singular values, relative rank tolerance).
"""
from typing import NamedTuple

import numpy as np

from .errors import NumericalFailure


class SvdResult(NamedTuple):
    U: np.ndarray
    singular_values: np.ndarray
    V: np.ndarray


def as_matrix(M, dtype=None):
    """Validate ``M`` as a finite, non-empty 2-D array and return it."""
    M = np.asarray(M, dtype=dtype)
    if M.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {M.shape}")
    if M.shape[0] < 1 or M.shape[1] < 1:
        raise ValueError(f"matrix must have at least one row and column, got {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return M


def default_rank_tol(shape):
    return max(shape) * np.finfo(float).eps


def svd(M):
    """Full singular value decomposition ``M = U diag(s) V^H``.

    ``U`` is m x m and ``V`` is n x n (not ``V^H``) so the trailing columns
    of ``V`` span the null space. Singular values are sorted descending.
    """
    M = as_matrix(M)
    try:
        U, s, Vh = np.linalg.svd(M, full_matrices=True)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"SVD did not converge: {exc}") from exc
    return SvdResult(U, s, Vh.conj().T)


def numerical_rank(singular_values, shape, rank_tol=None):
    if rank_tol is None:
        rank_tol = default_rank_tol(shape)
    if singular_values.size == 0 or singular_values[0] == 0.0:
        return 0
    return int(np.count_nonzero(singular_values > rank_tol * singular_values[0]))


def null_space_basis(M, rank_tol=None):
    """Orthonormal basis of ``{x : M x = 0}`` as the columns of a matrix.

    Columns of ``V`` whose singular value is at most ``rank_tol * s_max`` are
    kept, together with every column beyond ``min(m, n)``. A full-column-rank
    ``M`` gives an ``n x 0`` result; the caller decides whether that is fatal.
    """
    M = as_matrix(M)
    _, s, V = svd(M)
    r = numerical_rank(s, M.shape, rank_tol)
    return V[:, r:]


def pseudo_inverse(M, rank_tol=None):
    """Moore-Penrose pseudo-inverse by SVD truncation at ``rank_tol * s_max``."""
    M = as_matrix(M)
    try:
        U, s, Vh = np.linalg.svd(M, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"SVD did not converge: {exc}") from exc
    r = numerical_rank(s, M.shape, rank_tol)
    return (Vh[:r].conj().T / s[:r]) @ U[:, :r].conj().T


def frobenius_norm(M):
    return float(np.linalg.norm(M, "fro"))
