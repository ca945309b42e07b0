"""Zero-forcing precoding benchmark: ``P = H_R^H (H_R H_R^H)^-1 beta``."""
from dataclasses import dataclass

import numpy as np

from .errors import PrecoderUndefinedError
from .linalg import as_matrix, default_rank_tol, pseudo_inverse


@dataclass(frozen=True)
class ZfPrecoder:
    P: np.ndarray
    beta: float


def build(H_R, beta, rank_tol=None):
    """Zero-forcing precoder with amplification ``beta``.

    Requires K <= L and a full-row-rank ``H_R``; the right inverse is taken
    through the SVD pseudo-inverse.
    """
    H_R = as_matrix(H_R, dtype=complex)
    K, L = H_R.shape
    if beta <= 0:
        raise ValueError("beta must be positive")
    if K > L:
        raise PrecoderUndefinedError(f"zero forcing needs K <= L, got K={K}, L={L}")
    s = np.linalg.svd(H_R, compute_uv=False)
    tol = default_rank_tol(H_R.shape) if rank_tol is None else rank_tol
    if s[-1] <= tol * s[0]:
        raise PrecoderUndefinedError("H_R is rank deficient; zero forcing undefined")
    return ZfPrecoder(pseudo_inverse(H_R, rank_tol) * beta, float(beta))


def transmit(pre, s):
    """Antenna feed ``P s`` for the symbol vector ``s``."""
    v = s.values
    if pre.P.shape[1] != v.size:
        raise ValueError(f"precoder expects {pre.P.shape[1]} symbols, got {v.size}")
    return pre.P @ v


def power(x):
    return float(np.vdot(x, x).real)
