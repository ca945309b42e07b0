"""Eavesdropper strategies against the DM and ZF schemes.

The eavesdropper knows every channel and the system parameters. Against DM
it either estimates the feed ``w`` by inverting its own channel (needs
``N >= L``) and re-applies ``H_R``, or, with too few antennas, detects the
phases of its own observations directly. Against ZF it inverts the
effective channel ``H_E P`` (needs ``N >= K``).
"""
from dataclasses import dataclass

import numpy as np

from .constellation import detect
from .errors import EstimationImpossibleError
from .linalg import as_matrix, default_rank_tol, pseudo_inverse

FULL = "full"
DIRECT = "direct"
ZF = "zf"


@dataclass(frozen=True)
class EveObservation:
    y_E: np.ndarray
    H_E: np.ndarray
    H_R: np.ndarray
    noise_variance: float = 1.0

    def __post_init__(self):
        H_E = as_matrix(self.H_E, dtype=complex)
        H_R = as_matrix(self.H_R, dtype=complex)
        y = np.asarray(self.y_E, dtype=complex).reshape(-1)
        if y.size != H_E.shape[0]:
            raise ValueError(f"y_E has {y.size} entries but H_E has {H_E.shape[0]} rows")
        if H_E.shape[1] != H_R.shape[1]:
            raise ValueError("H_E and H_R disagree on the number of transmit antennas")
        object.__setattr__(self, "H_E", H_E)
        object.__setattr__(self, "H_R", H_R)
        object.__setattr__(self, "y_E", y)

    @property
    def N(self):
        return self.H_E.shape[0]

    @property
    def L(self):
        return self.H_E.shape[1]

    @property
    def K(self):
        return self.H_R.shape[0]


def _full_column_rank(A, rank_tol=None):
    s = np.linalg.svd(A, compute_uv=False)
    tol = default_rank_tol(A.shape) if rank_tol is None else rank_tol
    return s[-1] > tol * s[0]


def dm_estimate_w(obs, rank_tol=None):
    """Least-squares estimate of the feed vector, ``pinv(H_E) y_E``."""
    if obs.N < obs.L:
        raise EstimationImpossibleError(
            f"cannot estimate w with N={obs.N} < L={obs.L} antennas"
        )
    if not _full_column_rank(obs.H_E, rank_tol):
        raise EstimationImpossibleError("H_E is column-rank deficient")
    return pseudo_inverse(obs.H_E, rank_tol) @ obs.y_E


def dm_attack_full(obs, M, rank_tol=None):
    w_hat = dm_estimate_w(obs, rank_tol)
    return detect(obs.H_R @ w_hat, M)


def dm_attack_direct(obs, M):
    """Detect the first ``min(N, K)`` observations by phase alone."""
    n = min(obs.N, obs.K)
    return detect(obs.y_E[:n], M)


def dm_attack(obs, M, rank_tol=None):
    """Best available DM attack: ``(decisions, strategy)``."""
    if obs.N >= obs.L:
        try:
            return dm_attack_full(obs, M, rank_tol), FULL
        except EstimationImpossibleError:
            pass
    return dm_attack_direct(obs, M), DIRECT


def zf_recover(obs, precoder, rank_tol=None):
    """Symbol estimate ``pinv(H_E P) y_E``."""
    if obs.N < obs.K:
        raise EstimationImpossibleError(
            f"cannot invert H_E P with N={obs.N} < K={obs.K} antennas"
        )
    HP = obs.H_E @ precoder.P
    if not _full_column_rank(HP, rank_tol):
        raise EstimationImpossibleError("H_E P is column-rank deficient")
    return pseudo_inverse(HP, rank_tol) @ obs.y_E


def zf_attack(obs, precoder, M, rank_tol=None):
    return detect(zf_recover(obs, precoder, rank_tol), M)


def zf_attack_with_fallback(obs, precoder, M, rank_tol=None):
    """ZF recovery when ``N >= K``, phase detection of ``y_E`` otherwise."""
    try:
        return zf_attack(obs, precoder, M, rank_tol), ZF
    except EstimationImpossibleError:
        return dm_attack_direct(obs, M), DIRECT
