"""Directional-modulation beamformer design.

Given the legitimate channel ``H_R`` (K x L), the intended PSK symbols ``s``
and the required in-phase/quadrature level ``gamma_sqrt``, find the
minimum-power antenna feed ``w`` such that each ``h_i^T w`` has the phase of
``s_i`` and its I/Q components clear ``gamma_sqrt * Re(s_i)`` and
``gamma_sqrt * Im(s_i)``.

Writing ``w_tilde = [Re(w); Im(w)]`` turns ``Re(H_R w)`` and ``Im(H_R w)``
into ``H_R1 w_tilde`` and ``H_R2 w_tilde``. The phase conditions are a
homogeneous linear system ``C w_tilde = 0``; restricting ``w_tilde = E lam``
to its null space leaves a minimum-norm problem in ``lam`` with only
inequality constraints, handed to :mod:`dirmod.qp`.
"""
from dataclasses import dataclass

import numpy as np

from . import qp as qp_solver
from .constellation import SymbolVector
from .errors import InfeasibleStructureError, QpInfeasibleError
from .linalg import as_matrix, null_space_basis


def real_blocks(H):
    """``(H_R1, H_R2)`` with ``Re(H w) = H_R1 w_tilde`` and ``Im(H w) = H_R2 w_tilde``."""
    H = as_matrix(H, dtype=complex)
    H1 = np.hstack([H.real, -H.imag])
    H2 = np.hstack([H.imag, H.real])
    return H1, H2


def _symbol_parts(s):
    """Real and imaginary parts of the symbols, with exact zeros on the axes."""
    v = s.values
    return v.real.copy(), v.imag.copy()


def build_phase_constraints(H_R, s):
    """Rows ``sin(theta_i) H_R1[i] - cos(theta_i) H_R2[i]`` for the phase of ``s_i``.

    ``C w_tilde = 0`` says ``Im(h_i^T w) cos(theta_i) = Re(h_i^T w) sin(theta_i)``,
    i.e. ``h_i^T w`` lies on the line through ``s_i``. This is the tangent
    form ``tan(theta_i) Re - Im = 0`` multiplied by ``cos(theta_i)``, which
    stays bounded at ``theta_i = +-pi/2``.
    """
    H1, H2 = real_blocks(H_R)
    if H1.shape[0] != len(s):
        raise ValueError(f"H_R has {H1.shape[0]} rows but {len(s)} symbols were given")
    re, im = _symbol_parts(s)
    return im[:, None] * H1 - re[:, None] * H2


@dataclass(frozen=True)
class DmProblem:
    H_R: np.ndarray
    s: SymbolVector
    gamma_sqrt: float
    H_R1: np.ndarray
    H_R2: np.ndarray
    C: np.ndarray
    E: np.ndarray
    G: np.ndarray
    h: np.ndarray

    @property
    def K(self):
        return self.H_R.shape[0]

    @property
    def L(self):
        return self.H_R.shape[1]


@dataclass(frozen=True)
class DmSolution:
    lam: np.ndarray
    w_tilde: np.ndarray
    w: np.ndarray
    power: float
    phase_residual: float
    constraint_slacks: np.ndarray
    qp: qp_solver.QpSolution


def build_problem(H_R, s, gamma_sqrt, rank_tol=None):
    H_R = as_matrix(H_R, dtype=complex)
    K, L = H_R.shape
    if gamma_sqrt < 0:
        raise ValueError("gamma_sqrt must be nonnegative")
    if 2 * L <= K:
        raise InfeasibleStructureError(
            f"L={L} transmit antennas cannot serve K={K} receive antennas: "
            f"a beamformer needs L > K/2"
        )
    H1, H2 = real_blocks(H_R)
    C = build_phase_constraints(H_R, s)
    E = null_space_basis(C, rank_tol)
    if E.shape[1] == 0:
        raise InfeasibleStructureError(
            f"phase constraints have full column rank 2L={2 * L}; no beamformer "
            f"direction is left (L > K/2 is necessary)"
        )
    re, im = _symbol_parts(s)
    G = np.vstack([re[:, None] * (H1 @ E), im[:, None] * (H2 @ E)])
    h = gamma_sqrt * np.concatenate([re * re, im * im])
    return DmProblem(H_R, s, float(gamma_sqrt), H1, H2, C, E, G, h)


def phase_residual(H_R, w, s):
    """Largest wrapped angle between ``h_i^T w`` and ``s_i`` over all i."""
    z = np.asarray(H_R) @ w
    d = np.angle(z * np.conj(s.values))
    return float(np.max(np.abs(d)))


def solve(problem, qp=qp_solver.solve):
    """Solve the reduced QP and rebuild the complex beamformer."""
    try:
        sol = qp(qp_solver.QpInstance(problem.G, problem.h))
    except QpInfeasibleError as exc:
        raise QpInfeasibleError(
            f"no beamformer meets the phase and level constraints for "
            f"K={problem.K}, L={problem.L}: {exc}",
            certificate=exc.certificate,
            row=exc.row,
        ) from exc
    lam = sol.x
    w_tilde = problem.E @ lam
    L = problem.L
    w = w_tilde[:L] + 1j * w_tilde[L:]
    return DmSolution(
        lam=lam,
        w_tilde=w_tilde,
        w=w,
        power=float(np.vdot(w, w).real),
        phase_residual=phase_residual(problem.H_R, w, problem.s),
        constraint_slacks=problem.G @ lam - problem.h,
        qp=sol,
    )


def design(H_R, s, gamma_sqrt, rank_tol=None, qp=qp_solver.solve):
    """``build_problem`` followed by ``solve``."""
    return solve(build_problem(H_R, s, gamma_sqrt, rank_tol), qp=qp)


def received_noiseless(H, w):
    H = np.asarray(H)
    w = np.asarray(w)
    if H.shape[1] != w.shape[0]:
        raise ValueError(f"shape mismatch: H is {H.shape}, w has {w.shape[0]} entries")
    return H @ w
