"""Minimum-norm point of a polyhedron: ``min ||x||^2  s.t.  G x >= h``.

``solve`` uses the Lawson-Hanson least-distance reduction: the dual of the
projection problem is a nonnegative least-squares problem, solved here with
an active-set NNLS. The NNLS residual either yields the primal point directly
or, when it vanishes, a Farkas certificate of infeasibility. The primal point
is then polished on the identified active set and checked against the KKT
conditions.

``solve_by_active_set_enumeration`` is a brute-force oracle for tests.
"""
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import NumericalFailure, QpInfeasibleError

ABS_FLOOR = 1e-12


@dataclass(frozen=True)
class QpInstance:
    G: np.ndarray
    h: np.ndarray
    tolerance: float = 1e-9
    max_iterations: int = None

    def __post_init__(self):
        h = np.asarray(self.h, dtype=float).reshape(-1)
        G = np.asarray(self.G, dtype=float)
        if G.ndim == 1 and G.size == 0:
            G = G.reshape(0, 0)
        if G.ndim != 2:
            raise ValueError(f"G must be 2-D, got shape {G.shape}")
        if G.shape[0] != h.size:
            raise ValueError(f"G has {G.shape[0]} rows but h has {h.size} entries")
        if G.shape[1] < 1:
            raise ValueError("need at least one variable")
        if not (np.all(np.isfinite(G)) and np.all(np.isfinite(h))):
            raise ValueError("non-finite entries in G or h")
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "h", h)
        if self.max_iterations is None:
            m, n = G.shape
            object.__setattr__(self, "max_iterations", 10 * (m + n) ** 2)

    @property
    def shape(self):
        return self.G.shape


@dataclass(frozen=True)
class QpSolution:
    x: np.ndarray
    objective: float
    duals: np.ndarray
    active_set: tuple
    kkt_residual: float
    iterations: int = 0
    kkt: dict = field(default_factory=dict, compare=False)


def kkt_report(inst, x, duals, relative=False):
    """Scaled KKT violations of a candidate (x, duals).

    Each entry is normalised by its bound from the solution contract, so a
    value <= 1 means that condition holds at ``inst.tolerance``. With
    ``relative=True`` the primal and complementarity bounds are additionally
    scaled by the magnitudes of ``G x`` and of the duals, which is what
    floating point can deliver on nearly-degenerate active sets.
    """
    G, h, tol = inst.G, inst.h, max(inst.tolerance, ABS_FLOOR)
    hscale = 1.0 + (np.max(np.abs(h)) if h.size else 0.0)
    slack = G @ x - h
    primal = max(0.0, -float(slack.min())) if slack.size else 0.0
    stat = float(np.max(np.abs(2.0 * x - G.T @ duals))) if x.size else 0.0
    comp = float(np.max(np.abs(duals * slack))) if slack.size else 0.0
    dual = max(0.0, -float(duals.min())) if duals.size else 0.0
    pscale = cscale = hscale
    if relative and slack.size:
        gx = 1.0 + float(np.max(np.abs(G).sum(axis=1))) * float(np.max(np.abs(x), initial=0.0))
        pscale = max(hscale, gx)
        cscale = pscale * (1.0 + float(np.max(np.abs(duals))))
    return {
        "primal": primal / (tol * pscale),
        "stationarity": stat / (tol * (1.0 + np.linalg.norm(x))),
        "complementarity": comp / (tol * cscale),
        "dual": dual / (tol * hscale),
    }


def _finish(inst, x, duals, iterations):
    G, h = inst.G, inst.h
    duals = np.maximum(duals, 0.0)
    report = kkt_report(inst, x, duals)
    hscale = 1.0 + (np.max(np.abs(h)) if h.size else 0.0)
    slack = G @ x - h
    active = tuple(int(i) for i in np.flatnonzero(np.abs(slack) <= inst.tolerance * hscale))
    return QpSolution(
        x=x,
        objective=float(x @ x),
        duals=duals,
        active_set=active,
        kkt_residual=max(report.values()) * inst.tolerance,
        iterations=iterations,
        kkt=report,
    )


def _certified(inst, sol):
    return max(kkt_report(inst, sol.x, sol.duals, relative=True).values()) <= 1.0


def nnls(A, b, max_iterations, tol=None):
    """Lawson-Hanson active-set solver for ``min ||A u - b||  s.t.  u >= 0``.

    Returns ``(u, iterations)``.
    """
    m, n = A.shape
    if tol is None:
        tol = 10.0 * max(m, n) * np.finfo(float).eps * max(1.0, np.abs(A).max(initial=0.0))
    u = np.zeros(n)
    passive = np.zeros(n, dtype=bool)
    grad = A.T @ b
    it = 0
    while True:
        candidates = ~passive & (grad > tol)
        if not candidates.any():
            break
        j = int(np.argmax(np.where(candidates, grad, -np.inf)))
        passive[j] = True
        first = True
        skipped = False
        while True:
            it += 1
            if it > max_iterations:
                raise NumericalFailure(f"NNLS exceeded {max_iterations} iterations")
            cols = np.flatnonzero(passive)
            z = np.zeros(n)
            z[cols] = np.linalg.lstsq(A[:, cols], b, rcond=None)[0]
            if np.all(z[cols] > 0.0):
                u = z
                break
            if first and z[j] <= 0.0:
                # rounding made the entering direction useless; skip it this round
                passive[j] = False
                grad[j] = 0.0
                skipped = True
                break
            first = False
            bad = cols[z[cols] <= 0.0]
            step = np.min(u[bad] / (u[bad] - z[bad]))
            u = u + step * (z - u)
            passive &= u > tol
            u[~passive] = 0.0
        if not skipped:
            grad = A.T @ (b - A @ u)
    return u, it


def _polish(inst, x, active):
    """Re-solve the equality-constrained min-norm problem on ``active``."""
    G, h = inst.G, inst.h
    rows = np.asarray(active, dtype=int)
    if rows.size == 0:
        return np.zeros(G.shape[1]), np.zeros(G.shape[0])
    Gw = G[rows]
    xw = np.linalg.lstsq(Gw, h[rows], rcond=None)[0]
    mu = np.linalg.lstsq(Gw.T, 2.0 * xw, rcond=None)[0]
    duals = np.zeros(G.shape[0])
    duals[rows] = mu
    return xw, duals


def solve(inst):
    """KKT-certified minimiser of ``||x||^2`` over ``{x : G x >= h}``.

    Raises ``QpInfeasibleError`` (with a Farkas certificate) when the
    polyhedron is empty and ``NumericalFailure`` when the iteration cap is hit.
    """
    G, h = inst.G, inst.h
    m, n = G.shape
    if m == 0 or np.all(h <= 0.0):
        return _finish(inst, np.zeros(n), np.zeros(m), 0)

    # positive homogeneity: solve with h scaled to unit sup-norm, rescale after
    scale = float(np.max(np.abs(h)))
    hs = h / scale
    E = np.vstack([G.T, hs[None, :]])
    f = np.zeros(n + 1)
    f[n] = 1.0
    u, iters = nnls(E, f, inst.max_iterations)
    r = E @ u - f
    rnorm = float(np.linalg.norm(r))
    if rnorm <= 1e-9 or r[n] >= 0.0:
        hu = float(hs @ u)
        cert = u / hu if hu > 0 else u
        row = int(np.argmax(cert))
        raise QpInfeasibleError(
            f"constraint polyhedron is empty (Farkas certificate, heaviest row {row})",
            certificate=cert,
            row=row,
        )
    x = -r[:n] / r[n] * scale
    duals = 2.0 * u / (rnorm ** 2) * scale

    # polish on the NNLS support; fall back to the raw LDP point if that fails
    xp, dp = _polish(inst, x, np.flatnonzero(u > 0.0))
    best = _finish(inst, xp, dp, iters)
    if not _certified(inst, best):
        raw = _finish(inst, x, duals, iters)
        if raw.kkt_residual < best.kkt_residual:
            best = raw
        if not _certified(inst, best):
            raise NumericalFailure(
                f"QP solution failed KKT certification (scaled residuals {best.kkt})"
            )
    return best


def solve_by_active_set_enumeration(inst):
    """Exact minimiser by trying every subset of constraints as the active set.

    For each subset W the equality-constrained problem ``G_W x = h_W`` is
    solved through the normal equations; the feasible candidate with
    nonnegative multipliers and the smallest objective wins. Only for
    ``m <= 16``.
    """
    G, h = inst.G, inst.h
    m, n = G.shape
    if m > 16:
        raise ValueError(f"enumeration oracle limited to m <= 16, got {m}")
    tol = max(inst.tolerance, ABS_FLOOR)
    hscale = 1.0 + (np.max(np.abs(h)) if m else 0.0)
    best = None
    for k in range(0, min(m, n) + 1):
        for W in combinations(range(m), k):
            W = list(W)
            if k == 0:
                x = np.zeros(n)
                mu = np.zeros(0)
            else:
                Gw = G[W]
                gram = Gw @ Gw.T
                try:
                    mu = np.linalg.solve(gram, h[W])
                except np.linalg.LinAlgError:
                    continue
                if np.linalg.cond(gram) > 1e12:
                    continue
                x = Gw.T @ mu
            if np.any(mu < -1e-10 * hscale):
                continue
            if m and np.min(G @ x - h) < -tol * hscale:
                continue
            obj = float(x @ x)
            if best is None or obj < best[0]:
                duals = np.zeros(m)
                duals[W] = 2.0 * mu
                best = (obj, x, duals)
    if best is None:
        raise QpInfeasibleError("no feasible active set found by enumeration")
    return _finish(inst, best[1], best[2], 0)
