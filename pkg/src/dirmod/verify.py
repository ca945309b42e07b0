"""Cross-check campaigns shared by ``dirmod verify`` and the test suite."""
import json
from dataclasses import dataclass

import numpy as np

from . import qp
from .constellation import psk_ser_analytic
from .sim import ScenarioConfig, run_scenario


@dataclass
class CheckFailure:
    check: str
    message: str
    case: dict

    def to_json(self):
        return json.dumps({"check": self.check, "message": self.message, "case": self.case}, indent=2)


def random_qp_instance(rng, max_m=12, max_n=6):
    """Random instance that is feasible by construction.

    ``h = G x0 - slack`` with a standard-normal witness ``x0``; about half of
    the rows pass through ``x0`` exactly and the rest get exponential slack.
    The optimum therefore has ``||x||^2 <= ||x0||^2``.
    """
    m = int(rng.integers(1, max_m + 1))
    n = int(rng.integers(1, max_n + 1))
    G = rng.standard_normal((m, n))
    x0 = rng.standard_normal(n)
    slack = rng.exponential(1.0, m) * (rng.random(m) < 0.5)
    return G, G @ x0 - slack


def qp_campaign(cases=1000, seed=0, objective_tol=1e-8, kkt_tol=1e-9):
    """Compare ``qp.solve`` with the enumeration oracle on random instances.

    Returns ``(n_checked, failures)``.
    """
    rng = np.random.default_rng(seed)
    failures = []
    for i in range(cases):
        G, h = random_qp_instance(rng)
        inst = qp.QpInstance(G, h, tolerance=kkt_tol)
        case = {"index": i, "seed": seed, "G": G.tolist(), "h": h.tolist(), "tolerance": kkt_tol}
        try:
            got = qp.solve(inst)
            ref = qp.solve_by_active_set_enumeration(inst)
        except Exception as exc:  # every failure mode is reported, not raised
            failures.append(CheckFailure("qp", f"{type(exc).__name__}: {exc}", case))
            continue
        err = abs(got.objective - ref.objective)
        if not err <= objective_tol:
            failures.append(CheckFailure("qp", f"objective mismatch {err:.3e} > {objective_tol:.1e}", case))
        elif max(got.kkt.values()) > 1.0:
            failures.append(CheckFailure("qp", f"KKT bounds violated: {got.kkt}", case))
    return cases, failures


def ser_bound_campaign(gamma_values=(1.0, 2.0, 3.0), trials=2000, seed=0, K=4, L=8, N=6, M=8,
                       noise_variance=1.0, n_sigma=3.0):
    """DM legitimate SER must not exceed the analytic PSK SER at amplitude sqrt(gamma).

    Every designed ``|h_i^T w|`` is at least ``sqrt(gamma)``, so the
    single-antenna M-PSK error probability at that amplitude bounds the
    empirical SER (plus ``n_sigma`` Monte Carlo standard errors).
    """
    failures = []
    results = []
    cfg = ScenarioConfig(scheme="dm", K=K, L=L, N=N, M=M, trials=trials, seed=seed,
                         noise_variance_R=noise_variance, noise_variance_E=noise_variance,
                         sweep="gamma", sweep_values=tuple(gamma_values))
    for p in run_scenario(cfg):
        bound = psk_ser_analytic(M, p.x, noise_variance)
        results.append((p.x, p.mean_ser_R, p.stderr_ser_R, bound))
        if not p.mean_ser_R <= bound + n_sigma * p.stderr_ser_R:
            failures.append(CheckFailure(
                "ser_bound",
                f"sqrt(gamma)={p.x}: SER_R {p.mean_ser_R:.4f} exceeds bound {bound:.4f} "
                f"+ {n_sigma} x {p.stderr_ser_R:.4f}",
                {"config": cfg.to_dict(), "x": p.x},
            ))
    return results, failures
