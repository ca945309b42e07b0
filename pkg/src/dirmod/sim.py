"""Monte Carlo engine for the DM and ZF secure-transmission scenarios.

Each trial is one quasi-static block: draw ``H_R`` (K x L), ``H_E`` (N x L)
and the symbols, design the DM beamformer and/or the ZF precoder, push the
noisy observations through the legitimate detector and the eavesdropper
attack, and record power and SER.

Random streams are derived from ``(seed, trial index)`` only, so the same
trial sees the same channels and noise at every sweep point (common random
numbers) and results do not depend on how trials are scheduled.
"""
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from . import beamformer, eavesdropper, zf
from .constellation import check_order, detect, sample_symbols, ser
from .errors import (
    ConfigError,
    EstimationImpossibleError,
    InfeasibleStructureError,
    NumericalFailure,
    PrecoderUndefinedError,
    QpInfeasibleError,
)

SCHEMES = ("dm", "zf")
SWEEPS = ("none", "L", "gamma")

OK = "ok"
QP_INFEASIBLE = "qp_infeasible"
STRUCTURE_INFEASIBLE = "structure_infeasible"
PRECODER_UNDEFINED = "precoder_undefined"
NUMERICAL_FAILURE = "numerical_failure"

# child stream order inside a trial; appending is fine, reordering is not
_STREAMS = ("H_R", "H_E", "symbols", "noise_dm", "noise_zf")


@dataclass(frozen=True)
class ScenarioConfig:
    scheme: str = "both"
    K: int = 4
    L: int = 8
    N: int = 6
    M: int = 8
    gamma_sqrt: float = 8.0
    beta: float = 8.0
    channel_variance: float = 1.0
    noise_variance_R: float = 1.0
    noise_variance_E: float = 1.0
    trials: int = 10000
    seed: int = 0
    sweep: str = "none"
    sweep_values: tuple = ()
    symbols_per_trial: int = 1

    def __post_init__(self):
        object.__setattr__(self, "sweep_values", tuple(self.sweep_values))
        self.validate()

    def validate(self):
        if self.scheme not in SCHEMES + ("both",):
            raise ConfigError("scheme", f"must be one of dm, zf, both; got {self.scheme!r}")
        for name in ("K", "L", "N", "trials", "symbols_per_trial"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 1:
                raise ConfigError(name, f"must be an integer >= 1, got {v!r}")
        try:
            check_order(self.M)
        except ValueError as exc:
            raise ConfigError("M", str(exc)) from None
        v = self.channel_variance
        if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
            raise ConfigError("channel_variance", f"must be a positive finite number, got {v!r}")
        # zero noise is allowed for noiseless consistency runs
        for name in ("noise_variance_R", "noise_variance_E"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v >= 0):
                raise ConfigError(name, f"must be a nonnegative finite number, got {v!r}")
        for name in ("gamma_sqrt", "beta"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ConfigError(name, f"must be a positive finite number, got {v!r}")
        if not isinstance(self.seed, (int, np.integer)) or not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed", f"must be an integer in [0, 2**64), got {self.seed!r}")
        if self.sweep not in SWEEPS:
            raise ConfigError("sweep", f"must be one of none, L, gamma; got {self.sweep!r}")
        if self.sweep != "none" and not self.sweep_values:
            raise ConfigError("sweep_values", "a sweep needs at least one value")
        if self.sweep == "L":
            for v in self.sweep_values:
                if int(v) != v or v < 1:
                    raise ConfigError("sweep_values", f"L values must be integers >= 1, got {v!r}")
        if self.sweep == "gamma":
            for v in self.sweep_values:
                if not v > 0:
                    raise ConfigError("sweep_values", f"gamma values must be positive, got {v!r}")

    @property
    def schemes(self):
        return SCHEMES if self.scheme == "both" else (self.scheme,)

    def points(self):
        """``[(x, config)]`` for every sweep value; the config has sweep 'none'."""
        if self.sweep == "none":
            return [(float(self.L), replace(self, sweep="none", sweep_values=()))]
        out = []
        for v in self.sweep_values:
            if self.sweep == "L":
                cfg = replace(self, L=int(v), sweep="none", sweep_values=())
            else:
                # the ZF amplification tracks the DM level
                cfg = replace(self, gamma_sqrt=float(v), beta=float(v), sweep="none", sweep_values=())
            out.append((float(v), cfg))
        return out

    def to_dict(self):
        d = asdict(self)
        d["sweep_values"] = list(self.sweep_values)
        return d

    @classmethod
    def from_dict(cls, d):
        names = {f.name: f for f in fields(cls)}
        unknown = set(d) - set(names)
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown configuration key")
        kw = dict(d)
        if "sweep_values" in kw:
            kw["sweep_values"] = tuple(kw["sweep_values"])
        return cls(**kw)


@dataclass(frozen=True)
class TrialRecord:
    scheme: str
    consumed_power: float = float("nan")
    ser_R: float = float("nan")
    ser_E: float = float("nan")
    eve_strategy: str = ""
    status: str = OK

    @property
    def ok(self):
        return self.status == OK


@dataclass(frozen=True)
class CurvePoint:
    x: float
    scheme: str
    K: int
    L: int
    N: int
    gamma_sqrt: float
    beta: float
    mean_power: float
    mean_ser_R: float
    mean_ser_E: float
    stderr_power: float
    stderr_ser_R: float
    stderr_ser_E: float
    trials_used: int
    trials_skipped: int = 0
    skipped_status: dict = field(default_factory=dict)

    @property
    def flagged(self):
        return self.trials_used == 0


def sample_rayleigh(rows, cols, variance, rng):
    """i.i.d. CN(0, variance) matrix (each of Re/Im has variance/2)."""
    if variance <= 0:
        raise ValueError("variance must be positive")
    z = rng.standard_normal((rows, cols, 2))
    return math.sqrt(variance / 2.0) * (z[..., 0] + 1j * z[..., 1])


def add_awgn(signal, variance, rng):
    """``signal`` plus i.i.d. CN(0, variance) noise; variance 0 returns it unchanged.

    Noise is always drawn so the stream position does not depend on the
    variance.
    """
    if variance < 0:
        raise ValueError("variance must be nonnegative")
    signal = np.asarray(signal, dtype=complex)
    z = rng.standard_normal(signal.shape + (2,))
    if variance == 0:
        return signal.copy()
    return signal + math.sqrt(variance / 2.0) * (z[..., 0] + 1j * z[..., 1])


def trial_streams(seed, trial):
    """Independent generators for one trial, keyed by ``(seed, trial)``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(trial),))
    return dict(zip(_STREAMS, (np.random.Generator(np.random.PCG64(c)) for c in ss.spawn(len(_STREAMS)))))


def _dm_block(cfg, H_R, H_E, s, noise_rng):
    sol = beamformer.design(H_R, s, cfg.gamma_sqrt)
    y_R = add_awgn(H_R @ sol.w, cfg.noise_variance_R, noise_rng)
    y_E = add_awgn(H_E @ sol.w, cfg.noise_variance_E, noise_rng)
    ser_R = ser(s, detect(y_R, cfg.M))
    obs = eavesdropper.EveObservation(y_E, H_E, H_R, cfg.noise_variance_E)
    decisions, strategy = eavesdropper.dm_attack(obs, cfg.M)
    ser_E = ser(s.indices[: decisions.size], decisions)
    return sol.power, ser_R, ser_E, strategy


def _zf_block(cfg, precoder, H_R, H_E, s, noise_rng):
    x = zf.transmit(precoder, s)
    y_R = add_awgn(H_R @ x, cfg.noise_variance_R, noise_rng)
    y_E = add_awgn(H_E @ x, cfg.noise_variance_E, noise_rng)
    ser_R = ser(s, detect(y_R, cfg.M))
    obs = eavesdropper.EveObservation(y_E, H_E, H_R, cfg.noise_variance_E)
    decisions, strategy = eavesdropper.zf_attack_with_fallback(obs, precoder, cfg.M)
    ser_E = ser(s.indices[: decisions.size], decisions)
    return zf.power(x), ser_R, ser_E, strategy


def _run_scheme(scheme, cfg, H_R, H_E, symbols, noise_rng):
    blocks = []
    try:
        if scheme == "dm":
            for s in symbols:
                blocks.append(_dm_block(cfg, H_R, H_E, s, noise_rng))
        else:
            precoder = zf.build(H_R, cfg.beta)
            for s in symbols:
                blocks.append(_zf_block(cfg, precoder, H_R, H_E, s, noise_rng))
    except QpInfeasibleError:
        return TrialRecord(scheme, status=QP_INFEASIBLE)
    except InfeasibleStructureError:
        return TrialRecord(scheme, status=STRUCTURE_INFEASIBLE)
    except PrecoderUndefinedError:
        return TrialRecord(scheme, status=PRECODER_UNDEFINED)
    except (NumericalFailure, EstimationImpossibleError):
        return TrialRecord(scheme, status=NUMERICAL_FAILURE)
    n = len(blocks)
    return TrialRecord(
        scheme,
        consumed_power=math.fsum(b[0] for b in blocks) / n,
        ser_R=math.fsum(b[1] for b in blocks) / n,
        ser_E=math.fsum(b[2] for b in blocks) / n,
        eve_strategy=blocks[0][3],
    )


def run_trial(cfg, streams):
    """One channel realisation; returns a TrialRecord per scheme in ``cfg.schemes``.

    ``streams`` is the mapping returned by :func:`trial_streams`.
    """
    H_R = sample_rayleigh(cfg.K, cfg.L, cfg.channel_variance, streams["H_R"])
    H_E = sample_rayleigh(cfg.N, cfg.L, cfg.channel_variance, streams["H_E"])
    symbols = [sample_symbols(cfg.M, cfg.K, streams["symbols"]) for _ in range(cfg.symbols_per_trial)]
    out = []
    for scheme in cfg.schemes:
        noise = streams["noise_dm"] if scheme == "dm" else streams["noise_zf"]
        out.append(_run_scheme(scheme, cfg, H_R, H_E, symbols, noise))
    return out


def _run_trials(args):
    cfg, start, stop = args
    return [run_trial(cfg, trial_streams(cfg.seed, t)) for t in range(start, stop)]


def _mean_stderr(values):
    n = len(values)
    if n == 0:
        return float("nan"), float("nan")
    mean = math.fsum(values) / n
    if n < 2:
        return mean, 0.0
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var / n)


def aggregate(x, cfg, scheme, records):
    used = [r for r in records if r.ok]
    skipped = {}
    for r in records:
        if not r.ok:
            skipped[r.status] = skipped.get(r.status, 0) + 1
    mp, sp = _mean_stderr([r.consumed_power for r in used])
    mr, sr = _mean_stderr([r.ser_R for r in used])
    me, se = _mean_stderr([r.ser_E for r in used])
    return CurvePoint(
        x=x, scheme=scheme, K=cfg.K, L=cfg.L, N=cfg.N,
        gamma_sqrt=cfg.gamma_sqrt, beta=cfg.beta,
        mean_power=mp, mean_ser_R=mr, mean_ser_E=me,
        stderr_power=sp, stderr_ser_R=sr, stderr_ser_E=se,
        trials_used=len(used), trials_skipped=len(records) - len(used),
        skipped_status=skipped,
    )


def run_point(cfg, threads=1, chunk=250):
    """All trials of a single (non-swept) configuration, in trial order."""
    spans = [(cfg, a, min(a + chunk, cfg.trials)) for a in range(0, cfg.trials, chunk)]
    if threads <= 1 or len(spans) == 1:
        results = [_run_trials(sp) for sp in spans]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_run_trials, spans))
    return [rec for part in results for rec in part]


def run_scenario(cfg, threads=1):
    """CurvePoints for every sweep value and scheme (sweep-major order)."""
    points = []
    for x, pcfg in cfg.points():
        trials = run_point(pcfg, threads=threads)
        for i, scheme in enumerate(pcfg.schemes):
            points.append(aggregate(x, pcfg, scheme, [t[i] for t in trials]))
    return points


FIG2_K = (2, 3, 4)
FIG3_N = (6, 8)
FIG4_K = (2, 4)
L_SWEEP = tuple(range(5, 13))
GAMMA_SWEEP = (1.0, 2.0, 3.0, 4.0, 6.0, 8.0, 10.0, 12.0)


def preset(name, seed=0, trials=10000, **overrides):
    """Scenario configs for the three reference experiments.

    fig2 - power versus L, N=6, sqrt(gamma)=beta=8, one curve per K in {2,3,4}
    fig3 - SER versus L, K=4, sqrt(gamma)=beta=8, one curve per N in {6,8}
    fig4 - SER versus sqrt(gamma) (beta tracks it), L=8, N=6, K in {2,4}
    """
    common = dict(scheme="both", M=8, seed=seed, trials=trials)
    common.update(overrides)
    if name == "fig2":
        base = dict(common, N=6, gamma_sqrt=8.0, beta=8.0, sweep="L", sweep_values=L_SWEEP)
        return [ScenarioConfig(**dict(base, K=k)) for k in FIG2_K]
    if name == "fig3":
        base = dict(common, K=4, gamma_sqrt=8.0, beta=8.0, sweep="L", sweep_values=L_SWEEP)
        return [ScenarioConfig(**dict(base, N=n)) for n in FIG3_N]
    if name == "fig4":
        base = dict(common, L=8, N=6, sweep="gamma", sweep_values=GAMMA_SWEEP)
        return [ScenarioConfig(**dict(base, K=k)) for k in FIG4_K]
    raise ConfigError("preset", f"unknown preset {name!r}; expected fig2, fig3 or fig4")
