"""``dirmod`` command line: run scenarios, solve one instance, verify the solver.

Exit codes: 0 success, 2 configuration error, 3 numerical failure (including
partially completed scenarios), 4 verification failure.
"""
import argparse
import csv
import io
import json
import os
import sys
import time
from dataclasses import fields

import numpy as np

from . import __version__, beamformer, sim
from .constellation import SymbolVector
from .errors import (
    ConfigError,
    InfeasibleStructureError,
    NumericalFailure,
    QpInfeasibleError,
)
from .verify import qp_campaign, ser_bound_campaign

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_VERIFY = 0, 2, 3, 4

CSV_COLUMNS = (
    "x", "scheme", "K", "L", "N", "gamma_sqrt", "beta",
    "mean_power", "mean_ser_R", "mean_ser_E",
    "stderr_power", "stderr_ser_R", "stderr_ser_E", "trials_used",
)

_FIELD_TYPES = {f.name: f.type for f in fields(sim.ScenarioConfig)}
_INT_FIELDS = {"K", "L", "N", "M", "trials", "seed", "symbols_per_trial"}
_STR_FIELDS = {"scheme", "sweep"}

# CLI flag -> ScenarioConfig field
_FLAG_FIELDS = {
    "scheme": "scheme", "K": "K", "L": "L", "N": "N", "M": "M",
    "gamma_sqrt": "gamma_sqrt", "beta": "beta", "trials": "trials", "seed": "seed",
    "sweep": "sweep", "sweep_values": "sweep_values",
    "noise_variance": None, "channel_variance": "channel_variance",
    "symbols_per_trial": "symbols_per_trial",
}


def parse_value(key, raw):
    """Convert a config-file or flag string to the type of ScenarioConfig.<key>."""
    raw = raw.strip()
    try:
        if key in _INT_FIELDS:
            return int(raw)
        if key in _STR_FIELDS:
            return raw
        if key == "sweep_values":
            return tuple(float(v) for v in raw.split(",") if v.strip())
        if key in _FIELD_TYPES:
            return float(raw)
    except ValueError:
        raise ConfigError(key, f"cannot parse {raw!r}") from None
    raise ConfigError(key, "unknown configuration key")


def read_config(path):
    """Flat ``key = value`` file; '#' starts a comment."""
    out = {}
    try:
        text = open(path, encoding="utf-8").read()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}") from None
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("config", f"{path}:{lineno}: expected key=value")
        key, value = (p.strip() for p in line.split("=", 1))
        out[key] = parse_value(key, value)
    return out


def _overrides(args):
    out = {}
    for flag, field_name in _FLAG_FIELDS.items():
        v = getattr(args, flag, None)
        if v is None:
            continue
        if flag == "noise_variance":
            out["noise_variance_R"] = out["noise_variance_E"] = v
        elif flag == "sweep_values":
            out[field_name] = parse_value("sweep_values", v)
        else:
            out[field_name] = v
    return out


def _env_seed():
    raw = os.environ.get("DIRMOD_SEED")
    if raw is None or raw == "":
        return None
    try:
        return int(raw)
    except ValueError:
        raise ConfigError("DIRMOD_SEED", f"not an integer: {raw!r}") from None


def build_configs(args):
    """Scenario configs from preset / config file / flags (flags win)."""
    if args.replay:
        try:
            manifest = json.load(open(args.replay, encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise ConfigError("replay", f"cannot load manifest {args.replay}: {exc}") from None
        return [sim.ScenarioConfig.from_dict(c) for c in manifest["configs"]], manifest.get("preset")
    settings = read_config(args.config) if args.config else {}
    settings.update(_overrides(args))
    if "seed" not in settings:
        env = _env_seed()
        if env is not None:
            settings["seed"] = env
    if args.preset:
        return sim.preset(args.preset, **settings), args.preset
    return [sim.ScenarioConfig(**settings)], None


def point_row(p):
    return [
        repr(float(p.x)), p.scheme, p.K, p.L, p.N, repr(float(p.gamma_sqrt)), repr(float(p.beta)),
        repr(p.mean_power), repr(p.mean_ser_R), repr(p.mean_ser_E),
        repr(p.stderr_power), repr(p.stderr_ser_R), repr(p.stderr_ser_E), p.trials_used,
    ]


def write_csv(path, points, footer=None):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for p in points:
        w.writerow(point_row(p))
    if footer:
        buf.write(footer + "\n")
    if path == "-":
        sys.stdout.write(buf.getvalue())
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())


def manifest_path(out):
    root, _ = os.path.splitext(out)
    return root + ".manifest.json"


def summary_table(points):
    lines = [f"{'x':>7} {'scheme':>6} {'K':>3} {'L':>3} {'N':>3} {'power':>10} {'SER_R':>8} {'SER_E':>8} {'used':>6}"]
    for p in points:
        lines.append(
            f"{p.x:7.2f} {p.scheme:>6} {p.K:3d} {p.L:3d} {p.N:3d} {p.mean_power:10.4f} "
            f"{p.mean_ser_R:8.4f} {p.mean_ser_E:8.4f} {p.trials_used:6d}"
        )
    return "\n".join(lines)


def cmd_run(args):
    configs, preset_name = build_configs(args)
    threads = max(1, args.threads)
    started = time.perf_counter()
    points = []
    failure = None
    try:
        for cfg in configs:
            points.extend(sim.run_scenario(cfg, threads=threads))
    except NumericalFailure as exc:
        failure = f"{type(exc).__name__}: {exc}"
    flagged = [p for p in points if p.flagged]
    footer = None
    if failure or flagged:
        footer = f"# partial: rows={len(points)} flagged={len(flagged)}"
    write_csv(args.out, points, footer)
    if args.out != "-":
        manifest = {
            "version": __version__,
            "preset": preset_name,
            "seed": configs[0].seed if configs else None,
            "configs": [c.to_dict() for c in configs],
            "wall_clock_seconds": time.perf_counter() - started,
            "threads": threads,
            "points": [dict(zip(CSV_COLUMNS, point_row(p))) for p in points],
            "failure": failure,
        }
        with open(manifest_path(args.out), "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2)
        print(summary_table(points))
    if failure:
        print(f"error: {failure}", file=sys.stderr)
    for p in flagged:
        print(f"error: no usable trials at x={p.x} scheme={p.scheme} ({p.skipped_status})", file=sys.stderr)
    return EXIT_NUMERICAL if footer else EXIT_OK


def read_channel(path):
    """Complex matrix from CSV cells like ``0.3-1.2j`` (row-major)."""
    rows = []
    try:
        with open(path, encoding="utf-8") as fh:
            for line in csv.reader(fh):
                cells = [c.strip().replace(" ", "") for c in line if c.strip()]
                if cells:
                    rows.append([complex(c) for c in cells])
    except OSError as exc:
        raise ConfigError("channel", f"cannot read {path}: {exc}") from None
    except ValueError as exc:
        raise ConfigError("channel", f"bad complex entry in {path}: {exc}") from None
    if not rows or len({len(r) for r in rows}) != 1:
        raise ConfigError("channel", "channel CSV must be a non-empty rectangular matrix")
    return np.array(rows, dtype=complex)


def cmd_solve(args):
    H = read_channel(args.channel)
    try:
        idx = [int(v) for v in args.symbols.split(",") if v.strip()]
    except ValueError:
        raise ConfigError("symbols", f"expected comma-separated integers, got {args.symbols!r}") from None
    if len(idx) != H.shape[0]:
        raise ConfigError("symbols", f"{len(idx)} symbols for a channel with K={H.shape[0]} rows")
    try:
        s = SymbolVector(idx, args.M)
    except ValueError as exc:
        raise ConfigError("symbols", str(exc)) from None
    if not args.gamma_sqrt > 0:
        raise ConfigError("gamma_sqrt", "must be positive")
    try:
        sol = beamformer.design(H, s, args.gamma_sqrt)
    except InfeasibleStructureError as exc:
        raise ConfigError("L", str(exc)) from None
    print(f"{'antenna':>7} {'Re(w)':>14} {'Im(w)':>14}")
    for i, v in enumerate(sol.w):
        print(f"{i:7d} {v.real:14.8f} {v.imag:14.8f}")
    print(f"power {sol.power:.10g}")
    print(f"phase_residual {sol.phase_residual:.3e}")
    return EXIT_OK


def cmd_verify(args):
    failures = []
    n, qp_fail = qp_campaign(cases=args.cases, seed=args.seed, objective_tol=args.tolerance,
                             kkt_tol=args.kkt_tolerance)
    print(f"qp oracle campaign: {n - len(qp_fail)}/{n} instances agree")
    failures.extend(qp_fail)
    if not args.skip_ser:
        results, ser_fail = ser_bound_campaign(trials=args.ser_trials, seed=args.seed)
        for x, m, se, bound in results:
            print(f"ser bound sqrt(gamma)={x:g}: SER_R={m:.4f} (+-{se:.4f}) <= {bound:.4f}")
        failures.extend(ser_fail)
    if failures:
        first = failures[0]
        print(f"FAIL: {len(failures)} check(s) failed; first: {first.message}", file=sys.stderr)
        if args.replay_out:
            with open(args.replay_out, "w", encoding="utf-8") as fh:
                fh.write(first.to_json())
            print(f"failing case written to {args.replay_out}", file=sys.stderr)
        else:
            print(first.to_json(), file=sys.stderr)
        return EXIT_VERIFY
    print("all checks passed")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError("arguments", message)


def make_parser():
    p = _Parser(prog="dirmod", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"dirmod {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="run a Monte Carlo scenario and write CSV + manifest")
    r.add_argument("--preset", choices=("fig2", "fig3", "fig4"))
    r.add_argument("--scheme", choices=("dm", "zf", "both"))
    r.add_argument("--K", type=int)
    r.add_argument("--L", type=int)
    r.add_argument("--N", type=int)
    r.add_argument("--M", type=int)
    r.add_argument("--gamma-sqrt", dest="gamma_sqrt", type=float)
    r.add_argument("--beta", type=float)
    r.add_argument("--noise-variance", dest="noise_variance", type=float)
    r.add_argument("--channel-variance", dest="channel_variance", type=float)
    r.add_argument("--sweep", choices=sim.SWEEPS)
    r.add_argument("--sweep-values", dest="sweep_values", help="comma-separated sweep values")
    r.add_argument("--symbols-per-trial", dest="symbols_per_trial", type=int)
    r.add_argument("--trials", type=int)
    r.add_argument("--seed", type=int)
    r.add_argument("--threads", type=int, default=1)
    r.add_argument("--out", default="dirmod_run.csv", help="CSV path, '-' for stdout")
    r.add_argument("--config", help="key=value file; flags override it")
    r.add_argument("--replay", help="re-run the configs recorded in a manifest")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("solve", help="design one DM beamformer and print it")
    s.add_argument("--channel", required=True, help="CSV of complex entries, K rows x L columns")
    s.add_argument("--symbols", required=True, help="comma-separated symbol indices, one per row")
    s.add_argument("--M", type=int, default=8)
    s.add_argument("--gamma-sqrt", dest="gamma_sqrt", type=float, default=8.0)
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="cross-check the QP solver and the SER bound")
    v.add_argument("--cases", type=int, default=1000)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--tolerance", type=float, default=1e-8, help="objective agreement tolerance")
    v.add_argument("--kkt-tolerance", dest="kkt_tolerance", type=float, default=1e-9)
    v.add_argument("--ser-trials", dest="ser_trials", type=int, default=2000)
    v.add_argument("--skip-ser", dest="skip_ser", action="store_true")
    v.add_argument("--replay-out", dest="replay_out", help="write the first failing case here")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None):
    try:
        args = make_parser().parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, QpInfeasibleError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
