"""Command-line front end: ``holojcas {convergence,sweep,validate}``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import asdict

from . import harness, validation
from .config import CONFIG_FIELDS, ConfigError, SystemConfig
from .geometry import build_geometry, steering_bundle
from .optimizer import OptimizationError, optimize

SWEEP_COLUMNS = (
    "axis_value",
    "scheme",
    "mean_rate",
    "mean_crb_theta_lin",
    "mean_crb_phi_lin",
    "mean_crb_theta_db",
    "mean_crb_phi_db",
    "mean_crb_theta_db_alt",
    "mean_crb_phi_db_alt",
    "n_ok",
    "n_failed",
)
TRACE_COLUMNS = ("iteration", "rate", "crb_theta_db", "crb_phi_db", "objective", "tx_power")

RUN_KEYS = {"snr_db", "theta_t_deg", "phi_t_deg", "sweep", "n_trials", "output", "format", "trial_index"}
SWEEP_KEYS = {"axis", "values"}


class CliError(Exception):
    pass


def _parse_gamma(value):
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, (int, float)):
        return complex(value)
    raise ConfigError("gamma must be a number or a [real, imag] pair")


def load_run_config(path: str | None, overrides: dict | None = None) -> tuple[SystemConfig, dict]:
    """Read a JSON run file into a validated SystemConfig plus run options.

    Unknown keys are rejected. ``snr_db`` sets both noise variances;
    ``theta_t_deg``/``phi_t_deg`` are accepted as degree alternatives.
    """
    data: dict = {}
    if path is not None:
        try:
            with open(path) as fh:
                data = json.load(fh)
        except OSError as exc:
            raise CliError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise CliError(f"malformed config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise CliError("config file must contain a JSON object")
    data = {**data, **(overrides or {})}

    unknown = set(data) - set(CONFIG_FIELDS) - RUN_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    physical = {k: data[k] for k in CONFIG_FIELDS if k in data}
    if "gamma" in physical:
        physical["gamma"] = _parse_gamma(physical["gamma"])
    for key in ("theta_t", "phi_t"):
        if f"{key}_deg" in data:
            if key in data:
                raise ConfigError(f"give either {key} or {key}_deg, not both")
            physical[key] = math.radians(float(data[f"{key}_deg"]))
    for key in ("M", "K", "t_max", "t_max_w", "master_seed"):
        if key in physical:
            value = physical[key]
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f"{key} must be an integer (got {value!r})")
    try:
        config = SystemConfig(**physical)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    if "snr_db" in data:
        config = config.with_snr_db(float(data["snr_db"]))

    run = {k: data[k] for k in RUN_KEYS if k in data}
    if "sweep" in run:
        sw = run["sweep"]
        if not isinstance(sw, dict) or set(sw) - SWEEP_KEYS or not SWEEP_KEYS <= set(sw):
            raise ConfigError("sweep must be an object with exactly the keys 'axis' and 'values'")
        if sw["axis"] not in harness.AXES:
            raise ConfigError(f"sweep axis must be one of {harness.AXES}")
        if not isinstance(sw["values"], list) or not sw["values"]:
            raise ConfigError("sweep values must be a non-empty list")
    if run.get("format", "csv") not in ("csv", "json"):
        raise ConfigError("format must be 'csv' or 'json'")
    return config, run


def fmt(x) -> str:
    """Shortest round-trip text for floats; plain str otherwise."""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(x) for x in row])
    return buf.getvalue()


def _db(x: float) -> float:
    return 10 * math.log10(x)


def trace_rows(trace) -> list[tuple]:
    return [
        (i, r.rate, _db(r.crb_theta), _db(r.crb_phi), r.weighted_objective, r.tx_power)
        for i, r in enumerate(trace.records, start=1)
    ]


def render_sweep(result: harness.SweepResult, fmt_name: str) -> str:
    if fmt_name == "json":
        doc = {"axis": result.axis, "values": result.values, "points": [asdict(p) for p in result.points]}
        return json.dumps(doc, indent=2, allow_nan=True) + "\n"
    rows = [tuple(getattr(p, c) for c in SWEEP_COLUMNS) for p in result.points]
    return _csv_text(SWEEP_COLUMNS, rows)


def _overrides(args) -> dict:
    out = {}
    if getattr(args, "seed", None) is not None:
        out["master_seed"] = args.seed
    if getattr(args, "trials", None) is not None:
        out["n_trials"] = args.trials
    if getattr(args, "format", None) is not None:
        out["format"] = args.format
    return out


def _output_path(args, run: dict) -> str:
    path = args.out or run.get("output")
    if not path:
        raise CliError("no output path: pass --out or set 'output' in the config")
    return path


def cmd_convergence(args) -> int:
    config, run = load_run_config(args.config, _overrides(args))
    out = _output_path(args, run)
    trial = int(run.get("trial_index", 0))
    geo = build_geometry(config)
    h = harness.draw_channel(config, trial)
    try:
        _, trace = optimize(config, h, geo, steering_bundle(config))
    except OptimizationError as exc:
        raise CliError(str(exc)) from exc
    rows = trace_rows(trace)
    if run.get("format", "csv") == "json":
        doc = {"termination": trace.termination, "rows": [dict(zip(TRACE_COLUMNS, r)) for r in rows]}
        write_atomic(out, json.dumps(doc, indent=2) + "\n")
    else:
        write_atomic(out, _csv_text(TRACE_COLUMNS, rows))
    print(f"{trace.termination} after {trace.iterations} iterations; wrote {out}")
    return 0


def cmd_sweep(args) -> int:
    config, run = load_run_config(args.config, _overrides(args))
    out = _output_path(args, run)
    if "sweep" not in run:
        raise CliError("config has no 'sweep' section")
    n_trials = int(run.get("n_trials", 100))
    result = harness.sweep(config, run["sweep"]["axis"], run["sweep"]["values"], n_trials)
    write_atomic(out, render_sweep(result, run.get("format", "csv")))
    print(f"wrote {len(result.points)} rows to {out}")
    return 0


def cmd_validate(args) -> int:
    return 0 if validation.run_all() else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="holojcas", description="Hybrid holographic JCAS beamforming simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func, help_ in (
        ("convergence", cmd_convergence, "trace one seeded optimization run"),
        ("sweep", cmd_sweep, "Monte-Carlo sweep over SNR, RF chains or aperture size"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--out", help="output file (overrides 'output' in the config)")
        p.add_argument("--seed", type=int, help="master seed override")
        p.add_argument("--trials", type=int, help="trial count override")
        p.add_argument("--format", choices=("csv", "json"))
        p.set_defaults(func=func)
    p = sub.add_parser("validate", help="run the built-in oracle checks")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CliError, ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
