"""Command-line front end.

Subcommands: solve (one parameter point, full artifacts), ratio-scan
(enhancement over the linearized baseline vs gamma0/omega0), devices
(per-device frequency sweeps with uncertainty bands), validate
(invariant suite).  Every command reads an optional YAML config,
applies PHOTON_INSTANTON_* environment overrides, writes CSV data plus
a JSON metadata sidecar, and is deterministic for a fixed effective
config.

Exit codes: 0 success, 1 domain failure (solver or check failure),
2 config error.
"""

from __future__ import annotations

import argparse
import json
import sys
import traceback
from dataclasses import replace
from pathlib import Path

from .device import get_device, load_devices
from .pipeline import (RunConfig, SweepResult, device_sweep, load_config,
                       ratio_scan, solve_point, validate, write_metadata)

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_CONFIG = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="photon-instanton",
        description="Inelastic photon decay rates from phase slips in a "
                    "transmon terminating a high-impedance junction array")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
            ("solve", "solve one parameter point and store all artifacts"),
            ("ratio-scan", "on-resonance enhancement vs gamma0/omega0"),
            ("devices", "per-device frequency sweeps with error bands"),
            ("validate", "run the invariant suite and report pass/fail")):
        cmd = sub.add_parser(name, help=helptext)
        cmd.add_argument("--config", type=Path, default=None,
                         help="YAML config file; omitted keys use defaults")
        cmd.add_argument("--out", type=Path, default=None,
                         help="output directory (default from config)")
        cmd.add_argument("--no-cache", action="store_true",
                         help="recompute everything, ignore the point cache")
        cmd.add_argument("--workers", type=int, default=None,
                         help="bounded worker count for sweep points")
        cmd.add_argument("--device", type=str, default=None,
                         help="restrict to one named device from the table")
    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    overrides: dict = {}
    if args.out is not None:
        overrides["out_dir"] = str(args.out)
    if args.workers is not None:
        overrides["workers"] = args.workers
    if args.device is not None:
        overrides["device"] = args.device
    config = load_config(args.config, overrides=overrides)
    if args.no_cache:
        config = replace(config, cache=False)
    return config


def _emit(out: Path, name: str, sweep: SweepResult,
          config: RunConfig, extra: dict | None = None) -> None:
    sweep.to_csv(out / f"{name}.csv")
    meta = {"columns": [sweep.axis_name] + list(sweep.columns),
            "errors": {str(k): v for k, v in sweep.errors.items()}}
    if extra:
        meta.update(extra)
    write_metadata(out / f"{name}.meta.json", config, extra=meta)


def cmd_solve(config: RunConfig) -> int:
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        pt = solve_point(config)
    except Exception as exc:
        with open(out / "error.json", "w", encoding="utf-8") as fh:
            json.dump({"error": type(exc).__name__, "message": str(exc),
                       "config_hash": config.config_hash()}, fh, indent=2)
        print(f"solve failed: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    pt.trajectory.save_text(out / "trajectory.txt")
    pt.factors.save_text(out / "factors.txt")
    pt.rates.save_text(out / "rates.txt")
    summary = {
        "cached": pt.cached,
        "method": pt.trajectory.method,
        "residual": pt.trajectory.residual,
        "n_iterations": pt.trajectory.n_iterations,
        "tail_coeff": pt.trajectory.tail_coeff,
        "S0": pt.actions.S0, "dS1": pt.actions.dS1,
        "dS2": pt.actions.dS2, "dS_apprx": pt.actions.dS_apprx,
        "probes_GHz": pt.rates.omegas.tolist(),
        "Gamma_in_GHz": pt.rates.Gamma_in.tolist(),
        "Gamma_in_apprx_GHz": pt.rates.Gamma_in_apprx.tolist(),
        "flags": pt.rates.flags.tolist(),
    }
    write_metadata(out / "solve.meta.json", config, extra=summary)
    print(f"solve ok: residual={pt.trajectory.residual:.3e} "
          f"iterations={pt.trajectory.n_iterations} cached={pt.cached}")
    return EXIT_OK


def cmd_ratio_scan(config: RunConfig) -> int:
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    sweep = ratio_scan(config)
    _emit(out, "ratio_scan", sweep, config)
    for i, g in enumerate(sweep.axis):
        if i in sweep.errors:
            print(f"gamma0/omega0={g:.3f}  FAILED: {sweep.errors[i]}")
        else:
            print(f"gamma0/omega0={g:.3f}  ratio="
                  f"{sweep.columns['ratio'][i]:.4f}")
    return EXIT_DOMAIN if len(sweep.errors) == len(sweep.axis) else EXIT_OK


def cmd_devices(config: RunConfig) -> int:
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if config.device is not None:
        try:
            devices = [get_device(config.device)]
        except KeyError as exc:
            print(exc, file=sys.stderr)
            return EXIT_CONFIG
    else:
        devices = load_devices()
    results = device_sweep(config, devices)
    any_ok = False
    for name, sweep in results.items():
        _emit(out, f"device_{name}", sweep, config)
        n_bad = len(sweep.errors)
        any_ok = any_ok or n_bad < len(sweep.axis)
        print(f"device {name}: {len(sweep.axis) - n_bad}/{len(sweep.axis)} "
              "points ok")
    return EXIT_OK if any_ok else EXIT_DOMAIN


def cmd_validate(config: RunConfig) -> int:
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    checks, chash = validate(config)
    report = {"config_hash": chash,
              "checks": [{"id": c.check_id, "passed": bool(c.passed),
                          "measured": c.measured,
                          "tolerance": c.tolerance,
                          "detail": c.detail} for c in checks]}
    with open(out / "validate.json", "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")
    ok = True
    for c in checks:
        status = "PASS" if c.passed else "FAIL"
        print(f"{status} {c.check_id}: measured {c.measured:.3e} "
              f"(tolerance {c.tolerance:.3e})")
        ok = ok and c.passed
    print(f"config hash {chash}")
    return EXIT_OK if ok else EXIT_DOMAIN


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _config_from_args(args)
    except (ValueError, TypeError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "solve":
            return cmd_solve(config)
        if args.command == "ratio-scan":
            return cmd_ratio_scan(config)
        if args.command == "devices":
            return cmd_devices(config)
        return cmd_validate(config)
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:
        traceback.print_exc()
        print(f"domain failure: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
