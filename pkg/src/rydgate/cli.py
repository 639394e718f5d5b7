"""Command-line front end.

Subcommands: simulate, scan, calibrate, budget, optimize, oracle-check.
All outputs are deterministic given the configuration file (manifest
timestamps aside).  Every run writes a manifest.json into the output
directory recording the config hash, tool version, command line, and the
produced files; each output references the manifest by name.

Exit codes: 0 success, 1 oracle failure, 2 configuration error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .config import (
    DOPPLER_FREE,
    SINGLE_LASER,
    GateConfig,
    dumps_config,
    load_config,
)
from .errors import (
    GapClosureError,
    InvalidParameterError,
    MissingParameterError,
    PhaseUnreachableError,
    QuadratureUnconvergedError,
    RydgateError,
    StiffFailureError,
)
from .gate import assemble_rho, error_budget, scan_ramp
from .optimizer import optimize, problem_from_config
from .oracles import run_all
from .pulse import adiabaticity_margin, calibrate_hold, conditional_phase

EXIT_OK = 0
EXIT_ORACLE = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

_NUMERIC_ERRORS = (StiffFailureError, PhaseUnreachableError, GapClosureError,
                   QuadratureUnconvergedError)
_CONFIG_ERRORS = (MissingParameterError, InvalidParameterError)

SCAN_COLUMNS = ("ramp_time_us", "err_nomotion", "err_single",
                "err_dopplerfree", "err_no_dipole_force", "gate_time_us")


def _load(args) -> GateConfig:
    text = Path(args.config).read_text()
    config = load_config(text)
    if getattr(args, "configuration", None):
        config = config.with_(configuration=args.configuration)
    return config


def _manifest(args, config: GateConfig, outputs: list[str]) -> dict:
    return {
        "tool": "rydgate",
        "version": __version__,
        "command": " ".join(sys.argv),
        "config_sha256": hashlib.sha256(
            dumps_config(config).encode()
        ).hexdigest(),
        "created_utc": datetime.now(timezone.utc).isoformat(),
        "outputs": outputs,
    }


def _write_manifest(outdir: Path, args, config: GateConfig,
                    outputs: list[str]) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / "manifest.json"
    path.write_text(json.dumps(_manifest(args, config, outputs), indent=2))


def _result_payload(result, budget=None) -> dict:
    payload = {
        "manifest": "manifest.json",
        "basis_order": ["00", "01", "10", "11"],
        "fidelity": result.fidelity,
        "error": 1.0 - result.fidelity,
        "gate_time_us": result.gate_time,
        "loss": result.loss,
        "dp_rel_hbar_k": result.dp_rel,
        "phases_rad": result.phases,
        "rho_real": np.real(result.rho).tolist(),
        "rho_imag": np.imag(result.rho).tolist(),
    }
    if budget is not None:
        payload["budget"] = budget.as_dict()
    return payload


def cmd_simulate(args) -> int:
    config = _load(args)
    outdir = Path(args.out)
    schedule = calibrate_hold(config) if config.hold_time == "auto" else None
    result = assemble_rho(config, schedule,
                          verify_quadrature=args.verify_quadrature)
    budget = error_budget(config, result.schedule)
    outdir.mkdir(parents=True, exist_ok=True)
    out_file = outdir / "gate_result.json"
    out_file.write_text(json.dumps(_result_payload(result, budget), indent=2))
    _write_manifest(outdir, args, config, [out_file.name])
    print(f"configuration:   {config.configuration}")
    print(f"gate time:       {result.gate_time:.4f} us")
    print(f"fidelity:        {result.fidelity:.6f}")
    print(f"error (1-F):     {1 - result.fidelity:.3e}")
    print(f"trace loss:      {result.loss:.3e}")
    print(f"dp_rel:          {result.dp_rel:.4e} hbar*k_L")
    print("error budget:")
    for key, value in budget.as_dict().items():
        print(f"  {key:>13}: {value:.3e}")
    print(f"wrote {out_file}")
    return EXIT_OK


def cmd_scan(args) -> int:
    config = _load(args)
    if not args.ramp_times:
        print("error: --ramp-times must list at least one value", file=sys.stderr)
        return EXIT_CONFIG
    ramp_times = [float(x) for x in args.ramp_times.split(",") if x.strip()]
    if not ramp_times:
        print("error: --ramp-times must list at least one value", file=sys.stderr)
        return EXIT_CONFIG
    rows, skipped = scan_ramp(config, ramp_times, jobs=args.jobs)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    out_file = outdir / "ramp_scan.csv"
    with out_file.open("w", newline="") as fh:
        fh.write("# manifest: manifest.json\n")
        writer = csv.writer(fh)
        writer.writerow(SCAN_COLUMNS)
        for row in rows:
            writer.writerow([
                f"{row.ramp_time:.6g}", f"{row.err_nomotion:.8e}",
                f"{row.err_single:.8e}", f"{row.err_dopplerfree:.8e}",
                f"{row.err_no_dipole_force:.8e}", f"{row.gate_time:.6g}",
            ])
    _write_manifest(outdir, args, config, [out_file.name])
    print(f"scanned {len(rows)} ramp times -> {out_file}")
    for t_r, reason in skipped:
        print(f"skipped t_r = {t_r}: {reason}", file=sys.stderr)
    return EXIT_OK


def cmd_calibrate(args) -> int:
    config = _load(args)
    schedule = calibrate_hold(config)
    phase = conditional_phase(config, schedule)
    margin = adiabaticity_margin(schedule, config)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    out_file = outdir / "calibration.json"
    out_file.write_text(json.dumps({
        "manifest": "manifest.json",
        "hold_time_us": schedule.hold_time,
        "gate_time_us": schedule.total_time,
        "conditional_phase_rad": phase,
        "adiabaticity_margin": margin,
    }, indent=2))
    _write_manifest(outdir, args, config, [out_file.name])
    print(f"hold time:          {schedule.hold_time:.6f} us")
    print(f"total gate time:    {schedule.total_time:.6f} us")
    print(f"conditional phase:  {phase:.8f} rad")
    print(f"adiabaticity:       {margin:.4f}")
    print(f"wrote {out_file}")
    return EXIT_OK


def cmd_budget(args) -> int:
    config = _load(args)
    schedule = calibrate_hold(config) if config.hold_time == "auto" else None
    budget = error_budget(config, schedule)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    out_file = outdir / "error_budget.json"
    out_file.write_text(json.dumps(
        {"manifest": "manifest.json", **budget.as_dict()}, indent=2))
    _write_manifest(outdir, args, config, [out_file.name])
    for key, value in budget.as_dict().items():
        print(f"{key:>13}: {value:.3e}")
    print(f"wrote {out_file}")
    return EXIT_OK


def cmd_optimize(args) -> int:
    config = _load(args)
    problem = problem_from_config(config)
    outcome = optimize(problem, config)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    log_file = outdir / "optimize_log.csv"
    with log_file.open("w", newline="") as fh:
        fh.write("# manifest: manifest.json\n")
        writer = csv.writer(fh)
        writer.writerow(["evaluation", "objective", "best"]
                        + [f"x{k}" for k in range(len(outcome.log[0].params))])
        for entry in outcome.log:
            writer.writerow([entry.evaluation, f"{entry.objective:.8e}",
                             f"{entry.best:.8e}"]
                            + [f"{v:.8e}" for v in entry.params])
    sched_file = outdir / "optimized_schedule.json"
    sched_file.write_text(json.dumps({
        "manifest": "manifest.json",
        "nodes_t_us_omega_delta_rad_per_us": [list(n) for n in
                                              outcome.schedule.nodes],
        "total_time_us": outcome.schedule.total_time,
        "final_error": 1.0 - outcome.result.fidelity,
        "evaluations": outcome.evaluations,
    }, indent=2))
    _write_manifest(outdir, args, config, [log_file.name, sched_file.name])
    print(f"evaluations:  {outcome.evaluations}")
    print(f"best 1-F:     {1 - outcome.result.fidelity:.6e}")
    print(f"gate time:    {outcome.schedule.total_time:.4f} us")
    print(f"wrote {log_file} and {sched_file}")
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    config = _load(args)
    reports = run_all(config)
    for report in reports:
        print(report.line())
    if all(r.passed for r in reports):
        print("all oracles passed")
        return EXIT_OK
    print("oracle failures detected", file=sys.stderr)
    return EXIT_ORACLE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rydgate",
        description="Adiabatic Rydberg-dressed CZ gate simulator",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="TOML config path")
        p.add_argument("--configuration",
                       choices=[SINGLE_LASER, DOPPLER_FREE], default=None,
                       help="override the config's laser geometry")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                       help="worker processes for scans")

    p_sim = sub.add_parser("simulate", help="full gate evaluation")
    common(p_sim)
    p_sim.add_argument("--verify-quadrature", action="store_true",
                       help="fail if doubling quadrature nodes moves F")
    p_sim.set_defaults(func=cmd_simulate)

    p_scan = sub.add_parser("scan", help="ramp-time scan (CSV)")
    common(p_scan)
    p_scan.add_argument("--ramp-times", default="",
                        help="comma-separated ramp times in us")
    p_scan.set_defaults(func=cmd_scan)

    p_cal = sub.add_parser("calibrate", help="hold-time calibration")
    common(p_cal)
    p_cal.set_defaults(func=cmd_calibrate)

    p_bud = sub.add_parser("budget", help="per-mechanism error budget")
    common(p_bud)
    p_bud.set_defaults(func=cmd_budget)

    p_opt = sub.add_parser("optimize", help="pulse-shape optimization")
    common(p_opt)
    p_opt.set_defaults(func=cmd_optimize)

    p_orc = sub.add_parser("oracle-check", help="run verification oracles")
    common(p_orc)
    p_orc.set_defaults(func=cmd_oracle_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _NUMERIC_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except RydgateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
