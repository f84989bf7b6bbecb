"""Command-line surface: run one scenario, sweep a grid, tabulate detection
probabilities, or print final-size oracle values.

Exit codes: 0 success, 1 config/usage problem, 2 numerical failure.
Everything is deterministic; --seedless is accepted for scripting symmetry
but deterministic is the only mode there is.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import parse_config
from .errors import ConfigError, EpitriggerError
from .output import emit_result, render_detection, _write_text
from .scenario import run_scenario, sir_final_size_oracle
from .surveillance import detection_time, sample_daily_prevalence
from .sweep import run_sweep


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", required=True, metavar="PATH",
                   help="config document (flat dotted keys)")
    p.add_argument("--out", metavar="PATH",
                   help="write the result here instead of stdout")
    p.add_argument("--seedless", action="store_true",
                   help="deterministic mode (the only mode; accepted as a no-op)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="epitrigger",
        description="Triggered-response epidemic scenarios: naive spread, "
                    "surveillance detection, behavioral/quarantine response.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="integrate one scenario, write the trajectory")
    _add_common(p_run)

    p_sweep = sub.add_parser("sweep", help="evaluate the config's parameter grid")
    _add_common(p_sweep)
    p_sweep.add_argument("--workers", type=int, default=1, metavar="N",
                         help="process-pool size (results identical for any N)")

    p_detect = sub.add_parser("detect", help="day-by-day detection table for "
                                             "the config's naive phase")
    _add_common(p_detect)

    p_oracle = sub.add_parser("oracle", help="SIR final-size oracle values")
    p_oracle.add_argument("--r0", type=float, nargs="+", required=True,
                          metavar="R0", help="one or more reproduction numbers")
    p_oracle.add_argument("--s0", type=float, default=1.0,
                          help="initial susceptible fraction (default 1)")
    p_oracle.add_argument("--r-init", type=float, default=0.0,
                          help="initially recovered fraction (default 0)")
    p_oracle.add_argument("--out", metavar="PATH")
    p_oracle.add_argument("--seedless", action="store_true",
                          help="deterministic mode (the only mode)")
    return parser


def _load(path: str):
    return parse_config(Path(path).read_text())


def _destination(args):
    return args.out if args.out else sys.stdout


def _cmd_run(args) -> int:
    parsed = _load(args.config)
    if parsed.axes:
        raise ConfigError("config defines sweep axes; use the sweep command")
    result = run_scenario(parsed.scenario)
    emit_result(result, _destination(args), parsed)
    return 0


def _cmd_sweep(args) -> int:
    parsed = _load(args.config)
    if not parsed.axes:
        raise ConfigError("config defines no sweep axes; add sweep.axis1.*")
    result = run_sweep(parsed.scenario, parsed.axes, workers=args.workers)
    emit_result(result, _destination(args), parsed)
    return 0


def _cmd_detect(args) -> int:
    parsed = _load(args.config)
    naive_cfg = replace(parsed.scenario, trigger=None, extinction_threshold=0.0)
    result = run_scenario(naive_cfg)
    prevalence = sample_daily_prevalence(result.phase1)
    detection = detection_time(prevalence, parsed.surveillance)
    days = np.arange(1, len(prevalence) + 1)
    text = render_detection(days, prevalence, detection, parsed)
    _write_text(_destination(args), text)
    return 0


def _cmd_oracle(args) -> int:
    lines = []
    for r0 in args.r0:
        fs = sir_final_size_oracle(r0, args.s0, args.r_init)
        lines.append(f"r0 = {format(r0, '.12g')}  final_size = {format(fs, '.12g')}")
    _write_text(_destination(args), "\n".join(lines) + "\n")
    return 0


_COMMANDS = {"run": _cmd_run, "sweep": _cmd_sweep,
             "detect": _cmd_detect, "oracle": _cmd_oracle}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; fold that into the config-error code
        code = exc.code if isinstance(exc.code, int) else 1
        return 0 if code == 0 else 1
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except EpitriggerError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
