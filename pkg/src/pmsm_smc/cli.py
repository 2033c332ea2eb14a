"""Command line front end: ``pmsm-smc {run,compare,bench,validate}``."""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .bench import MIN_UPDATES, complexity_table, format_table
from .config import ConfigError, load_scenario
from .controllers import KINDS
from .report import (
    OutputError, compare_all, default_output_dir, run_one, summary_rows, summary_table, write_run_csv,
)
from .simulation import Scenario

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4


def _controllers(text: str | None) -> list[str]:
    if not text:
        return list(KINDS)
    kinds = [k.strip().upper() for k in text.split(",") if k.strip()]
    unknown = [k for k in kinds if k not in KINDS]
    if unknown:
        raise ConfigError(f"unknown controller(s) {', '.join(unknown)}; choose from {', '.join(KINDS)}",
                          field="--controllers")
    return kinds


def _scenario(args) -> Scenario:
    scenario = load_scenario(args.scenario) if args.scenario else Scenario()
    if getattr(args, "eso", None) is not None:
        scenario = dataclasses.replace(scenario, eso_enabled=args.eso)
    return scenario


def _out_dir(args) -> Path:
    return Path(args.out) if args.out else default_output_dir()


def cmd_validate(args) -> int:
    s = _scenario(args)
    sched = s.disturbance
    print(f"ok: controller {s.controller_kind}, reference {s.omega_ref_rad:g} rad/s, "
          f"{s.n_samples} samples of {s.sample_dt:g} s, {s.substeps} solver steps each")
    print(f"load: initial {sched.initial:g} N*m, events {list(sched.events)}")
    for kind in KINDS:
        print(f"  {kind}: {s.gains_for(kind)}")
    return EXIT_OK


def cmd_run(args) -> int:
    scenario = _scenario(args)
    kinds = _controllers(args.controllers) if args.controllers else [scenario.controller_kind]
    out = _out_dir(args)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create {out}: {exc.strerror or exc}") from exc
    results = [run_one(scenario.name or "run", scenario.with_controller(k), args.band) for k in kinds]
    for r in results:
        if r.record is not None and len(r.record):
            write_run_csv(r.record, out / f"{r.variant}_{r.kind.lower()}.csv")
        if not r.ok:
            print(f"{r.kind}: FAILED ({r.error})", file=sys.stderr)
    name = results[0].variant
    print(summary_table(summary_rows(results, name), name))
    return EXIT_NUMERIC if any(not r.ok for r in results) else EXIT_OK


def cmd_compare(args) -> int:
    scenario = _scenario(args)
    kinds = _controllers(args.controllers)
    comp = compare_all(scenario, _out_dir(args), kinds, args.band, args.plots, args.jobs)
    for path in comp.files:
        if path.suffix == ".md":
            print(path.read_text(encoding="utf-8"))
    print(f"wrote {len(comp.files)} files to {_out_dir(args)}")
    for r in comp.failures:
        print(f"{r.variant}/{r.kind}: FAILED ({r.error})", file=sys.stderr)
    return EXIT_NUMERIC if comp.failures else EXIT_OK


def cmd_bench(args) -> int:
    scenario = _scenario(args)
    kinds = _controllers(args.controllers)
    rows = complexity_table(kinds, scenario.gains, scenario.plant, n_updates=args.bench_updates,
                            ts=scenario.sample_dt)
    print(format_table(rows))
    if args.out or args.save:
        out = _out_dir(args)
        try:
            out.mkdir(parents=True, exist_ok=True)
            with open(out / "complexity.json", "w", encoding="utf-8", newline="\n") as fh:
                json.dump([r.as_dict() for r in rows], fh, indent=2)
                fh.write("\n")
        except OSError as exc:
            raise OutputError(f"cannot write to {out}: {exc.strerror or exc}") from exc
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pmsm-smc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out=True):
        p.add_argument("--scenario", metavar="PATH", help="scenario file (TOML); built-in defaults if omitted")
        p.add_argument("--eso", action=argparse.BooleanOptionalAction, default=None,
                       help="force the disturbance observer on or off (--no-eso)")
        if out:
            p.add_argument("--out", metavar="DIR",
                           help="output directory (default: $PMSM_SMC_OUT or ./results)")

    p = sub.add_parser("validate", help="parse and check a scenario without running it")
    common(p, out=False)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("run", help="simulate one controller (or a few) and write CSV")
    common(p)
    p.add_argument("--controllers", metavar="LIST", help="comma-separated kinds; default: the scenario's")
    p.add_argument("--band", type=float, default=2.0, metavar="PCT", help="settling band in %% (default 2)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="all controllers, nominal and disturbed, with summaries and plots")
    common(p)
    p.add_argument("--controllers", metavar="LIST", help="comma-separated subset of " + ",".join(KINDS))
    p.add_argument("--band", type=float, default=2.0, metavar="PCT", help="settling band in %% (default 2)")
    p.add_argument("--plots", action=argparse.BooleanOptionalAction, default=True, help="write SVG overlays")
    p.add_argument("--jobs", type=int, default=1, metavar="N", help="worker processes (default 1)")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("bench", help="per-update cost table normalised to CSMC")
    common(p)
    p.add_argument("--controllers", metavar="LIST", help="comma-separated subset of " + ",".join(KINDS))
    p.add_argument("--bench-updates", type=int, default=MIN_UPDATES, metavar="N",
                   help=f"timed updates per controller (>= {MIN_UPDATES})")
    p.add_argument("--save", action="store_true", help="also write complexity.json to the output directory")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "band", 2.0) <= 0:
        print("error: --band must be > 0", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OutputError, FileNotFoundError, PermissionError) as exc:
        if isinstance(exc, FileNotFoundError) and getattr(args, "scenario", None) and \
                exc.filename == args.scenario:
            print(f"config error: scenario file not found: {args.scenario}", file=sys.stderr)
            return EXIT_CONFIG
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ArithmeticError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
