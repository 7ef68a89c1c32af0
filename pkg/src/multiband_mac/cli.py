"""Command-line front end.

Exit status: 0 success, 2 bad configuration, 3 solver or numerical failure,
4 validation FAIL. Machine-readable output goes to stdout (or ``--output``);
human-readable summaries go to stderr.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import os
import sys
from contextlib import contextmanager
from typing import Any, Iterator, Sequence, TextIO

from . import chain
from .equilibrium import solve_fixed_point
from .errors import ConfigError, DomainError, NumericalError, StateSpaceError
from .experiments import SweepSpec, run_sweep, validate, write_rows
from .params import ProtocolConfig, load_config, parse_overrides
from .simulator import SimConfig, run
from .throughput import saturation_throughput

CONFIG_ENV = "MULTIBAND_MAC_CONFIG"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_VALIDATION = 4


def _add_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help=f"JSON config file (default: ${CONFIG_ENV} if set)")
    p.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override one ProtocolConfig field; repeatable",
    )


def _add_output_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--output", "-o", help="write here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="multiband-mac",
        description="Analytic model and simulator for an integrated sub-6 GHz / mmW WLAN MAC.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="closed-form fixed point and saturation throughput")
    _add_config_args(p)
    _add_output_args(p)
    p.add_argument("--dump-config", action="store_true", help="print the effective config as JSON and exit")
    p.add_argument("--distribution-csv", metavar="PATH", help="also write the stationary distribution at p*")

    p = sub.add_parser("simulate", help="run the slotted simulator once")
    _add_config_args(p)
    _add_output_args(p)
    p.add_argument("--slots", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--window-slots", type=int, default=1, help="slots per mmW DTI accounting window")
    p.add_argument("--trace", metavar="PATH", help="write a per-slot event trace CSV")

    p = sub.add_parser("sweep", help="run a parameter sweep from a spec file")
    p.add_argument("--spec", required=True, help="sweep spec JSON")
    p.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a base config field of the sweep file; repeatable",
    )
    p.add_argument("--format", choices=("json", "csv"), default="csv")
    p.add_argument("--output", "-o")
    p.add_argument("--mode", choices=("analytic", "simulate", "both"))
    p.add_argument("--slots", type=int)
    p.add_argument("--replications", type=int)
    p.add_argument("--seed-base", type=int)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("validate", help="cross-validate analysis against simulation")
    _add_config_args(p)
    _add_output_args(p)
    p.add_argument("--slots", type=int, default=1_000_000)
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--seed-base", type=int, default=0)
    p.add_argument("--bound", type=float, default=0.05)
    p.add_argument("--workers", type=int, default=1)
    return parser


def _config(args: argparse.Namespace) -> ProtocolConfig:
    path = args.config or os.environ.get(CONFIG_ENV) or None
    overrides, duplicates = parse_overrides(args.overrides)
    for key in sorted(set(duplicates)):
        print(f"warning: --set {key} given more than once; last value wins", file=sys.stderr)
    return load_config(path, overrides)


@contextmanager
def _sink(path: str | None) -> Iterator[TextIO]:
    if path is None:
        yield sys.stdout
        return
    try:
        fh = open(path, "w", newline="")
    except OSError as exc:
        raise ConfigError(f"cannot open output {path}: {exc}") from exc
    with fh:
        yield fh


def _emit(record: dict[str, Any], fmt: str, out: TextIO) -> None:
    if fmt == "json":
        out.write(json.dumps(record, indent=2) + "\n")
    else:
        writer = csv.DictWriter(out, fieldnames=list(record))
        writer.writeheader()
        writer.writerow(record)


def _analyze(args: argparse.Namespace) -> int:
    cfg = _config(args)
    if args.dump_config:
        with _sink(args.output) as out:
            out.write(json.dumps(cfg.to_dict(), indent=2) + "\n")
        return EXIT_OK
    eq = solve_fixed_point(cfg)
    report = saturation_throughput(cfg, eq)
    if args.distribution_csv:
        dist = chain.stationary_distribution(eq.p, cfg.alpha, cfg.beta, cfg.W, cfg.m)
        dist.write_csv(args.distribution_csv)
    with _sink(args.output) as out:
        _emit(report.to_dict(), args.format, out)
    print(
        f"J={cfg.J} W={cfg.W} m={cfg.m} alpha={cfg.alpha} beta={cfg.beta}: "
        f"p*={eq.p:.6f} theta_uW={eq.theta_uw:.6f} theta_mmW={eq.theta_mmw:.3e} "
        f"R={report.r_bps / 1e6:.4f} Mbps",
        file=sys.stderr,
    )
    return EXIT_OK


def _simulate(args: argparse.Namespace) -> int:
    cfg = _config(args)
    sim = SimConfig(
        cfg,
        slots=args.slots,
        seed=args.seed,
        mmw_window_slots=args.window_slots,
        trace=bool(args.trace),
    )
    metrics = run(sim)
    if args.trace:
        metrics.trace.write_csv(args.trace)
    with _sink(args.output) as out:
        _emit(metrics.to_dict(), args.format, out)
    print(
        f"{metrics.slots_elapsed} slots: p={metrics.measured_p:.6f} "
        f"theta_uW={metrics.measured_theta_uw:.6f} theta_mmW={metrics.measured_theta_mmw:.3e} "
        f"R={metrics.throughput_bps / 1e6:.4f} Mbps",
        file=sys.stderr,
    )
    return EXIT_OK


def _sweep(args: argparse.Namespace) -> int:
    spec = SweepSpec.load(args.spec)
    changes: dict[str, Any] = {}
    if args.overrides:
        overrides, duplicates = parse_overrides(args.overrides)
        for key in sorted(set(duplicates)):
            print(f"warning: --set {key} given more than once; last value wins", file=sys.stderr)
        changes["base"] = ProtocolConfig.from_dict(overrides, spec.base)
    for attr in ("mode", "slots", "replications", "seed_base"):
        value = getattr(args, attr)
        if value is not None:
            changes[attr] = value
    if changes:
        spec = dataclasses.replace(spec, **changes)
    print(f"sweep {spec.name or args.spec}: {len(spec.points())} points, mode={spec.mode}", file=sys.stderr)
    rows = run_sweep(spec, workers=args.workers, progress=sys.stderr)
    with _sink(args.output) as out:
        write_rows(rows, out, args.format)
    failed = [r for r in rows if r.error]
    for r in failed:
        print(f"point {r.axis}={r.value}: {r.error}", file=sys.stderr)
    return EXIT_NUMERIC if failed and len(failed) == len(rows) else EXIT_OK


def _validate(args: argparse.Namespace) -> int:
    cfg = _config(args)
    report = validate(
        cfg,
        slots=args.slots,
        seeds=args.seeds,
        bound=args.bound,
        seed_base=args.seed_base,
        workers=args.workers,
    )
    with _sink(args.output) as out:
        if args.format == "json":
            out.write(json.dumps(report.to_dict(), indent=2) + "\n")
        else:
            record = {"status": "PASS" if report.passed else "FAIL"}
            for key in report.analytic:
                record[f"analytic_{key}"] = report.analytic[key]
                record[f"simulated_{key}"] = report.simulated[key]
                record[f"rel_error_{key}"] = report.rel_error[key]
            _emit(record, "csv", out)
    print(report.summary(), file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_VALIDATION


_COMMANDS = {"analyze": _analyze, "simulate": _simulate, "sweep": _sweep, "validate": _validate}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, DomainError, StateSpaceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
