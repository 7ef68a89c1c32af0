"""Parameter sweeps and analytic-vs-simulation validation.

A sweep evaluates one operating point per value of ``axis`` (times the
cartesian product of any ``series`` parameters). Each point can be solved
analytically, simulated over several seeds, or both. Points are independent
and may be farmed out to worker processes; output order never depends on
completion order.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping, Sequence, TextIO

from .errors import ConfigError
from .params import ProtocolConfig
from .simulator import SimConfig, SimMetrics, run
from .throughput import ThroughputReport, saturation_throughput

AXES = ("J", "W", "m", "alpha", "beta")
MODES = ("analytic", "simulate", "both")

# (analytic report field, simulated metric field)
VALIDATED = (
    ("p", "measured_p"),
    ("theta_uw", "measured_theta_uw"),
    ("theta_mmw", "measured_theta_mmw"),
    ("r_bps", "throughput_bps"),
)

ANALYTIC_COLUMNS = tuple(ThroughputReport.__dataclass_fields__)
SIM_COLUMNS = (
    "measured_p",
    "measured_theta_uw",
    "measured_theta_mmw",
    "throughput_bps",
    "idle_slots",
    "success_slots",
    "collision_slots",
    "fst_attempts",
    "fst_overhead_slots",
    "mmw_transmissions",
    "uw_successes",
    "collision_slots_per_packet",
    "fst_overhead_slots_per_packet",
)
PARAM_COLUMNS = ("J", "W", "m", "alpha", "beta")


def relative_error(measured: float, reference: float) -> float:
    """``|measured/reference - 1|``; two zeros agree exactly."""
    if reference == 0.0:
        return 0.0 if measured == 0.0 else math.inf
    return abs(measured / reference - 1.0)


@dataclass(frozen=True)
class SweepSpec:
    base: ProtocolConfig
    axis: str
    values: tuple
    mode: str = "analytic"
    replications: int = 5
    seed_base: int = 0
    slots: int = 1_000_000
    series: Mapping[str, tuple] = field(default_factory=dict)
    name: str = ""

    def __post_init__(self) -> None:
        if self.axis not in AXES:
            raise ConfigError(f"axis must be one of {AXES}, got {self.axis!r}")
        if not self.values:
            raise ConfigError("sweep values must be non-empty")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.mode != "analytic" and self.replications < 1:
            raise ConfigError("replications must be >= 1 when simulating")
        if self.slots < 1:
            raise ConfigError("slots must be >= 1")
        for key in self.series:
            if key not in AXES or key == self.axis:
                raise ConfigError(f"series parameter {key!r} must be an axis other than {self.axis!r}")
        # fail early on values outside the parameter domains
        for point in self.points():
            self.base.replace(**point)

    def points(self) -> list[dict[str, Any]]:
        keys = list(self.series)
        combos = itertools.product(*(self.series[k] for k in keys)) if keys else [()]
        out = []
        for combo in combos:
            for value in sorted(self.values):
                point = dict(zip(keys, combo))
                point[self.axis] = value
                out.append(point)
        return out

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SweepSpec":
        allowed = {"name", "base", "axis", "values", "mode", "replications", "seed_base", "slots", "series"}
        unknown = sorted(set(data) - allowed)
        if unknown:
            raise ConfigError(f"unknown sweep field(s): {', '.join(unknown)}")
        if "axis" not in data or "values" not in data:
            raise ConfigError("sweep spec needs 'axis' and 'values'")
        axis = data["axis"]
        base = ProtocolConfig.from_dict(data.get("base", {}))
        kind = int if axis in ("J", "W", "m") else float
        try:
            values = tuple(kind(v) for v in data["values"])
            series = {
                k: tuple((int if k in ("J", "W", "m") else float)(v) for v in vs)
                for k, vs in dict(data.get("series", {})).items()
            }
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad sweep values: {exc}") from None
        return cls(
            base=base,
            axis=axis,
            values=values,
            mode=data.get("mode", "analytic"),
            replications=int(data.get("replications", 5)),
            seed_base=int(data.get("seed_base", 0)),
            slots=int(data.get("slots", 1_000_000)),
            series=series,
            name=str(data.get("name", "")),
        )

    @classmethod
    def load(cls, path: str | Path) -> "SweepSpec":
        try:
            data = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read sweep spec {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"sweep spec {path} is not valid JSON: {exc}") from exc
        return cls.from_dict(data)


@dataclass
class SweepRow:
    axis: str
    value: float
    params: dict[str, Any]
    analytic: ThroughputReport | None = None
    sim_mean: dict[str, float] | None = None
    sim_std: dict[str, float] | None = None
    rel_error: dict[str, float] | None = None
    error: str | None = None

    @property
    def analytic_sim_rel_error(self) -> float | None:
        if self.rel_error is None:
            return None
        return max(self.rel_error.values())

    def flatten(self) -> dict[str, Any]:
        row: dict[str, Any] = {"axis": self.axis, "value": self.value}
        for key in PARAM_COLUMNS:
            row[key] = self.params.get(key)
        report = self.analytic.to_dict() if self.analytic else {}
        for key in ANALYTIC_COLUMNS:
            row[f"analytic_{key}"] = report.get(key)
        for key in SIM_COLUMNS:
            row[f"sim_{key}_mean"] = self.sim_mean.get(key) if self.sim_mean else None
            row[f"sim_{key}_std"] = self.sim_std.get(key) if self.sim_std else None
        for a_key, _ in VALIDATED:
            row[f"rel_error_{a_key}"] = self.rel_error.get(a_key) if self.rel_error else None
        row["analytic_sim_rel_error"] = self.analytic_sim_rel_error
        row["error"] = self.error
        return row


def columns() -> list[str]:
    return list(SweepRow("J", 0, {}).flatten())


def _aggregate(runs: Sequence[SimMetrics]) -> tuple[dict[str, float], dict[str, float]]:
    mean, std = {}, {}
    for key in SIM_COLUMNS:
        xs = [float(getattr(r, key)) for r in runs]
        mean[key] = statistics.fmean(xs)
        std[key] = statistics.stdev(xs) if len(xs) > 1 else 0.0
    return mean, std


def _evaluate(job: tuple[str, dict, ProtocolConfig, str, int, int, int]) -> SweepRow:
    axis, point, cfg, mode, reps, seed_base, slots = job
    row = SweepRow(axis=axis, value=point[axis], params={k: getattr(cfg, k) for k in PARAM_COLUMNS})
    try:
        if mode in ("analytic", "both"):
            row.analytic = saturation_throughput(cfg)
        if mode in ("simulate", "both"):
            runs = [run(SimConfig(cfg, slots=slots, seed=seed_base + r)) for r in range(reps)]
            row.sim_mean, row.sim_std = _aggregate(runs)
        if mode == "both":
            report = row.analytic.to_dict()
            row.rel_error = {a: relative_error(row.sim_mean[s], report[a]) for a, s in VALIDATED}
    except (ArithmeticError, ValueError) as exc:
        row.error = f"{type(exc).__name__}: {exc}"
    return row


def _map(fn: Callable, jobs: list, workers: int, progress: TextIO | None) -> list:
    if workers <= 1:
        out = []
        for i, job in enumerate(jobs, 1):
            out.append(fn(job))
            if progress is not None:
                print(f"  {i}/{len(jobs)}", file=progress)
        return out
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map() yields in submission order
        out = []
        for i, result in enumerate(pool.map(fn, jobs), 1):
            out.append(result)
            if progress is not None:
                print(f"  {i}/{len(jobs)}", file=progress)
        return out


def run_sweep(spec: SweepSpec, workers: int = 1, progress: TextIO | None = None) -> list[SweepRow]:
    jobs = [
        (spec.axis, point, spec.base.replace(**point), spec.mode, spec.replications, spec.seed_base, spec.slots)
        for point in spec.points()
    ]
    return _map(_evaluate, jobs, workers, progress)


def write_rows(rows: Iterable[SweepRow], target: TextIO, fmt: str = "csv") -> None:
    """CSV with a fixed header, or one JSON object per line."""
    if fmt == "csv":
        writer = csv.DictWriter(target, fieldnames=columns())
        writer.writeheader()
        for row in rows:
            writer.writerow({k: "" if v is None else v for k, v in row.flatten().items()})
    elif fmt == "json":
        for row in rows:
            target.write(json.dumps(row.flatten()) + "\n")
    else:
        raise ConfigError(f"unknown output format {fmt!r}")


def rows_to_string(rows: Iterable[SweepRow], fmt: str = "csv") -> str:
    buf = io.StringIO()
    write_rows(rows, buf, fmt)
    return buf.getvalue()


@dataclass
class ValidationReport:
    analytic: dict[str, float]
    simulated: dict[str, float]
    simulated_std: dict[str, float]
    rel_error: dict[str, float]
    bound: float
    slots: int
    seeds: tuple[int, ...]
    config: dict[str, Any]

    @property
    def passed(self) -> bool:
        return all(err < self.bound for err in self.rel_error.values())

    def to_dict(self) -> dict[str, Any]:
        return {
            "status": "PASS" if self.passed else "FAIL",
            "bound": self.bound,
            "slots": self.slots,
            "seeds": list(self.seeds),
            "analytic": self.analytic,
            "simulated": self.simulated,
            "simulated_std": self.simulated_std,
            "rel_error": self.rel_error,
            "config": self.config,
        }

    def summary(self) -> str:
        lines = [f"{'PASS' if self.passed else 'FAIL'} (bound {self.bound:.1%})"]
        for a_key, _ in VALIDATED:
            lines.append(
                f"  {a_key:10s} analytic={self.analytic[a_key]:.6g} "
                f"simulated={self.simulated[a_key]:.6g} rel_err={self.rel_error[a_key]:.3%}"
            )
        return "\n".join(lines)


def _simulate_seed(job: tuple[ProtocolConfig, int, int]) -> SimMetrics:
    cfg, slots, seed = job
    return run(SimConfig(cfg, slots=slots, seed=seed))


def validate(
    cfg: ProtocolConfig,
    slots: int = 1_000_000,
    seeds: int | Sequence[int] = 5,
    bound: float = 0.05,
    *,
    seed_base: int = 0,
    analytic_cfg: ProtocolConfig | None = None,
    workers: int = 1,
) -> ValidationReport:
    """Compare the fixed-point analysis against the mean over seeded runs.

    ``analytic_cfg`` lets the analytic side use a different configuration
    (a negative control should then FAIL).
    """
    if slots < 100_000:
        raise ConfigError(f"validation needs at least 1e5 slots, got {slots}")
    seed_list = tuple(range(seed_base, seed_base + seeds)) if isinstance(seeds, int) else tuple(seeds)
    if not seed_list:
        raise ConfigError("validation needs at least one seed")
    report = saturation_throughput(analytic_cfg if analytic_cfg is not None else cfg).to_dict()
    runs = _map(_simulate_seed, [(cfg, slots, s) for s in seed_list], workers, None)
    analytic, simulated, spread, errors = {}, {}, {}, {}
    for a_key, s_key in VALIDATED:
        xs = [float(getattr(r, s_key)) for r in runs]
        analytic[a_key] = report[a_key]
        simulated[a_key] = statistics.fmean(xs)
        spread[a_key] = statistics.stdev(xs) if len(xs) > 1 else 0.0
        errors[a_key] = relative_error(simulated[a_key], analytic[a_key])
    return ValidationReport(
        analytic=analytic,
        simulated=simulated,
        simulated_std=spread,
        rel_error=errors,
        bound=bound,
        slots=slots,
        seeds=seed_list,
        config=cfg.to_dict(),
    )
