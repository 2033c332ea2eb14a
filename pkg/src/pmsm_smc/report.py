"""Run artefacts: per-run CSV files, summary tables and overlay plots."""
from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .controllers import KINDS
from .metrics import MetricsReport, evaluate
from .simulation import DisturbanceSchedule, RunRecord, Scenario, run_scenario

CSV_HEADER = ("t", "omega", "omega_ref", "iq_cmd", "iq_applied", "error", "s", "t_load")
VARIANTS = ("nominal", "disturbed")
SUMMARY_COLUMNS = (
    ("ise", "ISE"), ("iae", "IAE"), ("itse", "ITSE"), ("itae", "ITAE"),
    ("rise_time", "rise [s]"), ("settling_time", "settle [s]"), ("overshoot_pct", "overshoot [%]"),
    ("steady_state_error", "sse [rad/s]"), ("chattering_index", "chatter [A/s]"),
)


class OutputError(OSError):
    """A result file could not be written."""


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def write_run_csv(record: RunRecord, path) -> Path:
    """Write one run as CSV: fixed header, 9 significant digits, ``\\n`` endings."""
    path = Path(path)
    cols = record.columns()
    data = [np.asarray(cols[name], dtype=float) for name in CSV_HEADER]
    lines = [",".join(CSV_HEADER)]
    for row in zip(*data):
        lines.append(",".join(_fmt(v) for v in row))
    try:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def read_run_csv(path) -> dict[str, np.ndarray]:
    with open(path, encoding="ascii", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) for v in row] for row in reader]
    arr = np.array(rows, dtype=float).reshape(-1, len(header))
    return {name: arr[:, i] for i, name in enumerate(header)}


def variant(scenario: Scenario, name: str) -> Scenario:
    """The nominal (no load) or disturbed copy of ``scenario``.

    A scenario without any load schedule gets the rated unload/reload
    profile as its disturbed variant.
    """
    if name == "nominal":
        return replace(scenario, disturbance=DisturbanceSchedule(), name="nominal")
    if name != "disturbed":
        raise ValueError(f"unknown variant {name!r}")
    sched = scenario.disturbance
    if not sched.events and sched.initial == 0.0:
        sched = DisturbanceSchedule.rated_unload_reload(scenario.plant.t_load_rated)
    return replace(scenario, disturbance=sched, name="disturbed")


@dataclass
class RunResult:
    variant: str
    kind: str
    record: RunRecord | None = None
    metrics: MetricsReport | None = None
    error: str = ""

    @property
    def ok(self) -> bool:
        return not self.error


@dataclass
class Comparison:
    results: list[RunResult] = field(default_factory=list)
    files: list[Path] = field(default_factory=list)

    def get(self, variant_name: str, kind: str) -> RunResult:
        for r in self.results:
            if r.variant == variant_name and r.kind == kind:
                return r
        raise KeyError((variant_name, kind))

    @property
    def failures(self) -> list[RunResult]:
        return [r for r in self.results if not r.ok]


def run_one(name: str, scenario: Scenario, band_pct: float = 2.0) -> RunResult:
    """Simulate and score one run; failures are captured, not raised."""
    kind = scenario.controller_kind
    try:
        record = run_scenario(scenario)
    except (ArithmeticError, ValueError) as exc:
        return RunResult(name, kind, error=f"{type(exc).__name__}: {exc}")
    if record.failed:
        return RunResult(name, kind, record=record, error=record.failure)
    metrics = evaluate(record, scenario.omega_ref_rad, band_pct, step_time=scenario.step_time)
    return RunResult(name, kind, record=record, metrics=metrics)


def _run_job(job) -> RunResult:
    return run_one(*job)


def run_all(scenario: Scenario, controllers=KINDS, band_pct: float = 2.0, jobs: int = 1) -> list[RunResult]:
    """Simulate every requested controller on both variants."""
    jobs_list = [(v, variant(scenario, v).with_controller(k), band_pct)
                 for v in VARIANTS for k in controllers]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_job, jobs_list))
    return [_run_job(j) for j in jobs_list]


def _clean(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def summary_rows(results: list[RunResult], variant_name: str) -> dict[str, dict]:
    out = {}
    for r in results:
        if r.variant != variant_name:
            continue
        if r.ok:
            out[r.kind] = {k: _clean(v) for k, v in r.metrics.as_dict().items()}
        else:
            out[r.kind] = {"failed": r.error}
    return out


def _best(rows: dict[str, dict], key: str) -> set[str]:
    vals = {}
    for kind, row in rows.items():
        v = row.get(key)
        if v is None:
            continue
        vals[kind] = abs(v) if key == "steady_state_error" else v
    if not vals:
        return set()
    lo = min(vals.values())
    return {k for k, v in vals.items() if v == lo}


def summary_table(rows: dict[str, dict], title: str) -> str:
    """Markdown table, the best (smallest) entry of each column in bold."""
    best = {key: _best(rows, key) for key, _ in SUMMARY_COLUMNS}
    lines = [f"# {title}", "",
             "| controller | " + " | ".join(label for _, label in SUMMARY_COLUMNS) + " |",
             "|---|" + "---:|" * len(SUMMARY_COLUMNS)]
    for kind, row in rows.items():
        if "failed" in row:
            cells = ["failed"] * len(SUMMARY_COLUMNS)
        else:
            cells = []
            for key, _ in SUMMARY_COLUMNS:
                v = row[key]
                text = "n/a" if v is None else f"{v:.5g}"
                cells.append(f"**{text}**" if kind in best[key] else text)
        lines.append(f"| {kind} | " + " | ".join(cells) + " |")
    failed = [f"- {k}: {row['failed']}" for k, row in rows.items() if "failed" in row]
    if failed:
        lines += ["", "Failed runs:", *failed]
    return "\n".join(lines) + "\n"


def _write_text(path: Path, text: str) -> Path:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def plot_overlays(results: list[RunResult], variant_name: str, out_dir: Path,
                  event_times=()) -> list[Path]:
    """Speed and current-command overlays of one variant as SVG."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "pmsm-smc"  # stable element ids
    runs = [r for r in results if r.variant == variant_name and r.record is not None]
    paths = []
    for quantity, ylabel, stem in (("omega", "speed [rad/s]", "speed"),
                                   ("iq_cmd", "iq command [A]", "iq")):
        fig, ax = plt.subplots(figsize=(8, 4.5))
        for r in runs:
            ax.plot(r.record.time, getattr(r.record, quantity), lw=1.0, label=r.kind)
        if quantity == "omega" and runs:
            ax.plot(runs[0].record.time, runs[0].record.omega_ref, "k--", lw=0.8, label="reference")
        for t_ev in event_times:
            ax.axvline(t_ev, color="grey", ls=":", lw=0.8)
        ax.set_xlabel("time [s]")
        ax.set_ylabel(ylabel)
        ax.set_title(f"{variant_name}: {ylabel.split(' [')[0]}")
        ax.grid(alpha=0.3)
        ax.legend(loc="best", fontsize=8)
        path = out_dir / f"{stem}_{variant_name}.svg"
        try:
            fig.savefig(path, format="svg", metadata={"Date": None})
        except OSError as exc:
            raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
        finally:
            plt.close(fig)
        paths.append(path)
    return paths


def compare_all(scenario: Scenario, out_dir, controllers=KINDS, band_pct: float = 2.0,
                plots: bool = True, jobs: int = 1) -> Comparison:
    """Run each controller on the nominal and disturbed variants and write artefacts.

    A failed run is reported in the summaries; the other runs still go ahead.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create {out}: {exc.strerror or exc}") from exc
    controllers = [k.upper() for k in controllers]
    comp = Comparison(run_all(scenario, controllers, band_pct, jobs))
    summary = {"band_pct": band_pct, "omega_ref": scenario.omega_ref_rad, "controllers": controllers}
    for v in VARIANTS:
        for r in comp.results:
            if r.variant == v and r.record is not None and len(r.record):
                comp.files.append(write_run_csv(r.record, out / f"{v}_{r.kind.lower()}.csv"))
        rows = summary_rows(comp.results, v)
        summary[v] = rows
        comp.files.append(_write_text(out / f"summary_{v}.md", summary_table(rows, f"{v} run")))
        if plots:
            events = variant(scenario, v).disturbance.event_times
            comp.files += plot_overlays(comp.results, v, out, events)
    comp.files.append(_write_text(out / "summary.json",
                                  json.dumps(summary, indent=2, sort_keys=True, allow_nan=False) + "\n"))
    return comp


def default_output_dir() -> Path:
    return Path(os.environ.get("PMSM_SMC_OUT", "results"))
