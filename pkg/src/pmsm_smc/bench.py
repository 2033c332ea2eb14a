"""Per-update cost of each controller on a shared input tape.

Static multiplication counts (``Controller.multiplications``), by inspection
of each ``update``:

* CSMC 12: two fractional powers, gain products and the division by chi.
* ISMC 15: CSMC plus the trapezoidal integral and the lambda terms.
* TSMC 18: terminal shape, boundary saturation and the switching integral.
* ASMC 25: filtered surface derivative, gain adaptation and switching integral.
* STSMC 22: equivalent control (8), square-root term and two integrators.
* FOSMC 4*m + 16: four Gruenwald-Letnikov dot products over ``m`` samples.
"""
from __future__ import annotations

import statistics
import time
from dataclasses import dataclass

from .controllers import CONFIG_TYPES, KINDS, make_controller
from .plant import PmsmParams
from .simulation import nominal_scenario, run_scenario

MIN_UPDATES = 10_000
MIN_BATCHES = 30
WARMUP_UPDATES = 500
MIN_BATCH_NS = 20_000  # grow batches until each spans well above timer resolution


@dataclass(frozen=True)
class ComplexityRow:
    controller: str
    extra_states: int
    mean_update_ns: float
    relative_cost: float
    memory_bytes: int
    multiplications: int
    batch_rsd: float  # relative std of the per-batch medians

    def as_dict(self) -> dict:
        return dict(vars(self))


def record_input_tape(params: PmsmParams | None = None, duration: float = 0.3) -> list:
    """Loop signals of a nominal CSMC run, reused by every controller."""
    tape: list = []
    run_scenario(nominal_scenario("CSMC", duration=duration), params, tape=tape)
    return tape


class _Timed:
    def __init__(self, kind, cfg, params, ts, tape):
        self.ctrl = make_controller(kind, params.derived(), ts, cfg)
        self.tape = tape
        self.pos = 0

    def run(self, count: int) -> int:
        upd, tape, n = self.ctrl.update, self.tape, len(self.tape)
        pos = self.pos
        t0 = time.perf_counter_ns()
        for _ in range(count):
            upd(tape[pos])
            pos += 1
            if pos == n:
                pos = 0
        elapsed = time.perf_counter_ns() - t0
        self.pos = pos
        return elapsed


def _batch_size(timers: list[_Timed], n_updates: int, n_batches: int) -> int:
    size = max(1, n_updates // n_batches)
    # the cheapest controller must still produce measurable batches
    while min(t.run(size) for t in timers) < MIN_BATCH_NS:
        size *= 2
    return size


def _measure(kinds, gains, params, ts, tape, n_updates, n_batches):
    if n_updates < MIN_UPDATES:
        raise ValueError(f"n_updates must be >= {MIN_UPDATES}")
    if n_batches < MIN_BATCHES:
        raise ValueError(f"n_batches must be >= {MIN_BATCHES}")
    timers = [_Timed(k, gains.get(k), params, ts, tape) for k in kinds]
    for t in timers:
        t.run(WARMUP_UPDATES)
    size = _batch_size(timers, n_updates, n_batches)
    per_update = {k: [] for k in kinds}
    # interleave controllers so slow drifts of the machine hit all alike
    for _ in range(n_batches):
        for k, t in zip(kinds, timers):
            per_update[k].append(t.run(size) / size)
    return timers, per_update


def complexity_table(kinds=KINDS, gains: dict | None = None, params: PmsmParams | None = None,
                     n_updates: int = MIN_UPDATES, n_batches: int = MIN_BATCHES,
                     tape: list | None = None, ts: float = 1e-4) -> list[ComplexityRow]:
    """Benchmark ``kinds`` (CSMC is always included as the reference)."""
    params = params or PmsmParams()
    gains = {k.upper(): v for k, v in (gains or {}).items()}
    kinds = [k.upper() for k in kinds]
    measured = list(kinds) if "CSMC" in kinds else ["CSMC", *kinds]
    tape = tape if tape is not None else record_input_tape(params)
    timers, samples = _measure(measured, gains, params, ts, tape, n_updates, n_batches)
    medians = {k: statistics.median(v) for k, v in samples.items()}
    base = medians["CSMC"]
    rows = []
    for k, t in zip(measured, timers):
        if k not in kinds:
            continue
        v = samples[k]
        rows.append(ComplexityRow(
            controller=k,
            extra_states=t.ctrl.extra_states,
            mean_update_ns=medians[k],
            relative_cost=1.0 if k == "CSMC" else medians[k] / base,
            memory_bytes=t.ctrl.memory_bytes,
            multiplications=t.ctrl.multiplications,
            batch_rsd=statistics.pstdev(v) / statistics.mean(v),
        ))
    return rows


def bench_controller(kind: str, cfg=None, n_updates: int = MIN_UPDATES, input_tape: list | None = None,
                     params: PmsmParams | None = None, n_batches: int = MIN_BATCHES) -> ComplexityRow:
    kind = kind.upper()
    if kind not in CONFIG_TYPES:
        raise ValueError(f"unknown controller kind {kind!r}")
    gains = {kind: cfg} if cfg is not None else {}
    rows = complexity_table([kind], gains, params, n_updates, n_batches, input_tape)
    return rows[0]


def format_table(rows: list[ComplexityRow]) -> str:
    head = f"{'controller':<10} {'states':>6} {'ns/update':>11} {'relative':>9} {'bytes':>8} {'mults':>6}"
    lines = [head, "-" * len(head)]
    for r in rows:
        lines.append(f"{r.controller:<10} {r.extra_states:>6d} {r.mean_update_ns:>11.1f} "
                     f"{r.relative_cost:>9.2f} {r.memory_bytes:>8d} {r.multiplications:>6d}")
    return "\n".join(lines)
