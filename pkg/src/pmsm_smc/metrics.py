"""Error indices, step-response figures and a chattering index for a run."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np


@dataclass(frozen=True)
class StepMetrics:
    rise_time: float  # s, nan when the 10 %/90 % levels are never crossed
    settling_time: float  # s, nan when the band is never held to the end
    overshoot_pct: float
    steady_state_error: float  # rad/s, reference minus speed
    settled: bool
    rose: bool


@dataclass(frozen=True)
class MetricsReport:
    ise: float
    iae: float
    itse: float
    itae: float
    rise_time: float
    settling_time: float
    overshoot_pct: float
    steady_state_error: float
    chattering_index: float
    settled: bool = True

    def as_dict(self) -> dict:
        return asdict(self)


def _time_error(record):
    t = np.asarray(record.time, dtype=float)
    e = np.asarray(record.error, dtype=float)
    if t.size == 0:
        raise ValueError("empty record")
    return t, e


def integral_indices(record) -> tuple[float, float, float, float]:
    """Trapezoidal ISE, IAE, ITSE and ITAE over the whole record."""
    t, e = _time_error(record)
    if t.size == 1:
        return 0.0, 0.0, 0.0, 0.0
    e2, ea = e * e, np.abs(e)
    return (
        float(np.trapezoid(e2, t)),
        float(np.trapezoid(ea, t)),
        float(np.trapezoid(t * e2, t)),
        float(np.trapezoid(t * ea, t)),
    )


def _first_crossing(t: np.ndarray, y: np.ndarray, level: float) -> float:
    """Linearly interpolated first time ``y`` reaches ``level`` (rising)."""
    idx = np.flatnonzero(y >= level)
    if idx.size == 0:
        return math.nan
    i = idx[0]
    if i == 0:
        return float(t[0])
    y0, y1 = y[i - 1], y[i]
    return float(t[i - 1] + (level - y0) / (y1 - y0) * (t[i] - t[i - 1]))


def step_metrics(record, reference: float, band_pct: float = 2.0,
                 step_time: float | None = None) -> StepMetrics:
    """Rise (10-90 %), settling, overshoot and final-5 % mean error.

    Times are measured from ``step_time`` (the first sample by default).
    """
    t = np.asarray(record.time, dtype=float)
    w = np.asarray(record.omega, dtype=float)
    if t.size == 0:
        raise ValueError("empty record")
    t0 = float(t[0]) if step_time is None else step_time
    after = t >= t0
    t, w = t[after], w[after]
    start = float(w[0])
    step = reference - start
    if step == 0:
        raise ValueError("reference equals the initial speed; no step to measure")

    # normalise so the response always rises from 0 to 1
    y = (w - start) / step
    t10 = _first_crossing(t, y, 0.1)
    t90 = _first_crossing(t, y, 0.9)
    rose = math.isfinite(t10) and math.isfinite(t90)
    rise = t90 - t10 if rose else math.nan

    band = band_pct / 100.0 * abs(step)
    outside = np.flatnonzero(np.abs(w - reference) > band)
    if outside.size == 0:
        settling, settled = float(t[0]) - t0, True
    elif outside[-1] == t.size - 1:
        settling, settled = math.nan, False
    else:
        settling, settled = float(t[outside[-1] + 1]) - t0, True

    peak = float(np.max((w - reference) * np.sign(step)))
    overshoot = max(0.0, peak) / abs(reference) * 100.0 if reference != 0 else 0.0

    n_tail = max(1, int(round(0.05 * t.size)))
    sse = float(np.mean(reference - w[-n_tail:]))
    return StepMetrics(rise, settling, overshoot, sse, settled, rose)


def chattering_index(record, window: float = 0.25) -> float:
    """Total variation rate of ``iq_cmd`` over the trailing ``window`` fraction (A/s)."""
    if not 0 < window <= 1:
        raise ValueError(f"window must be in (0, 1], got {window!r}")
    iq = np.asarray(record.iq_cmd, dtype=float)
    n = iq.size
    if n < 2:
        return 0.0
    n_w = max(1, int(round(window * n)))
    tail = iq[max(0, n - n_w - 1):]
    diffs = np.abs(np.diff(tail))
    return float(np.sum(diffs) / (diffs.size * record.sample_dt))


def evaluate(record, reference: float, band_pct: float = 2.0, window: float = 0.25,
             step_time: float | None = None) -> MetricsReport:
    ise, iae, itse, itae = integral_indices(record)
    sm = step_metrics(record, reference, band_pct, step_time)
    return MetricsReport(
        ise=ise, iae=iae, itse=itse, itae=itae,
        rise_time=sm.rise_time, settling_time=sm.settling_time,
        overshoot_pct=sm.overshoot_pct, steady_state_error=sm.steady_state_error,
        chattering_index=chattering_index(record, window), settled=sm.settled,
    )
