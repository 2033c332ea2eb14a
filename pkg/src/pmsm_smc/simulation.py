"""Fixed-step closed-loop simulation of the reduced speed loop.

The plant is integrated with classical RK4 at ``solver_dt``; the controller
runs every ``sample_dt`` and its saturated output is held in between.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
import numpy as np

from .controllers import (
    CONFIG_TYPES, KINDS, Controller, EsoState, LoopSignals,
    eso_update, load_torque_estimate, make_controller,
)
from .integrators import IntegrationError, integrate, rk4_step  # noqa: F401  (re-exported)
from .plant import PmsmParams, reduced_speed_derivative, saturate

BLOWUP_FACTOR = 10.0


@dataclass(frozen=True)
class DisturbanceSchedule:
    """Right-continuous piecewise-constant load torque."""

    initial: float = 0.0
    events: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "events", tuple((float(t), float(v)) for t, v in self.events))
        times = [t for t, _ in self.events]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError(f"disturbance event times must be strictly increasing: {times}")
        if any(t < 0 for t in times):
            raise ValueError("disturbance event times must be >= 0")

    @classmethod
    def rated_unload_reload(cls, torque: float = 1.2) -> DisturbanceSchedule:
        return cls(initial=torque, events=((0.2, 0.0), (0.6, torque)))

    def at(self, t: float) -> float:
        value = self.initial
        for t_event, v in self.events:
            if t_event <= t:
                value = v
            else:
                break
        return value

    @property
    def event_times(self) -> list[float]:
        return [t for t, _ in self.events]


def disturbance_at(schedule: DisturbanceSchedule, t: float) -> float:
    return schedule.at(t)


RPM_TO_RAD_S = 2.0 * math.pi / 60.0


@dataclass(frozen=True)
class Scenario:
    controller_kind: str = "CSMC"
    controller_cfg: object = None  # falls back to gains[kind], then the defaults
    gains: dict = field(default_factory=dict)
    plant: PmsmParams = field(default_factory=PmsmParams)
    omega_ref: float = 700.0
    ref_unit: str = "rad/s"
    ref_profile: str = "step"
    step_time: float = 0.0
    ramp_time: float = 0.02
    duration: float = 1.0
    solver_dt: float = 1e-5
    sample_dt: float = 1e-4
    disturbance: DisturbanceSchedule = field(default_factory=DisturbanceSchedule)
    eso_enabled: bool = False
    eso_bandwidth: float = 2000.0
    load_estimate: str = "eso"  # torque estimate for STSMC: eso | oracle | none
    omega0: float = 0.0
    name: str = ""

    def __post_init__(self):
        if not isinstance(self.controller_kind, str):
            raise TypeError(f"controller kind must be a string, got {self.controller_kind!r}")
        kind = self.controller_kind.upper()
        object.__setattr__(self, "controller_kind", kind)
        if kind not in KINDS and kind != "OPEN":
            raise ValueError(f"unknown controller kind {self.controller_kind!r}")
        gains = {k.upper(): v for k, v in self.gains.items()}
        for k, cfg in gains.items():
            if k not in CONFIG_TYPES:
                raise ValueError(f"gains given for unknown controller {k!r}")
            if not isinstance(cfg, CONFIG_TYPES[k]):
                raise TypeError(f"gains[{k!r}] must be a {CONFIG_TYPES[k].__name__}")
        object.__setattr__(self, "gains", gains)
        if self.controller_cfg is None and kind in CONFIG_TYPES:
            object.__setattr__(self, "controller_cfg", gains.get(kind) or CONFIG_TYPES[kind]())
        if self.ref_unit not in ("rad/s", "rpm"):
            raise ValueError(f"ref_unit must be 'rad/s' or 'rpm', got {self.ref_unit!r}")
        if self.ref_profile not in ("step", "trajectory"):
            raise ValueError(f"ref_profile must be 'step' or 'trajectory', got {self.ref_profile!r}")
        if self.load_estimate not in ("eso", "oracle", "none"):
            raise ValueError(f"load_estimate must be eso, oracle or none, got {self.load_estimate!r}")
        for name in ("duration", "solver_dt", "sample_dt", "eso_bandwidth", "ramp_time"):
            if not getattr(self, name) > 0:
                raise ValueError(f"Scenario.{name} must be > 0")
        if self.step_time < 0:
            raise ValueError("Scenario.step_time must be >= 0")
        ratio = self.sample_dt / self.solver_dt
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            raise ValueError("sample_dt must be an integer multiple of solver_dt")
        times = self.disturbance.event_times
        if times and self.duration < times[-1]:
            raise ValueError("duration must cover the last disturbance event")

    @property
    def substeps(self) -> int:
        return int(round(self.sample_dt / self.solver_dt))

    @property
    def n_samples(self) -> int:
        return int(round(self.duration / self.sample_dt))

    @property
    def omega_ref_rad(self) -> float:
        return self.omega_ref * (RPM_TO_RAD_S if self.ref_unit == "rpm" else 1.0)

    def reference(self, t: float) -> tuple[float, float, float]:
        """Reference speed and its first two derivatives at ``t``."""
        w = self.omega_ref_rad
        if self.ref_profile == "step":
            return (w if t >= self.step_time else 0.0), 0.0, 0.0
        # smoothstep from step_time over ramp_time
        T = self.ramp_time
        p = (t - self.step_time) / T
        if p <= 0.0:
            return 0.0, 0.0, 0.0
        if p >= 1.0:
            return w, 0.0, 0.0
        return (w * (3 * p * p - 2 * p ** 3), w * (6 * p - 6 * p * p) / T, w * (6 - 12 * p) / T ** 2)

    def gains_for(self, kind: str):
        kind = kind.upper()
        return self.gains.get(kind) or CONFIG_TYPES[kind]()

    def with_controller(self, kind: str, cfg=None) -> Scenario:
        return replace(self, controller_kind=kind, controller_cfg=cfg)


def nominal_scenario(kind: str = "CSMC", **kw) -> Scenario:
    return Scenario(controller_kind=kind, name="nominal", **kw)


def disturbed_scenario(kind: str = "CSMC", torque: float = 1.2, **kw) -> Scenario:
    return Scenario(controller_kind=kind, name="disturbed",
                    disturbance=DisturbanceSchedule.rated_unload_reload(torque), **kw)


@dataclass
class RunRecord:
    kind: str
    time: np.ndarray
    omega: np.ndarray
    omega_ref: np.ndarray
    iq_cmd: np.ndarray
    iq_applied: np.ndarray
    error: np.ndarray
    s_value: np.ndarray
    t_load: np.ndarray
    wall_time_per_update: np.ndarray
    sample_dt: float
    failed: bool = False
    failure: str = ""

    def __len__(self) -> int:
        return len(self.time)

    @property
    def duration(self) -> float:
        return len(self.time) * self.sample_dt

    def columns(self) -> dict[str, np.ndarray]:
        return {
            "t": self.time, "omega": self.omega, "omega_ref": self.omega_ref,
            "iq_cmd": self.iq_cmd, "iq_applied": self.iq_applied, "error": self.error,
            "s": self.s_value, "t_load": self.t_load,
        }


class OpenLoop(Controller):
    """Constant current command; used for plant checks, not benchmarked."""

    kind = "OPEN"
    extra_states = 0
    multiplications = 0

    def update(self, loop):
        return float(self.cfg)


def build_controller(scenario: Scenario, params: PmsmParams) -> Controller:
    consts = params.derived()
    # the loop is at rest before t = 0: reference 0, speed omega0
    e_initial = scenario.reference(-1.0)[0] - scenario.omega0
    if scenario.controller_kind == "OPEN":
        return OpenLoop(scenario.controller_cfg or 0.0, consts, scenario.sample_dt)
    return make_controller(scenario.controller_kind, consts, scenario.sample_dt,
                           scenario.controller_cfg, e_initial=e_initial)


def run_scenario(scenario: Scenario, params: PmsmParams | None = None,
                 tape: list | None = None) -> RunRecord:
    """Simulate one closed-loop run; deterministic for identical inputs.

    If ``tape`` is a list, every controller input is appended to it.
    """
    params = params or scenario.plant
    consts = params.derived()
    ctrl = build_controller(scenario, params)
    n, m = scenario.n_samples, scenario.substeps
    h, dt = scenario.sample_dt, scenario.solver_dt
    sched = scenario.disturbance
    limit = params.iq_limit
    blowup = BLOWUP_FACTOR * max(abs(scenario.omega_ref_rad), abs(scenario.omega0), 1.0)

    cols = {name: np.zeros(n) for name in
            ("time", "omega", "omega_ref", "iq_cmd", "iq_applied", "error", "s_value", "t_load")}
    wall = np.zeros(n, dtype=np.int64)

    eso = EsoState(z1=scenario.omega0, z2=0.0, bandwidth=scenario.eso_bandwidth)
    omega = float(scenario.omega0)
    iq_applied = 0.0
    failed, failure, rows = False, "", n

    for k in range(n):
        t = k * h
        ref, ref_dot, ref_ddot = scenario.reference(t)
        t_load_now = sched.at(t)
        lumped = None
        if scenario.eso_enabled:
            eso = eso_update(eso, consts, omega, iq_applied, h)
            lumped = eso.z2
        if scenario.load_estimate == "oracle":
            tl_hat = t_load_now
        elif scenario.load_estimate == "eso" and lumped is not None:
            tl_hat = load_torque_estimate(consts, lumped, omega)
        else:
            tl_hat = 0.0
        loop = LoopSignals.sample(ref, omega, omega_ref_dot=ref_dot, omega_ref_ddot=ref_ddot,
                       iq=iq_applied, lumped_hat=lumped, g_hat=-consts.a_fric * omega,
                       t_load_hat=tl_hat)
        if tape is not None:
            tape.append(loop)
        t0 = time.perf_counter_ns()
        iq_cmd = ctrl.update(loop)
        wall[k] = time.perf_counter_ns() - t0
        if not math.isfinite(iq_cmd):
            failed, failure, rows = True, f"non-finite controller output at sample {k}", k
            break
        iq_applied = saturate(iq_cmd, limit)

        cols["time"][k] = t
        cols["omega"][k] = omega
        cols["omega_ref"][k] = ref
        cols["iq_cmd"][k] = iq_cmd
        cols["iq_applied"][k] = iq_applied
        cols["error"][k] = loop.e
        cols["s_value"][k] = ctrl.s
        cols["t_load"][k] = t_load_now

        for i in range(m):
            ts = t + i * dt
            tl = sched.at(ts)
            omega = rk4_step(lambda _t, w: reduced_speed_derivative(consts, w, iq_applied, tl),
                             omega, dt, ts)
        if not math.isfinite(omega) or abs(omega) > blowup:
            failed, failure, rows = True, f"speed diverged after sample {k}", k + 1
            break

    return RunRecord(
        kind=scenario.controller_kind,
        **{name: arr[:rows] for name, arr in cols.items()},
        wall_time_per_update=wall[:rows],
        sample_dt=h, failed=failed, failure=failure,
    )
