"""PMSM plant in the rotor (dq) frame.

Two models live here: the full electrical + mechanical model and the
reduced speed loop used by the controllers, where the q-axis current is
assumed to track its command instantly (ideal current loop).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from .integrators import rk4_step

TWO_PI = 2.0 * math.pi


class NumericDomainError(ValueError):
    """Raised when a state or input value is NaN or infinite."""


def _check_finite(**values: float) -> None:
    for name, value in values.items():
        if not math.isfinite(value):
            raise NumericDomainError(f"non-finite value for {name!r}: {value!r}")


@dataclass(frozen=True)
class PmsmParams:
    """Nameplate constants of the surface-mount machine and its drive.

    Defaults are the nominal benchmark machine.
    """

    rs: float = 0.9  # ohm
    ld: float = 8.5e-3  # H
    lq: float = 8.5e-3  # H
    psi_f: float = 0.175  # Wb
    pn: int = 4
    j: float = 2.8e-4  # kg m^2
    b: float = 1.5e-4  # N m s / rad
    vdc: float = 300.0  # V
    iq_limit: float = 10.0  # A
    fs: float = 10_000.0  # Hz
    t_load_rated: float = 1.2  # N m

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not math.isfinite(value) or value <= 0:
                raise ValueError(f"PmsmParams.{f.name} must be finite and > 0, got {value!r}")
        if int(self.pn) != self.pn or self.pn < 1:
            raise ValueError(f"PmsmParams.pn must be an integer >= 1, got {self.pn!r}")

    @property
    def ts(self) -> float:
        """Controller sampling period in seconds."""
        return 1.0 / self.fs

    @property
    def surface_mount(self) -> bool:
        return self.ld == self.lq

    def derived(self) -> DerivedConstants:
        return DerivedConstants.from_params(self)


@dataclass(frozen=True)
class DerivedConstants:
    """Speed-loop constants derived from :class:`PmsmParams`.

    ``chi`` is the current-to-acceleration gain, ``kt`` the torque
    constant, ``a_fric`` the friction ratio B/J, and ``g_sign`` the sign of
    the control-channel gain -kt/J seen by the super-twisting design.
    """

    chi: float
    kt: float
    a_fric: float
    g_sign: int
    j: float
    b: float
    iq_limit: float

    @classmethod
    def from_params(cls, params: PmsmParams) -> DerivedConstants:
        kt = 1.5 * params.pn * params.psi_f
        return cls(
            chi=kt / params.j,
            kt=kt,
            a_fric=params.b / params.j,
            g_sign=-1,
            j=params.j,
            b=params.b,
            iq_limit=params.iq_limit,
        )


@dataclass(frozen=True)
class MotorState:
    id: float = 0.0
    iq: float = 0.0
    omega_r: float = 0.0
    theta_e: float = 0.0

    def omega_e(self, pn: int) -> float:
        return pn * self.omega_r


@dataclass(frozen=True)
class PlantInput:
    """Voltage-driven input of the full model."""

    ud: float = 0.0
    uq: float = 0.0
    t_load: float = 0.0


def electromagnetic_torque(params: PmsmParams, state: MotorState) -> float:
    _check_finite(id=state.id, iq=state.iq)
    return 1.5 * params.pn * (params.psi_f * state.iq + (params.ld - params.lq) * state.id * state.iq)


def dq_derivatives(params: PmsmParams, state: MotorState, inp: PlantInput) -> tuple[float, float, float, float]:
    """Time derivatives ``(did, diq, domega_r, dtheta_e)`` of the full model."""
    _check_finite(
        id=state.id, iq=state.iq, omega_r=state.omega_r, theta_e=state.theta_e,
        ud=inp.ud, uq=inp.uq, t_load=inp.t_load,
    )
    we = params.pn * state.omega_r
    did = (inp.ud - params.rs * state.id + we * params.lq * state.iq) / params.ld
    diq = (inp.uq - params.rs * state.iq - we * (params.ld * state.id + params.psi_f)) / params.lq
    te = electromagnetic_torque(params, state)
    dw = (te - params.b * state.omega_r - inp.t_load) / params.j
    return did, diq, dw, we


def reduced_speed_derivative(consts: DerivedConstants, omega_r: float, iq_cmd: float, t_load: float) -> float:
    """Speed-loop dynamics with an ideal current loop.

    ``iq_cmd`` must already be saturated.
    """
    _check_finite(omega_r=omega_r, iq_cmd=iq_cmd, t_load=t_load)
    return consts.chi * iq_cmd - consts.a_fric * omega_r - t_load / consts.j


def saturate(value: float, limit: float) -> float:
    if limit <= 0:
        raise ValueError(f"saturation limit must be > 0, got {limit!r}")
    return min(max(value, -limit), limit)


def wrap_angle(theta: float) -> float:
    """Wrap an angle to ``[0, 2*pi)``."""
    wrapped = math.fmod(theta, TWO_PI)
    if wrapped < 0.0:
        wrapped += TWO_PI
    # fmod of a tiny negative number can round back up to exactly 2*pi
    if wrapped >= TWO_PI:
        wrapped = 0.0
    return wrapped


def step_full_model(params: PmsmParams, state: MotorState, inp: PlantInput, dt: float) -> MotorState:
    """Advance the voltage-driven dq model by one RK4 step (inputs held)."""

    def f(_t, y):
        d = dq_derivatives(params, MotorState(*y), inp)
        return np.array(d)

    y = rk4_step(f, np.array([state.id, state.iq, state.omega_r, state.theta_e]), dt)
    if not np.all(np.isfinite(y)):
        raise NumericDomainError("full model produced a non-finite state")
    return MotorState(float(y[0]), float(y[1]), float(y[2]), wrap_angle(float(y[3])))
