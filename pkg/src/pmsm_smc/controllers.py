"""Discrete-time sliding-mode speed controllers.

Every controller maps the sampled loop signals to a q-axis current command
``iq*`` (before saturation, which belongs to the plant boundary). All of
them run at the controller period ``ts``; integrals of smooth signals are
trapezoidal, integrals of switching functions are rectangular.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import ClassVar

import numpy as np

from .fractional import DEFAULT_MEMORY_LEN, GlOperator
from .plant import DerivedConstants

KINDS = ("CSMC", "ISMC", "TSMC", "FOSMC", "ASMC", "STSMC")

# derivative filter time constant, in controller periods
FILTER_PERIODS = 10.0


def sgn(x: float) -> int:
    """Sign with ``sgn(0) == 0``."""
    if x > 0:
        return 1
    if x < 0:
        return -1
    return 0


def sat_boundary(e: float, delta: float) -> float:
    """Boundary-layer saturation: +-1 outside ``[-delta, delta]``, ``e`` inside.

    The middle branch is deliberately not divided by ``delta``.
    """
    if delta <= 0:
        raise ValueError(f"boundary layer must be > 0, got {delta!r}")
    if e > delta:
        return 1.0
    if e < -delta:
        return -1.0
    return e


def reaching_power(s: float, b: float) -> float:
    """``|s|**(b*sgn(|s|-1)) * s``, defined as 0 at ``s == 0``."""
    if s == 0.0:
        return 0.0
    return abs(s) ** (b * sgn(abs(s) - 1.0)) * s


class FilteredDerivative:
    """Backward difference through a first-order low-pass (backward Euler).

    ``initial`` is the signal value assumed before the first sample. With
    the default of 0 a step present at the first sample produces the same
    derivative kick it would produce later in a run; ``None`` makes the
    first sample only prime the filter.
    """

    def __init__(self, ts: float, tau: float | None = None, initial: float | None = 0.0):
        self.ts = ts
        self.tau = FILTER_PERIODS * ts if tau is None else tau
        self.initial = initial
        self._alpha = ts / (self.tau + ts)
        self.reset()

    def reset(self) -> None:
        self.prev = self.initial
        self.value = 0.0

    def __call__(self, x: float) -> float:
        if self.prev is not None:
            raw = (x - self.prev) / self.ts
            self.value += self._alpha * (raw - self.value)
        self.prev = x
        return self.value


@dataclass(frozen=True)
class LoopSignals:
    """Sampled quantities shared by all controllers at one instant.

    ``lumped_hat`` is the observer's estimate of the lumped term (friction
    plus load, in rad/s^2) or ``None`` when no observer runs; ``g_hat`` is
    the model friction term ``-(B/J) omega``; ``t_load_hat`` is the
    load-torque estimate handed to the super-twisting law. Laws that need
    the error derivative estimate it themselves.
    """

    e: float
    omega_ref: float = 0.0
    omega_ref_dot: float = 0.0
    omega_ref_ddot: float = 0.0
    omega: float = 0.0
    iq: float = 0.0
    lumped_hat: float | None = None
    g_hat: float = 0.0
    t_load_hat: float = 0.0

    @property
    def g_d_hat(self) -> float:
        """Best available estimate of g + d (observer, else model friction)."""
        return self.g_hat if self.lumped_hat is None else self.lumped_hat

    @classmethod
    def sample(cls, omega_ref: float, omega: float, **kw) -> LoopSignals:
        return cls(e=omega_ref - omega, omega_ref=omega_ref, omega=omega, **kw)


# -- configurations (defaults are the nominal benchmark tuning) -------------

def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ValueError(msg)


@dataclass(frozen=True)
class CsmcConfig:
    eps: float = 15.0
    k: float = 5.0
    a: float = 0.6
    b: float = 0.8
    c: float = 15.0  # kept for completeness; the law uses s = e

    def __post_init__(self):
        _require(self.eps > 0 and self.k > 0, "CSMC needs eps > 0 and k > 0")
        _require(0 < self.a < 1 and 0 < self.b < 1, "CSMC needs 0 < a, b < 1")


@dataclass(frozen=True)
class IsmcConfig:
    lam: float = 30.0
    eps: float = 15.0
    k: float = 5.0
    a: float = 0.6
    b: float = 0.8
    e_int0: float = 0.0  # initial error integral (rad)

    def __post_init__(self):
        _require(self.lam > 0, "ISMC needs lam > 0")
        _require(self.eps > 0 and self.k > 0, "ISMC needs eps > 0 and k > 0")
        _require(0 < self.a < 1 and 0 < self.b < 1, "ISMC needs 0 < a, b < 1")


@dataclass(frozen=True)
class TsmcConfig:
    c: float = 20.0
    alpha: float = 0.7
    k: float = 10.0
    delta_e: float = 0.02
    compensated: bool = False

    def __post_init__(self):
        _require(self.c > 0 and self.k > 0, "TSMC needs c > 0 and k > 0")
        _require(0 < self.alpha < 1, "TSMC needs 0 < alpha < 1")
        _require(self.delta_e > 0, "TSMC needs delta_e > 0")


@dataclass(frozen=True)
class FosmcConfig:
    kp: float = 1.0
    ki: float = 30.0
    kd: float = 0.002
    alpha: float = 0.8
    beta: float = 0.7
    w: float = 40.0
    ks: float = 8.0
    memory_len: int = DEFAULT_MEMORY_LEN

    def __post_init__(self):
        _require(0 < self.alpha < 1 and 0 < self.beta < 1, "FOSMC needs 0 < alpha, beta < 1")
        _require(self.w > 0 and self.ks > 0, "FOSMC needs w > 0 and ks > 0")
        _require(int(self.memory_len) == self.memory_len and self.memory_len >= 1,
                 "FOSMC memory_len must be a positive integer")


@dataclass(frozen=True)
class AsmcConfig:
    c: float = 15.0
    eta1: float = 2.0
    eta2: float = 1.5
    eta3: float = 0.2
    omega_r_bound: float = 1.0
    h_cap: float = 50.0

    def __post_init__(self):
        _require(self.c > 0, "ASMC needs c > 0")
        _require(min(self.eta1, self.eta2, self.eta3) > 0, "ASMC needs eta1, eta2, eta3 > 0")
        _require(0 < self.omega_r_bound <= self.h_cap, "ASMC needs 0 < omega_r_bound <= h_cap")


@dataclass(frozen=True)
class StsmcConfig:
    c: float = 15.0
    l_gain: float = 8.0  # k1
    w_gain: float = 3.0  # k2

    def __post_init__(self):
        _require(self.c > 0, "STSMC needs c > 0")
        _require(self.l_gain > 0 and self.w_gain > 0, "STSMC needs k1, k2 > 0")
        _require(self.l_gain ** 2 > 4 * self.w_gain,
                 f"STSMC gains violate k1^2 > 4 k2 (k1={self.l_gain}, k2={self.w_gain})")


CONFIG_TYPES = {
    "CSMC": CsmcConfig, "ISMC": IsmcConfig, "TSMC": TsmcConfig,
    "FOSMC": FosmcConfig, "ASMC": AsmcConfig, "STSMC": StsmcConfig,
}

# Faster STSMC/ASMC surfaces used for the comparison runs. With the nominal
# slope c = 15 both laws settle like a 67 ms first-order lag. The retune
# raises c, scales the switching gain to match (k1, eta1) and lifts the ASMC
# gain cap so the switching integral can follow; k2 = 3 still satisfies
# k1^2 > 4 k2 by a wide margin.
RETUNED_GAINS = {
    "STSMC": StsmcConfig(c=100.0, l_gain=60.0, w_gain=3.0),
    "ASMC": AsmcConfig(c=200.0, eta1=20.0, h_cap=5000.0),
}

GAIN_SETS = ("nominal", "retuned")


def gain_set(name: str = "nominal") -> dict:
    """Per-kind configurations for the named preset."""
    if name not in GAIN_SETS:
        raise ValueError(f"unknown gain set {name!r}; expected one of {GAIN_SETS}")
    gains = {kind: cls() for kind, cls in CONFIG_TYPES.items()}
    if name == "retuned":
        gains.update(RETUNED_GAINS)
    return gains


# -- controllers --------------------------------------------------------------

class Controller:
    """Common state handling; subclasses implement :meth:`update`.

    ``e_initial`` is the tracking error assumed before the first sample; it
    primes the error-derivative filter of the laws that use one.
    """

    kind: ClassVar[str]
    extra_states: ClassVar[int]
    multiplications: ClassVar[int]  # static count per update, see bench
    uses_error_rate: ClassVar[bool] = False

    def __init__(self, cfg, consts: DerivedConstants, ts: float, e_initial: float | None = 0.0):
        self.cfg = cfg
        self.consts = consts
        self.ts = ts
        self.e_initial = e_initial
        self.inv_chi = 1.0 / consts.chi
        self.s = 0.0
        self.reset()

    def reset(self) -> None:
        self.s = 0.0
        if self.uses_error_rate:
            self.e_rate = FilteredDerivative(self.ts, initial=self.e_initial)

    @staticmethod
    def _observer_feedforward(loop: LoopSignals) -> float:
        return 0.0 if loop.lumped_hat is None else -loop.lumped_hat

    def update(self, loop: LoopSignals) -> float:
        raise NotImplementedError

    def state_vector(self) -> dict[str, float]:
        return {"s": self.s}

    @property
    def memory_bytes(self) -> int:
        # one double per scalar state plus any array buffers
        n = 0
        for name, value in vars(self).items():
            if name in ("ts", "inv_chi", "e_initial"):
                continue
            if isinstance(value, float):
                n += 8
            elif isinstance(value, FilteredDerivative):
                n += 16
            elif isinstance(value, GlOperator):
                n += value.nbytes
            elif isinstance(value, np.ndarray):
                n += value.nbytes
        return n


class Csmc(Controller):
    kind = "CSMC"
    extra_states = 0
    multiplications = 12

    def update(self, loop):
        cfg = self.cfg
        e = s = loop.e
        self.s = s
        u = (loop.omega_ref_dot - loop.g_d_hat
             + cfg.eps * abs(e) ** cfg.a * sgn(s) + cfg.k * reaching_power(s, cfg.b))
        return u * self.inv_chi


class Ismc(Controller):
    kind = "ISMC"
    extra_states = 1
    multiplications = 15

    def reset(self):
        super().reset()
        self.e_int = 0.0
        self._e_prev: float | None = None

    def update(self, loop):
        cfg = self.cfg
        e = loop.e
        if self._e_prev is None:
            self.e_int = cfg.e_int0
        else:
            self.e_int += 0.5 * self.ts * (e + self._e_prev)
        self._e_prev = e
        s = e + cfg.lam * self.e_int
        self.s = s
        u = (loop.omega_ref_dot + self._observer_feedforward(loop)
             + cfg.eps * abs(e) ** cfg.a * sgn(s) + cfg.k * reaching_power(s, cfg.b)
             + cfg.lam * e)
        return u * self.inv_chi


class Tsmc(Controller):
    kind = "TSMC"
    extra_states = 0  # plus the switching integral, reported separately
    multiplications = 18
    uses_error_rate = True

    def reset(self):
        super().reset()
        self.sw_int = 0.0

    def update(self, loop):
        cfg = self.cfg
        e = loop.e
        shape = cfg.c * abs(e) ** cfg.alpha * sat_boundary(e, cfg.delta_e)
        s = self.e_rate(e) + shape
        self.s = s
        self.sw_int += sgn(s) * self.ts
        u = shape + cfg.k * self.sw_int
        if cfg.compensated:
            u += loop.omega_ref_dot - loop.g_d_hat
        return u * self.inv_chi


class Asmc(Controller):
    kind = "ASMC"
    extra_states = 1
    multiplications = 25
    uses_error_rate = True

    def reset(self):
        super().reset()
        self.s_dot_filter = FilteredDerivative(self.ts)
        self.s_dot = 0.0
        self.omega_gain = self.cfg.omega_r_bound
        self.sw_int = 0.0

    def adapt_gain(self, s: float, s_dot: float) -> float:
        cfg = self.cfg
        candidate = cfg.eta1 * abs(s) - cfg.eta2 * abs(s_dot) + cfg.eta3
        return min(max(candidate, cfg.omega_r_bound), cfg.h_cap)

    def switching_argument(self, s: float, s_dot: float) -> float:
        # s_dot / (2 Omega_r |s_dot|) == sgn(s_dot) / (2 Omega_r), and s alone at s_dot == 0
        return s + sgn(s_dot) / (2.0 * self.cfg.omega_r_bound)

    def update(self, loop):
        cfg = self.cfg
        e = loop.e
        s = self.e_rate(e) + cfg.c * e
        s_dot = self.s_dot_filter(s)
        self.s, self.s_dot = s, s_dot
        # adapt_gain and switching_argument, inlined
        gain = cfg.eta1 * abs(s) - cfg.eta2 * abs(s_dot) + cfg.eta3
        gain = min(max(gain, cfg.omega_r_bound), cfg.h_cap)
        self.omega_gain = gain
        self.sw_int += gain * sgn(s + sgn(s_dot) / (2.0 * cfg.omega_r_bound)) * self.ts
        u = loop.omega_ref_dot + cfg.c * e + self.sw_int
        return u * self.inv_chi


class Fosmc(Controller):
    kind = "FOSMC"
    extra_states = 2

    @property
    def multiplications(self) -> int:
        # four history dot products, four scalings, 12 in the law
        return 4 * int(self.cfg.memory_len) + 16

    def reset(self):
        super().reset()
        cfg, h = self.cfg, self.ts
        m = int(cfg.memory_len)
        self.gl_int_alpha = GlOperator(-cfg.alpha, h, m)
        self.gl_der_beta = GlOperator(cfg.beta, h, m)
        self.gl_der_1ma = GlOperator(1.0 - cfg.alpha, h, m)
        self.gl_der_b1 = GlOperator(cfg.beta + 1.0, h, m)
        self.sw_int = 0.0

    def update(self, loop):
        cfg = self.cfg
        e = loop.e
        i_a = self.gl_int_alpha.apply(e)
        d_b = self.gl_der_beta.apply(e)
        d_1ma = self.gl_der_1ma.apply(e)
        d_b1 = self.gl_der_b1.apply(e)
        s = cfg.kp * e + cfg.ki * i_a + cfg.kd * d_b
        self.s = s
        self.sw_int += sgn(s) * self.ts
        u = (loop.omega_ref_dot + cfg.w * cfg.ki * i_a + cfg.w * cfg.kd * d_b
             + cfg.ks * self.sw_int + (cfg.w + self.consts.a_fric) * cfg.kp * e
             + cfg.ki * d_1ma + cfg.kd * d_b1)
        return u * self.inv_chi


class Stsmc(Controller):
    """Super-twisting law; its output is d(iq)/dt, integrated here to iq*."""

    kind = "STSMC"
    extra_states = 1
    multiplications = 22
    uses_error_rate = True

    def reset(self):
        super().reset()
        self.u1 = 0.0
        self.iq_star = 0.0
        self.u = 0.0

    def equivalent_control(self, loop: LoopSignals) -> float:
        c = self.cfg.c
        k = self.consts
        a = k.a_fric
        return ((k.j / k.kt) * (loop.omega_ref_ddot + c * loop.omega_ref_dot)
                + (a - c) * loop.iq
                + (k.b / k.kt) * (c - a) * loop.omega
                + (c - a) * loop.t_load_hat / k.kt)

    def update(self, loop):
        cfg = self.cfg
        e = loop.e
        s = self.e_rate(e) + cfg.c * e
        self.s = s
        k = self.consts
        g = k.g_sign
        c, a = cfg.c, k.a_fric
        # equivalent_control, inlined
        u_eq = ((k.j / k.kt) * (loop.omega_ref_ddot + c * loop.omega_ref_dot)
                + (a - c) * loop.iq + (k.b / k.kt) * (c - a) * loop.omega
                + (c - a) * loop.t_load_hat / k.kt)
        sg = sgn(s)
        u = u_eq - g * cfg.l_gain * math.sqrt(abs(s)) * sg + self.u1
        self.u1 -= g * cfg.w_gain * sg * self.ts
        self.u = u
        self.iq_star += u * self.ts
        return self.iq_star


CONTROLLER_TYPES: dict[str, type[Controller]] = {
    cls.kind: cls for cls in (Csmc, Ismc, Tsmc, Fosmc, Asmc, Stsmc)
}


def make_controller(kind: str, consts: DerivedConstants, ts: float, cfg=None,
                    e_initial: float | None = 0.0) -> Controller:
    kind = kind.upper()
    if kind not in CONTROLLER_TYPES:
        raise ValueError(f"unknown controller kind {kind!r}; expected one of {KINDS}")
    if cfg is None:
        cfg = CONFIG_TYPES[kind]()
    return CONTROLLER_TYPES[kind](cfg, consts, ts, e_initial)


# -- extended state observer --------------------------------------------------

@dataclass(frozen=True)
class EsoState:
    """Linear ESO: ``z1`` tracks speed, ``z2`` the lumped term (rad/s^2)."""

    z1: float = 0.0
    z2: float = 0.0
    bandwidth: float = 2000.0

    def __post_init__(self):
        if self.bandwidth <= 0:
            raise ValueError(f"ESO bandwidth must be > 0, got {self.bandwidth!r}")


def eso_update(state: EsoState, consts: DerivedConstants, omega_meas: float,
               iq_applied: float, ts: float) -> EsoState:
    """One explicit-Euler step of the observer with both poles at ``-bandwidth``."""
    wo = state.bandwidth
    err = omega_meas - state.z1
    z1 = state.z1 + ts * (consts.chi * iq_applied + state.z2 + 2.0 * wo * err)
    z2 = state.z2 + ts * (wo * wo * err)
    return EsoState(z1=z1, z2=z2, bandwidth=wo)


def load_torque_estimate(consts: DerivedConstants, lumped_hat: float, omega: float) -> float:
    """Recover a load-torque estimate from the lumped term ``-a*omega - T_L/J``."""
    return -consts.j * (lumped_hat + consts.a_fric * omega)
