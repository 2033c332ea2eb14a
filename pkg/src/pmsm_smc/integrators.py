"""Classical fixed-step Runge-Kutta integration."""
from __future__ import annotations

from typing import Callable

import numpy as np


class IntegrationError(FloatingPointError):
    def __init__(self, step: int, message: str = "non-finite state"):
        super().__init__(f"{message} at step {step}")
        self.step = step


def rk4_step(f: Callable, y, dt: float, t: float = 0.0):
    """One classical Runge-Kutta step of ``y' = f(t, y)``."""
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt!r}")
    k1 = f(t, y)
    k2 = f(t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = f(t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = f(t + dt, y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate(f: Callable, y0, t0: float, dt: float, n: int):
    """Take ``n`` RK4 steps; raises :class:`IntegrationError` on NaN/inf."""
    y = y0
    for i in range(n):
        y = rk4_step(f, y, dt, t0 + i * dt)
        if not np.all(np.isfinite(y)):
            raise IntegrationError(i)
    return y
