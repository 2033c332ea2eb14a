"""Independent reference implementations used by several test modules."""
import math

import numpy as np
import mpmath


def direct_gl(order, h, x):
    """O(k^2) Gruenwald-Letnikov sum with closed-form binomial weights.

    The weights come from 40-digit binomials so the oracle's own rounding
    stays well below the tolerances it is checked against.
    """
    n = len(x)
    with mpmath.workdps(40):
        w = np.array([float((-1) ** j * mpmath.binomial(mpmath.mpf(order), j)) for j in range(n)])
    out = np.empty(n)
    for k in range(n):
        out[k] = h ** (-order) * math.fsum(w[j] * x[k - j] for j in range(k + 1))
    return out


def eso_one_percent_time(bandwidth, ts, chi=3750.0, t_load=1.2, j=2.8e-4, horizon=20.0):
    """Last time the lumped estimate is more than 1 % off, observer fed an exact ramp."""
    from pmsm_smc.controllers import EsoState, eso_update
    from pmsm_smc.plant import PmsmParams

    consts = PmsmParams().derived()
    d = -t_load / j
    state = EsoState(0.0, 0.0, bandwidth)
    last = 0.0
    n = int(round(horizon / bandwidth / ts))
    for k in range(1, n + 1):
        omega = d * (k - 1) * ts  # speed measured at the start of the step, iq = 0
        state = eso_update(state, consts, omega, 0.0, ts)
        if abs(state.z2 - d) > 0.01 * abs(d):
            last = k * ts
    return last, state, d
