"""How the extended state observer sees a load step, and what it does for STSMC.

The observer is fed the measured speed and applied current. Its second
state converges to the lumped term -a*omega - T_L/J, from which a load
estimate is recovered and fed forward.
"""
import numpy as np

from pmsm_smc.controllers import gain_set
from pmsm_smc.metrics import evaluate
from pmsm_smc.simulation import DisturbanceSchedule, Scenario, run_scenario

load = DisturbanceSchedule(1.2, ((0.2, 0.0), (0.6, 1.2)))
rows = []
for mode in ("none", "eso", "oracle"):
    s = Scenario(controller_kind="STSMC", gains=gain_set("retuned"), disturbance=load,
                 eso_enabled=mode == "eso", load_estimate=mode)
    rec = run_scenario(s)
    m = evaluate(rec, s.omega_ref_rad)
    dip = float(np.max(np.abs(rec.error[rec.time > 0.6])))
    rows.append((mode, m.ise, m.iae, dip))

print(f"{'load estimate':<14} {'ISE':>10} {'IAE':>8} {'max |e| after reload':>22}")
for mode, ise, iae, dip in rows:
    print(f"{mode:<14} {ise:>10.1f} {iae:>8.3f} {dip:>22.2f}")
