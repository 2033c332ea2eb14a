"""Simulate one controller on the benchmark step and print its figures.

    python3 demos/quickstart.py [KIND]
"""
import sys

from pmsm_smc.controllers import gain_set
from pmsm_smc.metrics import evaluate
from pmsm_smc.simulation import disturbed_scenario, run_scenario

kind = sys.argv[1].upper() if len(sys.argv) > 1 else "ISMC"

# The disturbed scenario starts loaded at rated torque, drops it at 0.2 s
# and puts it back at 0.6 s.
scenario = disturbed_scenario(kind, gains=gain_set("nominal"))
record = run_scenario(scenario)
report = evaluate(record, scenario.omega_ref_rad)

print(f"{kind} tracking {scenario.omega_ref_rad:g} rad/s for {scenario.duration:g} s")
for name, value in report.as_dict().items():
    print(f"  {name:<20} {value:.5g}")

# Speed around the load events, every 50 ms.
for t, w, iq in zip(record.time[::500], record.omega[::500], record.iq_applied[::500]):
    print(f"  t={t:5.2f} s  omega={w:8.2f} rad/s  iq={iq:6.3f} A (applied)")
