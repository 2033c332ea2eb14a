"""Run all six laws on the nominal and disturbed variants and write the artefacts.

    python3 demos/compare_controllers.py [OUT_DIR]

Uses the retuned preset, where the super-twisting and adaptive laws get
a steeper surface. Pass ``nominal`` as a second argument for the base gains.
"""
import sys
from pathlib import Path

from pmsm_smc.controllers import gain_set
from pmsm_smc.report import compare_all
from pmsm_smc.simulation import DisturbanceSchedule, Scenario

out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("results/demo_compare")
preset = sys.argv[2] if len(sys.argv) > 2 else "retuned"

scenario = Scenario(gains=gain_set(preset), disturbance=DisturbanceSchedule.rated_unload_reload(1.2))
comp = compare_all(scenario, out, plots=True)

print((out / "summary_nominal.md").read_text())
print((out / "summary_disturbed.md").read_text())
print(f"{len(comp.files)} files in {out}")
