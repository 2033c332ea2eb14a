import functools

import pytest

from pmsm_smc.controllers import gain_set
from pmsm_smc.simulation import disturbed_scenario, nominal_scenario, run_scenario


@functools.lru_cache(maxsize=None)
def cached_run(kind: str, variant: str = "nominal", gains: str = "nominal"):
    """Benchmark runs are deterministic, so each one is simulated once per session."""
    make = nominal_scenario if variant == "nominal" else disturbed_scenario
    return run_scenario(make(kind, gains=gain_set(gains)))


@pytest.fixture(scope="session")
def runs():
    return cached_run
