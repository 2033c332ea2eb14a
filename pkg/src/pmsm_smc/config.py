"""Scenario files: TOML with a fixed, strictly checked set of keys.

Layout::

    [plant]                 # optional, motor parameters
    rs = 0.9

    [scenario]              # optional, run conditions
    controller = "CSMC"
    gain_set = "nominal"    # or "retuned"

    [controller.stsmc]      # optional, one table per controller kind
    c = 15.0
    k1 = 8.0
    k2 = 3.0

    [disturbance]           # optional, load torque schedule
    initial = 1.2
    events = [[0.2, 0.0], [0.6, 1.2]]

Anything omitted takes the package defaults. Unknown keys, duplicate keys
and invalid values raise :class:`ConfigError` naming the line.
"""
from __future__ import annotations

import dataclasses
import re
import sys

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .controllers import CONFIG_TYPES, gain_set
from .plant import PmsmParams
from .simulation import DisturbanceSchedule, Scenario


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(field)
        super().__init__(f"{': '.join(where)}: {message}" if where else message)
        self.line = line
        self.field = field


_PLANT_KEYS = {f.name for f in dataclasses.fields(PmsmParams)}
_SCENARIO_KEYS = {
    "controller", "gain_set", "omega_ref", "ref_unit", "ref_profile", "step_time", "ramp_time",
    "duration", "solver_dt", "sample_dt", "eso", "eso_bandwidth", "load_estimate", "omega0", "name",
}
_SCENARIO_RENAMES = {"controller": "controller_kind", "eso": "eso_enabled"}
_DISTURBANCE_KEYS = {"initial", "events"}
# friendlier spellings accepted in controller tables
_ALIASES = {"STSMC": {"k1": "l_gain", "k2": "w_gain"}}


def _locate(text: str, section: str | None, key: str | None = None) -> int | None:
    """Best-effort 1-based line of a table header or of a key inside it."""
    lines = text.splitlines()
    start = 0
    if section is not None:
        header = re.compile(r"^\s*\[\s*" + r"\s*\.\s*".join(map(re.escape, section.split("."))) + r"\s*\]")
        for i, line in enumerate(lines):
            if header.match(line):
                start = i
                break
        else:
            return None
        if key is None:
            return start + 1
    pat = re.compile(r"^\s*" + re.escape(key) + r"\s*=")
    for i in range(start + (1 if section else 0), len(lines)):
        if section is not None and lines[i].lstrip().startswith("["):
            break
        if pat.match(lines[i]):
            return i + 1
    return None


def _check_keys(text, section, table, allowed):
    for key in table:
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} (allowed: {', '.join(sorted(allowed))})",
                              _locate(text, section, key), f"[{section}]")


def _build(text, section, cls, values):
    try:
        return cls(**values)
    except (TypeError, ValueError, AttributeError) as exc:
        raise ConfigError(str(exc), _locate(text, section), f"[{section}]") from None


def _plant(text, doc) -> PmsmParams:
    table = doc.get("plant", {})
    _check_keys(text, "plant", table, _PLANT_KEYS)
    return _build(text, "plant", PmsmParams, table)


def _disturbance(text, doc) -> DisturbanceSchedule:
    table = doc.get("disturbance", {})
    _check_keys(text, "disturbance", table, _DISTURBANCE_KEYS)
    raw = table.get("events", [])
    events = []
    for i, ev in enumerate(raw):
        if not (isinstance(ev, list) and len(ev) == 2 and all(isinstance(v, (int, float)) for v in ev)):
            raise ConfigError(f"event {i} must be [time, torque], got {ev!r}",
                              _locate(text, "disturbance", "events"), "[disturbance] events")
        events.append((float(ev[0]), float(ev[1])))
    return _build(text, "disturbance", DisturbanceSchedule,
                  {"initial": float(table.get("initial", 0.0)), "events": tuple(events)})


def _gains(text, doc, preset: str) -> dict:
    try:
        gains = gain_set(preset)
    except ValueError as exc:
        raise ConfigError(str(exc), _locate(text, "scenario", "gain_set"), "[scenario] gain_set") from None
    tables = doc.get("controller", {})
    if not isinstance(tables, dict):
        raise ConfigError("'controller' must be a table of per-kind tables", _locate(text, None, "controller"))
    for name, table in tables.items():
        kind = name.upper()
        section = f"controller.{name}"
        if kind not in CONFIG_TYPES or not isinstance(table, dict):
            raise ConfigError(f"unknown controller table {name!r} (expected one of "
                              f"{', '.join(k.lower() for k in CONFIG_TYPES)})",
                              _locate(text, section), f"[{section}]")
        cls = CONFIG_TYPES[kind]
        aliases = _ALIASES.get(kind, {})
        allowed = {f.name for f in dataclasses.fields(cls)} | set(aliases)
        _check_keys(text, section, table, allowed)
        values = {}
        for key, value in table.items():
            target = aliases.get(key, key)
            if target in values:
                raise ConfigError(f"{key!r} sets {target!r}, which is already given", _locate(text, section, key), f"[{section}]")
            values[target] = value
        gains[kind] = _build(text, section, cls, values)
    return gains


def parse_scenario(text: str) -> Scenario:
    """Parse and validate a scenario document."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(str(exc), getattr(exc, "lineno", None)) from None
    top = {"plant", "scenario", "controller", "disturbance"}
    for key in doc:
        if key not in top:
            raise ConfigError(f"unknown section {key!r} (allowed: {', '.join(sorted(top))})",
                              _locate(text, key) or _locate(text, None, key))

    params = _plant(text, doc)
    table = doc.get("scenario", {})
    _check_keys(text, "scenario", table, _SCENARIO_KEYS)
    gains = _gains(text, doc, table.get("gain_set", "nominal"))
    values = {_SCENARIO_RENAMES.get(k, k): v for k, v in table.items() if k != "gain_set"}
    values.setdefault("sample_dt", params.ts)
    return _build(text, "scenario", Scenario, dict(
        values, gains=gains, plant=params, disturbance=_disturbance(text, doc)))


def load_scenario(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read())
