"""TOML run configuration.

Frequencies are given in Hz (keys ending ``_hz``) and converted to angular
frequency (x 2 pi); durations in seconds; angles in radians; heating rates in
quanta per second.  Unknown keys are rejected with their full key path.

Sections::

    [gate]      GateConfig fields
    [ramsey]    RamseyConfig fields
    [noise]     delta_prime_rms_hz, mode_freq_rms_hz, shots, seed
    [solver]    EvolveOptions fields
    [sweep]     axis, values | (start, stop, points), schemes, delta_prime_hz
    [drive]     omega_0_hz, Delta_hz, omega_r_hz, delta_hz, table
    [figure]    per-figure scan settings
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .dynamics import EvolveOptions
from .model import ConfigError, Envelope, GateConfig, RamseyConfig
from .noise import JitterModel
from .zeeman import DriveFrequencies

TWO_PI = 2 * math.pi

# key -> (target field, kind); kind "hz" scales by 2 pi
_GATE_KEYS = {
    "scheme": ("scheme", str),
    "omega_hz": ("omega", "hz"),
    "delta_hz": ("delta", "hz"),
    "omega_c_hz": ("omega_c", "hz"),
    "delta_prime_hz": ("delta_prime", "hz"),
    "loops": ("loops", int),
    "mode_sign": ("mode_sign", str),
    "refocus_pulse": ("refocus_pulse", bool),
    "fock_dim": ("fock_dim", int),
    "initial_nbar": ("initial_nbar", float),
    "heating_rate": ("heating_rate", float),
    "carrier_phase": ("carrier_phase", float),
    "ssb_sideband": ("ssb_sideband", str),
    "duration": ("duration", float),
    "pi_pulse_duration": ("pi_pulse_duration", float),
}
_ENVELOPE_KEYS = {"kind": ("kind", str), "ramp_time": ("ramp_time", float)}
_RAMSEY_KEYS = {
    "exposure_time": ("exposure_time", float),
    "dd_enabled": ("dd_enabled", bool),
    "omega_c_hz": ("omega_c", "hz"),
    "delta_prime_rms_hz": ("delta_prime_rms", "hz"),
    "delta_prime_hz": ("delta_prime", "hz"),
    "analysis_phase": ("analysis_phase", float),
    "shots": ("shots", int),
    "seed": ("seed", int),
}
_NOISE_KEYS = {
    "delta_prime_rms_hz": ("delta_prime_rms", "hz"),
    "mode_freq_rms_hz": ("mode_freq_rms", "hz"),
    "shots": ("shots", int),
    "seed": ("seed", int),
}
_SOLVER_KEYS = {
    "method": ("method", str),
    "steps_per_cycle": ("steps_per_cycle", int),
    "min_steps": ("min_steps", int),
    "max_step": ("max_step", float),
    "samples_per_segment": ("samples_per_segment", int),
    "rtol": ("rtol", float),
    "atol": ("atol", float),
    "truncation_limit": ("truncation_limit", float),
}
_SWEEP_KEYS = {"axis", "values", "start", "stop", "points", "schemes", "delta_prime_hz"}
_DRIVE_KEYS = {
    "omega_0_hz": ("omega_0", "hz"),
    "Delta_hz": ("Delta", "hz"),
    "omega_r_hz": ("omega_r", "hz"),
    "delta_hz": ("delta", "hz"),
}
_FIGURE_KEYS = {
    "delta_start_hz", "delta_stop_hz", "points", "phases", "sigma_hz", "omega_c_over_omega",
    "samples_per_segment", "schemes", "delta_prime_hz", "ssb_fock_dim",
}
_SECTIONS = {"gate", "ramsey", "noise", "solver", "sweep", "drive", "figure"}

# sweep axes: name -> (section, key in that section, unit)
SWEEP_AXES = {
    "omega_c": ("gate", "omega_c", "hz"),
    "delta": ("gate", "delta", "hz"),
    "delta_prime": ("gate", "delta_prime", "hz"),
    "heating_rate": ("gate", "heating_rate", "1/s"),
    "delta_prime_rms": ("noise", "delta_prime_rms", "hz"),
    "mode_freq_rms": ("noise", "mode_freq_rms", "hz"),
}


def _convert(path: str, value, kind):
    if kind == "hz":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected a number (Hz)")
        return TWO_PI * float(value)
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{path}: expected true/false")
        return value
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}: expected an integer")
        return value
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}: expected a number")
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(f"{path}: expected a string")
    return value


def _map_section(name: str, table: dict, schema: dict, nested=()) -> dict:
    if not isinstance(table, dict):
        raise ConfigError(f"{name}: expected a table")
    out = {}
    for key, value in table.items():
        path = f"{name}.{key}"
        if key in nested:
            continue
        if key not in schema:
            raise ConfigError(f"unknown key {path}")
        target, kind = schema[key]
        out[target] = _convert(path, value, kind)
    return out


def _check_keys(name: str, table: dict, allowed) -> dict:
    if not isinstance(table, dict):
        raise ConfigError(f"{name}: expected a table")
    for key in table:
        if key not in allowed:
            raise ConfigError(f"unknown key {name}.{key}")
    return table


@dataclass
class RunConfig:
    gate: GateConfig = field(default_factory=GateConfig)
    ramsey: RamseyConfig = field(default_factory=RamseyConfig)
    jitter: JitterModel = field(default_factory=JitterModel)
    solver: EvolveOptions = field(default_factory=EvolveOptions)
    sweep: dict = field(default_factory=dict)
    drive: Optional[DriveFrequencies] = None
    table: Optional[str] = None
    figure: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)
    digest_source: bytes = b""
    base_dir: Path = field(default_factory=Path.cwd)

    def resolve(self, relative: str) -> Path:
        p = Path(relative)
        return p if p.is_absolute() else self.base_dir / p

    def sweep_values(self, internal: bool = True) -> list:
        """Sweep axis values, in internal units or as written in the file."""
        s = self.sweep
        if "axis" not in s:
            raise ConfigError("sweep.axis is required")
        if s["axis"] not in SWEEP_AXES:
            raise ConfigError(f"sweep.axis: unknown axis {s['axis']!r}; choose from {sorted(SWEEP_AXES)}")
        if "values" in s:
            vals = [float(v) for v in s["values"]]
        elif {"start", "stop", "points"} <= set(s):
            if int(s["points"]) < 1:
                raise ConfigError("sweep.points must be >= 1")
            vals = np.linspace(float(s["start"]), float(s["stop"]), int(s["points"])).tolist()
        else:
            raise ConfigError("sweep needs values or start/stop/points")
        if not vals:
            raise ConfigError("sweep.values is empty")
        scale = TWO_PI if internal and SWEEP_AXES[s["axis"]][2] == "hz" else 1.0
        return [scale * v for v in vals]


def parse_config(text: str, base_dir=None) -> RunConfig:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML: {exc}") from exc
    for key in raw:
        if key not in _SECTIONS:
            raise ConfigError(f"unknown key {key}")
    cfg = RunConfig(raw=raw, digest_source=text.encode("utf-8"))
    if base_dir is not None:
        cfg.base_dir = Path(base_dir)

    gate_raw = raw.get("gate", {})
    gate_kw = _map_section("gate", gate_raw, _GATE_KEYS, nested=("envelope",))
    if "envelope" in gate_raw:
        env_kw = _map_section("gate.envelope", gate_raw["envelope"], _ENVELOPE_KEYS)
        gate_kw["envelope"] = Envelope(**env_kw)
    cfg.gate = GateConfig(**gate_kw)

    cfg.ramsey = RamseyConfig(**_map_section("ramsey", raw.get("ramsey", {}), _RAMSEY_KEYS))
    cfg.jitter = JitterModel(**_map_section("noise", raw.get("noise", {}), _NOISE_KEYS))
    cfg.solver = EvolveOptions(**_map_section("solver", raw.get("solver", {}), _SOLVER_KEYS))
    cfg.sweep = dict(_check_keys("sweep", raw.get("sweep", {}), _SWEEP_KEYS))
    cfg.figure = dict(_check_keys("figure", raw.get("figure", {}), _FIGURE_KEYS))

    if "drive" in raw:
        d = dict(raw["drive"])
        table = d.pop("table", None)
        if table is not None and not isinstance(table, str):
            raise ConfigError("drive.table: expected a path string")
        cfg.table = table
        kw = _map_section("drive", d, _DRIVE_KEYS)
        if kw:
            missing = [k for k, (t, _) in _DRIVE_KEYS.items() if t not in kw]
            if missing:
                raise ConfigError(f"drive: missing keys {', '.join('drive.' + m for m in missing)}")
            try:
                cfg.drive = DriveFrequencies(**kw)
            except ValueError as exc:
                raise ConfigError(f"drive: {exc}") from exc
    return cfg


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, base_dir=path.parent)


def bundled_config(name: str) -> Path:
    from importlib import resources

    return Path(str(resources.files("ddmsgate") / "configs" / f"{name}.toml"))
