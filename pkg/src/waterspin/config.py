"""JSON run configuration. Every dimensional key carries its unit as a suffix."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from waterspin.dynamics import PulseSequence
from waterspin.ensemble import ThermalSpec
from waterspin.errors import ConfigError
from waterspin.interaction import DEFAULT_ODE_STEPS, PulseSpec
from waterspin.rotor import WATER, MolecularSpec, SpinIsomer

OBJECTIVES = ("ortho_energy_suppression", "alignment_contrast")
SPECIES = ("para", "ortho", "both")

_MOLECULE_KEYS = {
    "i_a_kg_m2": "I_a",
    "i_b_kg_m2": "I_b",
    "i_c_kg_m2": "I_c",
    "alpha_aa_a3": "alpha_aa",
    "alpha_bb_a3": "alpha_bb",
    "alpha_cc_a3": "alpha_cc",
}
_PULSE_KEYS = {"intensity_w_cm2": "peak_intensity", "sigma_fs": "sigma", "t0_ps": "t0"}
_GRID_KEYS = ("t_start_ps", "t_end_ps", "dt_ps")
_SCAN_KEYS = ("delay_min_ps", "delay_max_ps", "delay_step_ps", "objective")
_TOP_KEYS = {
    "temperature_k",
    "jmax",
    "convergence_tol",
    "converge",
    "molecule",
    "pulses",
    "grid",
    "species",
    "output_path",
    "kick_method",
    "ode_steps",
    "scan",
}


@dataclass(frozen=True)
class TimeGrid:
    t_start: float = 0.0
    t_end: float = 5.0
    dt: float = 0.005

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError("grid.dt_ps must be > 0")
        if not self.t_end > self.t_start:
            raise ConfigError("grid.t_end_ps must exceed grid.t_start_ps")

    @property
    def times(self) -> np.ndarray:
        n = int(math.floor((self.t_end - self.t_start) / self.dt + 1e-9)) + 1
        return np.round(self.t_start + self.dt * np.arange(n), 12)


@dataclass(frozen=True)
class RunConfig:
    molecule: MolecularSpec = WATER
    thermal: ThermalSpec = field(default_factory=lambda: ThermalSpec(20.0))
    pulses: PulseSequence = field(default_factory=lambda: PulseSequence((PulseSpec(),)))
    grid: TimeGrid = field(default_factory=TimeGrid)
    species: str = "both"
    output_path: str = "alignment.csv"
    converge: bool = False
    kick_method: str = "exact"
    ode_steps: int = DEFAULT_ODE_STEPS

    @property
    def isomers(self) -> tuple[SpinIsomer, ...]:
        if self.species == "both":
            return (SpinIsomer.PARA, SpinIsomer.ORTHO)
        return (SpinIsomer(self.species),)


@dataclass(frozen=True)
class ScanConfig:
    base: RunConfig
    delay_min: float
    delay_max: float
    delay_step: float
    objective: str = "ortho_energy_suppression"

    @property
    def delays(self) -> np.ndarray:
        n = int(math.floor((self.delay_max - self.delay_min) / self.delay_step + 1e-9)) + 1
        return np.round(self.delay_min + self.delay_step * np.arange(max(n, 1)), 12)


def _reject_unknown(section: dict, allowed, where: str):
    unknown = sorted(set(section) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")


def _number(section: dict, key: str, where: str, default=None):
    value = section.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}.{key} must be a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(f"{where}.{key} must be finite")
    return float(value)


def _section(doc: dict, key: str) -> dict:
    sec = doc.get(key, {})
    if not isinstance(sec, dict):
        raise ConfigError(f"{key} must be an object")
    return sec


def _parse_molecule(sec: dict) -> MolecularSpec:
    _reject_unknown(sec, _MOLECULE_KEYS, "molecule")
    kwargs = {}
    for key, attr in _MOLECULE_KEYS.items():
        kwargs[attr] = _number(sec, key, "molecule", getattr(WATER, attr))
    try:
        return MolecularSpec(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"molecule: {exc}") from None


def _parse_pulse(sec, i: int) -> PulseSpec:
    where = f"pulses[{i}]"
    if not isinstance(sec, dict):
        raise ConfigError(f"{where} must be an object")
    _reject_unknown(sec, _PULSE_KEYS, where)
    default = PulseSpec()
    kwargs = {attr: _number(sec, key, where, getattr(default, attr)) for key, attr in _PULSE_KEYS.items()}
    if kwargs["peak_intensity"] < 0:
        raise ConfigError(f"{where}.intensity_w_cm2 must be >= 0")
    if kwargs["sigma"] <= 0:
        raise ConfigError(f"{where}.sigma_fs must be > 0")
    return PulseSpec(**kwargs)


def config_from_dict(doc: dict) -> RunConfig | ScanConfig:
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a JSON object")
    _reject_unknown(doc, _TOP_KEYS, "config")

    molecule = _parse_molecule(_section(doc, "molecule"))

    jmax = doc.get("jmax", 12)
    if isinstance(jmax, bool) or not isinstance(jmax, int) or jmax < 0:
        raise ConfigError(f"config.jmax must be a non-negative integer, got {jmax!r}")
    temperature = _number(doc, "temperature_k", "config", 20.0)
    if temperature <= 0:
        raise ConfigError("config.temperature_k must be > 0")
    tol = _number(doc, "convergence_tol", "config", 1e-4)
    if tol < 0:
        raise ConfigError("config.convergence_tol must be >= 0")
    thermal = ThermalSpec(temperature, jmax, tol)

    grid_sec = _section(doc, "grid")
    _reject_unknown(grid_sec, _GRID_KEYS, "grid")
    default_grid = TimeGrid()
    grid = TimeGrid(
        _number(grid_sec, "t_start_ps", "grid", default_grid.t_start),
        _number(grid_sec, "t_end_ps", "grid", default_grid.t_end),
        _number(grid_sec, "dt_ps", "grid", default_grid.dt),
    )

    raw_pulses = doc.get("pulses", [{}])
    if not isinstance(raw_pulses, list):
        raise ConfigError("pulses must be a list")
    pulses = [_parse_pulse(p, i) for i, p in enumerate(raw_pulses)]
    for i, p in enumerate(pulses):
        if not grid.t_start <= p.t0 <= grid.t_end:
            raise ConfigError(f"pulses[{i}].t0_ps={p.t0} lies outside the time grid")
    try:
        sequence = PulseSequence(tuple(pulses))
    except ValueError as exc:
        raise ConfigError(f"pulses: {exc}") from None

    species = doc.get("species", "both")
    if species not in SPECIES:
        raise ConfigError(f"config.species must be one of {SPECIES}, got {species!r}")
    kick_method = doc.get("kick_method", "exact")
    if kick_method not in ("exact", "ode"):
        raise ConfigError(f"config.kick_method must be 'exact' or 'ode', got {kick_method!r}")
    ode_steps = doc.get("ode_steps", DEFAULT_ODE_STEPS)
    if isinstance(ode_steps, bool) or not isinstance(ode_steps, int) or ode_steps < 1:
        raise ConfigError("config.ode_steps must be a positive integer")
    converge = doc.get("converge", False)
    if not isinstance(converge, bool):
        raise ConfigError("config.converge must be true or false")
    output_path = doc.get("output_path", "alignment.csv")
    if not isinstance(output_path, str) or not output_path:
        raise ConfigError("config.output_path must be a non-empty string")

    run = RunConfig(
        molecule=molecule,
        thermal=thermal,
        pulses=sequence,
        grid=grid,
        species=species,
        output_path=output_path,
        converge=converge,
        kick_method=kick_method,
        ode_steps=ode_steps,
    )
    if "scan" not in doc:
        return run
    return _parse_scan(_section(doc, "scan"), run)


def _parse_scan(sec: dict, base: RunConfig) -> ScanConfig:
    _reject_unknown(sec, _SCAN_KEYS, "scan")
    if len(base.pulses) != 1:
        raise ConfigError("scan requires exactly one pulse in the base configuration")
    first = base.pulses.pulses[0]
    d_min = _number(sec, "delay_min_ps", "scan", 1.5)
    d_max = _number(sec, "delay_max_ps", "scan", 2.3)
    d_step = _number(sec, "delay_step_ps", "scan", 0.05)
    objective = sec.get("objective", "ortho_energy_suppression")
    if d_min <= 0:
        raise ConfigError("scan.delay_min_ps must be > 0")
    if d_step <= 0:
        raise ConfigError("scan.delay_step_ps must be > 0")
    if d_max < d_min:
        raise ConfigError("scan.delay_max_ps must be >= scan.delay_min_ps")
    if objective not in OBJECTIVES:
        raise ConfigError(f"scan.objective must be one of {OBJECTIVES}, got {objective!r}")
    if first.t0 + d_max > base.grid.t_end:
        raise ConfigError("scan.delay_max_ps places the second pulse beyond grid.t_end_ps")
    try:
        PulseSequence((first, PulseSpec(first.peak_intensity, first.sigma, first.t0 + d_min)))
    except ValueError as exc:
        raise ConfigError(f"scan.delay_min_ps: {exc}") from None
    return ScanConfig(base, d_min, d_max, d_step, objective)


def parse_config(text: str) -> RunConfig | ScanConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from None
    return config_from_dict(doc)


def load_config(path) -> RunConfig | ScanConfig:
    return parse_config(Path(path).read_text())
