"""Run configuration: ``key = value`` text with ``[section]`` headers.

Sections: ``[run]`` (command, units, preset), ``[model]`` (ModelParams
fields; ``G1`` may be given instead of ``g1``), ``[grid]``, ``[scan]``,
``[schedule]`` and ``[pulse]``.  A config may name a ``preset`` whose
values it overrides key by key.
"""
from __future__ import annotations

import configparser
import dataclasses
import math
import warnings
from dataclasses import dataclass, field

from .errors import ConfigError
from .model import ModelParams
from .presets import get_preset

__all__ = ["RunConfig", "load_config", "loads_config", "config_from_dict"]

_MODEL_FIELDS = {f.name for f in dataclasses.fields(ModelParams)}
_SECTIONS = {
    "run": {"command", "units", "preset", "branch"},
    "model": _MODEL_FIELDS | {"G1"},
    "grid": {"n_modes", "k_min", "k_max"},
    "scan": {"variable", "k", "min", "max", "n_points"},
    "schedule": {"control", "start_value", "hold_value", "end_value",
                 "t_ramp_down", "t_hold", "t_ramp_up", "shape"},
    "pulse": {"center_k", "width_k", "branch", "sample_dt"},
}
_STRINGS = {("run", "command"), ("run", "units"), ("run", "preset"),
            ("scan", "variable"), ("schedule", "control"), ("schedule", "shape")}
_INTS = {("grid", "n_modes"), ("scan", "n_points"), ("pulse", "branch"), ("run", "branch")}


@dataclass
class RunConfig:
    """Fully resolved configuration of one CLI run."""

    command: str
    units: str
    params: ModelParams
    sections: dict = field(default_factory=dict)

    def section(self, name: str) -> dict:
        return self.sections.get(name, {})

    def to_dict(self) -> dict:
        model = dataclasses.asdict(self.params)
        out = {"run": {"command": self.command, "units": self.units}}
        out["run"].update({k: v for k, v in self.section("run").items()
                           if k not in ("command", "units", "preset")})
        out["model"] = model
        for name in ("grid", "scan", "schedule", "pulse"):
            if self.section(name):
                out[name] = dict(self.section(name))
        return out

    def dumps(self) -> str:
        """Effective configuration as text; floats use repr so reloading is exact."""
        lines = []
        for name, values in self.to_dict().items():
            lines.append(f"[{name}]")
            for key, value in values.items():
                lines.append(f"{key} = {_format(value)}")
            lines.append("")
        return "\n".join(lines)


def _format(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _convert(section: str, key: str, raw):
    if (section, key) in _STRINGS:
        return str(raw).strip()
    try:
        if (section, key) in _INTS:
            value = float(raw)
            if value != int(value):
                raise ValueError
            return int(value)
        return float(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"[{section}] {key}: expected a number, got {raw!r}") from None


def _merge(base: dict, override: dict) -> dict:
    out = {name: dict(values) for name, values in base.items()}
    for name, values in override.items():
        out.setdefault(name, {}).update(values)
    return out


def config_from_dict(raw: dict, command: str | None = None, preset: str | None = None) -> RunConfig:
    """Resolve a nested dict (optionally layered on a preset) into a :class:`RunConfig`."""
    preset = preset or raw.get("run", {}).get("preset")
    if preset:
        try:
            base = get_preset(preset)
        except KeyError as exc:
            raise ConfigError(str(exc.args[0])) from None
        model_override = raw.get("model", {})
        if "g1" in model_override and "G1" not in model_override:
            base.get("model", {}).pop("G1", None)
        if "G1" in model_override and "g1" not in model_override:
            base.get("model", {}).pop("g1", None)
        raw = _merge(base, raw)

    sections: dict[str, dict] = {}
    for name, values in raw.items():
        if name not in _SECTIONS:
            raise ConfigError(f"unknown section [{name}]")
        for key, value in values.items():
            if key not in _SECTIONS[name]:
                raise ConfigError(f"[{name}] {key}: unknown key")
            sections.setdefault(name, {})[key] = _convert(name, key, value)

    run = sections.get("run", {})
    cfg_command = run.get("command", command)
    if command is not None and cfg_command != command:
        raise ConfigError(f"[run] command: config is for {cfg_command!r}, not {command!r}")
    if cfg_command is None:
        raise ConfigError("[run] command: missing")
    units = run.get("units", "natural")
    if units not in ("natural", "SI"):
        raise ConfigError(f"[run] units: must be 'natural' or 'SI', got {units!r}")

    model = dict(sections.get("model", {}))
    G1 = model.pop("G1", None)
    try:
        params = ModelParams(**model)
        if G1 is not None:
            if "g1" in model and not math.isclose(params.G1, G1, rel_tol=1e-12):
                raise ConfigError("[model] G1: conflicts with g1 * sqrt(n_atoms)")
            params = params.with_G1(G1)
    except ValueError as exc:
        raise ConfigError(f"[model] {exc}") from None
    if units == "natural" and (abs(params.J) > 1e4 or params.ell < 1e-3):
        warnings.warn("SI-scale parameter values under the 'natural' unit tag", UserWarning, stacklevel=2)
    sections.pop("model", None)
    return RunConfig(command=cfg_command, units=units, params=params, sections=sections)


def loads_config(text: str, command: str | None = None, preset: str | None = None) -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config syntax error: {exc}") from None
    raw = {name: dict(parser.items(name)) for name in parser.sections()}
    return config_from_dict(raw, command=command, preset=preset)


def load_config(path, command: str | None = None, preset: str | None = None) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return loads_config(text, command=command, preset=preset)


def preset_config(name: str, command: str | None = None) -> RunConfig:
    return config_from_dict({}, command=command, preset=name)


