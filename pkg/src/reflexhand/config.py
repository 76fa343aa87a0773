"""Session configuration: one JSON document covering every module's knobs."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .control import ControlGains
from .emg import EmgSourceSpec
from .plant import PlantParams, SceneSpec
from .tactile import PressureSensorModel

TICK_RATE_HZ = 1000

CONDITIONS = ("standard", "tactile")


class ConfigError(ValueError):
    """Session configuration failed to parse or validate."""


def _apply_overrides(instance, overrides: dict, where: str):
    """Replace dataclass fields from a dict, coercing lists to tuples."""
    if not overrides:
        return instance
    names = {f.name for f in dataclasses.fields(instance)}
    unknown = set(overrides) - names
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    coerced = {
        k: tuple(v) if isinstance(v, list) else v for k, v in overrides.items()
    }
    try:
        return dataclasses.replace(instance, **coerced)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


@dataclass
class SessionConfig:
    """Everything a session needs beyond the scenario itself."""

    condition: str = "tactile"
    tick_rate_hz: int = TICK_RATE_HZ
    stream_decimation: int = 20
    sensor_noise_sigma: float = 0.005
    calibration_file: Optional[str] = None
    gains: ControlGains = field(default_factory=ControlGains)
    pressure_model: PressureSensorModel = field(default_factory=PressureSensorModel)
    scene: SceneSpec = field(default_factory=SceneSpec)
    plant: PlantParams = field(default_factory=PlantParams)
    emg: EmgSourceSpec = field(default_factory=EmgSourceSpec)

    def __post_init__(self) -> None:
        if self.condition not in CONDITIONS:
            raise ConfigError(f"condition must be one of {CONDITIONS}, got {self.condition!r}")
        if self.tick_rate_hz != TICK_RATE_HZ:
            raise ConfigError(f"tick rate is fixed at {TICK_RATE_HZ} Hz")
        if self.stream_decimation < 1:
            raise ConfigError("stream_decimation must be >= 1")

    @property
    def reflexes_enabled(self) -> bool:
        return self.condition == "tactile"

    @property
    def feedback_enabled(self) -> bool:
        return self.condition == "tactile"

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "tick_rate_hz": self.tick_rate_hz,
            "stream_decimation": self.stream_decimation,
            "sensor_noise_sigma": self.sensor_noise_sigma,
            "calibration_file": self.calibration_file,
            "gains": dataclasses.asdict(self.gains),
            "pressure_model": dataclasses.asdict(self.pressure_model),
            "scene": dataclasses.asdict(self.scene),
            "plant": dataclasses.asdict(self.plant),
            "emg": dataclasses.asdict(self.emg),
        }

    def save(self, path: str | Path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")


_SECTION_DEFAULTS = {
    "gains": ControlGains,
    "pressure_model": PressureSensorModel,
    "scene": SceneSpec,
    "plant": PlantParams,
    "emg": EmgSourceSpec,
}
_SCALAR_KEYS = {
    "condition", "tick_rate_hz", "stream_decimation", "sensor_noise_sigma",
    "calibration_file",
}


def config_from_dict(data: dict, where: str = "config") -> SessionConfig:
    if not isinstance(data, dict):
        raise ConfigError(f"{where}: top level must be an object")
    unknown = set(data) - _SCALAR_KEYS - set(_SECTION_DEFAULTS)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")
    sections = {}
    for name, cls in _SECTION_DEFAULTS.items():
        sections[name] = _apply_overrides(cls(), data.get(name, {}), f"{where}.{name}")
    scalars = {k: data[k] for k in _SCALAR_KEYS if k in data}
    try:
        return SessionConfig(**scalars, **sections)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{where}: {exc}") from exc


def load_config(path: str | Path) -> SessionConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}:{exc.lineno}:{exc.colno}: invalid JSON ({exc.msg})"
        ) from exc
    return config_from_dict(data, where=str(path))
