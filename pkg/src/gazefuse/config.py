"""Run configuration: one JSON or TOML document covering every module."""

from __future__ import annotations

import dataclasses
import json
import sys
from dataclasses import dataclass, field

from .confidence import ConfidenceConfig
from .errors import ConfigError
from .events import EventConfig
from .simulator import SimConfig

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = ["CalibrationConfig", "MetricsConfig", "RunConfig", "load_config"]


@dataclass(frozen=True)
class CalibrationConfig:
    margin_ms: float = 30.0
    landing_fraction: float = 0.2
    fixation_span_ms: float = 450.0
    delay_coeffs: tuple = (21.4, 4.26, -2.35)

    def __post_init__(self):
        if self.margin_ms < 0:
            raise ConfigError("margin_ms must be nonnegative")
        if not 0 < self.landing_fraction < 1:
            raise ConfigError("landing_fraction must lie in (0, 1)")
        if len(self.delay_coeffs) != 3:
            raise ConfigError("delay_coeffs needs three values")
        object.__setattr__(self, "delay_coeffs", tuple(float(c) for c in self.delay_coeffs))


@dataclass(frozen=True)
class MetricsConfig:
    fixation_span_ms: float = 450.0

    def __post_init__(self):
        if not self.fixation_span_ms > 0:
            raise ConfigError("fixation_span_ms must be positive")


@dataclass(frozen=True)
class RunConfig:
    confidence: ConfidenceConfig = field(default_factory=ConfidenceConfig)
    events: EventConfig = field(default_factory=EventConfig)
    sim: SimConfig = field(default_factory=SimConfig)
    calibration: CalibrationConfig = field(default_factory=CalibrationConfig)
    metrics: MetricsConfig = field(default_factory=MetricsConfig)

    @classmethod
    def from_dict(cls, doc):
        if not isinstance(doc, dict):
            raise ConfigError("configuration must be a mapping")
        sections = {f.name: f.default_factory for f in dataclasses.fields(cls)}
        unknown = set(doc) - set(sections)
        if unknown:
            raise ConfigError(f"unknown configuration section(s): {', '.join(sorted(unknown))}")
        kwargs = {}
        for name, factory in sections.items():
            sub = doc.get(name, {})
            if not isinstance(sub, dict):
                raise ConfigError(f"section '{name}' must be a mapping")
            kind = type(factory())
            allowed = {f.name for f in dataclasses.fields(kind)}
            bad = set(sub) - allowed
            if bad:
                raise ConfigError(f"unknown key(s) in '{name}': {', '.join(sorted(bad))}")
            values = {k: tuple(v) if isinstance(v, list) else v for k, v in sub.items()}
            try:
                kwargs[name] = kind(**values)
            except TypeError as exc:
                raise ConfigError(f"section '{name}': {exc}") from None
        return cls(**kwargs)

    def to_dict(self):
        return dataclasses.asdict(self)


def load_config(path=None):
    if path is None:
        return RunConfig()
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        if str(path).endswith(".toml"):
            doc = tomllib.loads(raw.decode())
        else:
            doc = json.loads(raw)
    except (ValueError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return RunConfig.from_dict(doc)
