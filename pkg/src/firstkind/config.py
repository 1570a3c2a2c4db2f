"""Run configuration: one JSON document, unknown keys rejected."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path

from .errors import FirstKindError


class ConfigError(FirstKindError):
    """Malformed or out-of-range run configuration."""


@dataclass(frozen=True)
class Constants:
    hbar: float = 1.0
    m: float = 1.0

    def validate(self):
        _positive(self, "hbar", "m")


@dataclass(frozen=True)
class PacketConfig:
    a: float = 1.0
    p0: float = 1.0

    def validate(self):
        _positive(self, "a")
        _finite(self, "p0")


@dataclass(frozen=True)
class SurvivalConfig:
    kind: str = "exponential"
    tau: float = 0.1
    s: float = 1.0
    tau0: float | None = None

    def validate(self):
        if self.kind not in ("exponential", "gamma"):
            raise ConfigError(f"survival.kind must be 'exponential' or 'gamma', got {self.kind!r}")
        _finite(self, "tau", "s")
        if self.tau < 0:
            raise ConfigError("survival.tau must be non-negative")
        if self.s < 1:
            raise ConfigError("survival.s must be >= 1")
        if self.kind == "exponential" and self.s != 1:
            raise ConfigError("exponential survival requires s = 1")
        if self.tau0 is not None:
            _positive(self, "tau0")


@dataclass(frozen=True)
class GridConfig:
    """Momentum cells of width ``eps`` (in units of ``b = hbar / a``).

    The grid covers ``p0 +- coverage * b``, or ``N`` cells either side of
    the cell containing ``p0`` when ``N`` is given.
    """

    eps: float = 0.1
    N: int | None = None
    coverage: float = 8.0

    def validate(self):
        _positive(self, "eps", "coverage")
        if self.N is not None and (not isinstance(self.N, int) or self.N < 1):
            raise ConfigError("grid.N must be a positive integer")


@dataclass(frozen=True)
class OutputConfig:
    format: str = "csv"
    path: str | None = None
    precision: int = 15

    def validate(self):
        if self.format not in ("csv", "json"):
            raise ConfigError(f"output.format must be 'csv' or 'json', got {self.format!r}")
        if not isinstance(self.precision, int) or not 1 <= self.precision <= 17:
            raise ConfigError("output.precision must be an integer in 1..17")


@dataclass(frozen=True)
class RunConfig:
    constants: Constants = field(default_factory=Constants)
    packet: PacketConfig = field(default_factory=PacketConfig)
    survival: SurvivalConfig = field(default_factory=SurvivalConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def validate(self) -> "RunConfig":
        for f in fields(self):
            getattr(self, f.name).validate()
        return self

    def replace_output(self, **kw) -> "RunConfig":
        out = {f.name: getattr(self.output, f.name) for f in fields(self.output)}
        out.update({k: v for k, v in kw.items() if v is not None})
        return RunConfig(self.constants, self.packet, self.survival, self.grid,
                         OutputConfig(**out)).validate()

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a JSON object")
        sections = {f.name: f for f in fields(cls)}
        unknown = set(data) - set(sections)
        if unknown:
            raise ConfigError(f"unknown configuration sections: {sorted(unknown)}")
        parts = {}
        for name, f in sections.items():
            sub = data.get(name, {})
            kind = f.default_factory().__class__
            if not isinstance(sub, dict):
                raise ConfigError(f"section {name!r} must be an object")
            allowed = {g.name for g in fields(kind)}
            extra = set(sub) - allowed
            if extra:
                raise ConfigError(f"unknown keys in {name!r}: {sorted(extra)}")
            try:
                parts[name] = kind(**sub)
            except TypeError as exc:
                raise ConfigError(f"bad section {name!r}: {exc}") from exc
        return cls(**parts).validate()

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read configuration {path}: {exc}") from exc
        return cls.from_dict(data)


def _positive(obj, *names):
    for name in names:
        v = getattr(obj, name)
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not (v > 0 and math.isfinite(v)):
            raise ConfigError(f"{type(obj).__name__}.{name} must be a positive number, got {v!r}")


def _finite(obj, *names):
    for name in names:
        v = getattr(obj, name)
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
            raise ConfigError(f"{type(obj).__name__}.{name} must be a finite number, got {v!r}")
