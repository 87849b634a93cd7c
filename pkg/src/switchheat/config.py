"""Run configuration: a flat JSON document with a fixed key set."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields, replace

from .params import Params
from .switching import ConfigurationError

EXAMPLES = ("dd", "dn", "ode1d")


@dataclass(frozen=True)
class RunConfig:
    example: str = "dd"
    r0: float = 1.0
    r1: float = 1.0
    D: float = 1.0
    L: float = 1.0
    b: float = 1.0
    K: int = 64
    N: int = 10_000
    seed: int = 0
    G: int = 256
    tol: float = 1e-10
    output: str = "-"

    def __post_init__(self):
        if self.example not in EXAMPLES:
            raise ConfigurationError(f"example must be one of {EXAMPLES}, got {self.example!r}")
        for name in ("K", "N", "G"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{name} must be at least 1")
        if not (self.tol > 0 and math.isfinite(self.tol)):
            raise ConfigurationError("tol must be positive")
        self.params  # validates the physical parameters

    @property
    def params(self) -> Params:
        return Params(self.r0, self.r1, self.D, self.L, self.b)

    @classmethod
    def keys(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))

    @classmethod
    def coerce(cls, key: str, value):
        types = {f.name: f.type for f in fields(cls)}
        if key not in types:
            raise ConfigurationError(f"unknown config key {key!r}")
        kind = types[key]
        try:
            if kind == "int":
                if isinstance(value, float) and not value.is_integer():
                    raise ValueError(value)
                return int(value)
            if kind == "float":
                return float(value)
            return str(value)
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(f"bad value for {key}: {value!r}") from exc

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        unknown = set(data) - set(cls.keys())
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        return cls(**{k: cls.coerce(k, v) for k, v in data.items()})

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigurationError("config must be a JSON object")
        return cls.from_dict(data)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)

    def override(self, **changes) -> "RunConfig":
        return replace(self, **{k: self.coerce(k, v) for k, v in changes.items() if v is not None})
