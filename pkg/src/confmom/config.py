"""Run configuration loaded from JSON; command-line flags override it."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields


@dataclass
class RunConfig:
    M: float = 1.0
    units: str = "MeV"
    grid_points: int = 2049
    grid_half_width: float = 10.0  # in units of 1/M
    t5: float = 0.0
    tolerances: dict = field(default_factory=dict)
    g: float = 1.0
    eta: float | None = None
    m: float = 0.0
    f_pi: float = 93.0
    f: float = 1.0
    m_pi: float = 138.0
    format: str = "json"
    seed: int = 0

    def __post_init__(self):
        if self.format not in ("csv", "json"):
            raise ValueError(f"format must be csv or json, not {self.format!r}")
        if not self.M > 0:
            raise ValueError("M must be positive")

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        data = json.loads(text)
        if not isinstance(data, dict):
            raise ValueError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path: str | None) -> "RunConfig":
        if path is None:
            return cls()
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())

    def override(self, **kwargs) -> "RunConfig":
        """Copy with every non-None keyword applied."""
        data = asdict(self)
        data.update({k: v for k, v in kwargs.items() if v is not None and k in data})
        return RunConfig(**data)
