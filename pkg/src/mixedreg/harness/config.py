"""Experiment configuration, loadable from JSON."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

from ..errors import InvalidInputError

KINDS = ("sample_complexity", "phase_transition", "convergence", "lemma_suite", "hardness_demo")
INIT_METHODS = ("grid", "proportion", "random")
SUITES = ("cone", "matbound", "sandwich", "moment", "closed_form", "all")


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str = "phase_transition"
    k_values: tuple = (10,)
    n_values: Optional[tuple] = None  # absolute N grid, shared by every k
    ratios: Optional[tuple] = None  # N/k grid; used when n_values is None
    trials: int = 200
    target: float = 0.95
    t0: int = 50
    delta: Optional[float] = 0.3
    delta_c: Optional[float] = None  # rule c * ||b1 - b2|| * pmin^1.5 when delta is None
    resample: bool = False
    seed_base: int = 0
    init_method: str = "grid"
    p1: float = 0.5
    radius: float = 1.5
    inner_product: float = 1.73
    noise_sigma: float = 0.0
    workers: int = 1
    suite: str = "all"
    n_mc: int = 1_000_000
    values: tuple = field(default=(1, 2, 3))

    def __post_init__(self):
        for name in ("k_values", "n_values", "ratios", "values"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, tuple(v))
        if self.kind not in KINDS:
            raise InvalidInputError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.init_method not in INIT_METHODS:
            raise InvalidInputError(f"init_method must be one of {INIT_METHODS}")
        if self.suite not in SUITES:
            raise InvalidInputError(f"suite must be one of {SUITES}")
        if self.trials < 1:
            raise InvalidInputError("trials must be at least 1")
        if not 0.0 <= self.target <= 1.0:
            raise InvalidInputError("target must lie in [0, 1]")
        if self.t0 < 0:
            raise InvalidInputError("t0 must be nonnegative")
        if not self.k_values or any(int(k) != k or k < 2 for k in self.k_values):
            raise InvalidInputError("k_values must be integers >= 2")
        if self.n_values is not None:
            if any(int(n) != n or n < 1 for n in self.n_values):
                raise InvalidInputError("n_values must be positive integers")
            if list(self.n_values) != sorted(set(self.n_values)):
                raise InvalidInputError("n_values must be strictly increasing")
        if self.ratios is not None:
            if any(r <= 0 for r in self.ratios) or list(self.ratios) != sorted(set(self.ratios)):
                raise InvalidInputError("ratios must be positive and strictly increasing")
        if self.delta is None and self.delta_c is None:
            raise InvalidInputError("give delta or delta_c")
        if self.delta is not None and self.delta <= 0:
            raise InvalidInputError("delta must be positive")
        if not 0.0 <= self.p1 <= 1.0:
            raise InvalidInputError("p1 must lie in [0, 1]")
        if self.noise_sigma < 0:
            raise InvalidInputError("noise_sigma must be nonnegative")
        if self.workers < 1:
            raise InvalidInputError("workers must be at least 1")

    def n_grid(self, k: int) -> list[int]:
        """Sample sizes for dimension ``k``."""
        if self.n_values is not None:
            return [int(n) for n in self.n_values]
        if self.ratios is None:
            raise InvalidInputError("config needs n_values or ratios")
        grid = []
        for r in self.ratios:
            n = max(1, int(round(r * k)))
            if not grid or n > grid[-1]:
                grid.append(n)
        return grid

    def to_dict(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise InvalidInputError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise InvalidInputError(f"unknown config keys: {', '.join(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise InvalidInputError(f"bad config value: {exc}") from exc

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise InvalidInputError(f"config is not valid JSON: {exc}") from exc
        return cls.from_dict(data)

    def updated(self, **changes) -> "ExperimentConfig":
        return replace(self, **{k: v for k, v in changes.items() if v is not None})
