"""Run configuration: a JSON file of documented keys, overridden by CLI flags.

Keys (all optional)::

    rate        float   decay rate r in nats per sample (default 0.1)
    model       list    data-generating distribution for exact analyses
    tmin, tmax, tstep   sample sizes analysed (default 1, 100, 1)
    kinds       list    predictor kinds, "name" or "name:rate"
    grid        int     simplex grid resolution (default 200)
    beta        float   significance level for the sample-complexity display
    out         str     output directory (default "out")
    seed        int     seed for property sampling (default 0)
    force       bool    lift the enumeration budget
    event       str     halfspace event "a1,...,ad>=b" for ``sanov``
    directions  int     rays per ball boundary for ``figure2`` (default 360)
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path

from .errors import InputError
from .predictors import PredictorKind

DEFAULT_KINDS = ("sample_average", "dro")


@dataclass
class RunConfig:
    rate: float = 0.1
    model: list[float] | None = None
    tmin: int = 1
    tmax: int = 100
    tstep: int = 1
    kinds: list[str] = field(default_factory=lambda: list(DEFAULT_KINDS))
    grid: int = 200
    beta: float | None = None
    out: str = "out"
    seed: int = 0
    force: bool = False
    event: str | None = None
    directions: int = 360

    def validate(self) -> "RunConfig":
        if not self.rate >= 0:
            raise InputError(f"rate must be nonnegative, got {self.rate!r}")
        if self.tmin < 1 or self.tmax < self.tmin or self.tstep < 1:
            raise InputError(f"invalid T range {self.tmin}..{self.tmax} step {self.tstep}")
        if self.grid < 1:
            raise InputError(f"grid resolution must be positive, got {self.grid}")
        if self.beta is not None and not 0 < self.beta < 1:
            raise InputError(f"beta must lie in (0, 1), got {self.beta!r}")
        if self.directions < 1:
            raise InputError("directions must be positive")
        self.predictor_kinds()
        return self

    @property
    def Ts(self) -> range:
        return range(self.tmin, self.tmax + 1, self.tstep)

    def predictor_kinds(self) -> list[PredictorKind]:
        if not self.kinds:
            raise InputError("no predictor kinds requested")
        return [PredictorKind.parse(k, self.rate) for k in self.kinds]

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def load_config(path: str | Path | None, overrides: dict) -> RunConfig:
    values = {}
    if path is not None:
        try:
            values = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config {path}: {exc}") from None
        known = {f.name for f in fields(RunConfig)}
        unknown = set(values) - known
        if unknown:
            raise InputError(f"unknown config keys: {', '.join(sorted(unknown))}")
    values.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig(**values).validate()
