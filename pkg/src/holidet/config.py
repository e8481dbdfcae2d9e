"""Pipeline configuration: defaults, a flat ``key = value`` file format and CLI overrides."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, fields
from pathlib import Path

from .autoperiod import AutoPeriodConfig
from .changepoint import COSTS, DEFAULT_GRID_SIZE, DEFAULT_THRESHOLD, StopRule
from .errors import ConfigError
from .occupancy import DEFAULT_RATIO, ClassifierSpec
from .spikes import DEFAULT_MAX_ERROR, DEFAULT_MAX_ITERATIONS, DEFAULT_MIN_ENERGY_RATIO, ExtractionConfig


@dataclass(frozen=True)
class PipelineConfig:
    grid_size: int = DEFAULT_GRID_SIZE
    cost: str = "gaussian"
    threshold: float = DEFAULT_THRESHOLD
    classifier: str = "F_var"
    ratio: float = DEFAULT_RATIO
    min_holiday_days: float = 3.0
    n_permutations: int = 100
    seed: int = 0
    max_error: int = DEFAULT_MAX_ERROR
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    min_energy_ratio: float = DEFAULT_MIN_ENERGY_RATIO
    gap_fill_limit: int = 4
    min_coverage: float = 0.9

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if f.type in ("int", int) and not (isinstance(v, int) and not isinstance(v, bool)):
                raise ConfigError(f"{f.name} must be an integer, got {v!r}")
            if f.type in ("float", float):
                if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                    raise ConfigError(f"{f.name} must be a finite number, got {v!r}")
                object.__setattr__(self, f.name, float(v))
        if self.grid_size < 2:
            raise ConfigError("grid_size must be >= 2")
        if self.cost not in COSTS:
            raise ConfigError(f"unknown cost {self.cost!r}; choose from {sorted(COSTS)}")
        if self.threshold < 0:
            raise ConfigError("threshold must be >= 0")
        self.classifier_spec  # validates name and ratio
        if self.min_holiday_days < 0:
            raise ConfigError("min_holiday_days must be >= 0")
        if self.n_permutations < 2:
            raise ConfigError("n_permutations must be >= 2")
        if self.max_error < 0:
            raise ConfigError("max_error must be >= 0")
        if self.max_iterations < 1:
            raise ConfigError("max_iterations must be >= 1")
        if not 0 <= self.min_energy_ratio < 1:
            raise ConfigError("min_energy_ratio must lie in [0, 1)")
        if self.gap_fill_limit < 0:
            raise ConfigError("gap_fill_limit must be >= 0")
        if not 0 < self.min_coverage <= 1:
            raise ConfigError("min_coverage must lie in (0, 1]")

    # derived views used by the modules
    @property
    def classifier_spec(self) -> ClassifierSpec:
        return ClassifierSpec.from_name(self.classifier, self.ratio)

    @property
    def stop_rule(self) -> StopRule:
        return StopRule.max_cost(self.threshold)

    @property
    def extraction(self) -> ExtractionConfig:
        return ExtractionConfig(
            autoperiod=AutoPeriodConfig(n_permutations=self.n_permutations, seed=self.seed),
            max_error=self.max_error, max_iterations=self.max_iterations,
            min_energy_ratio=self.min_energy_ratio)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
        return cls(**data)

    def replace(self, **changes) -> "PipelineConfig":
        return self.from_dict({**self.to_dict(), **changes})

    def to_text(self) -> str:
        return "".join(f"{k} = {v}\n" for k, v in self.to_dict().items())


def _field_types() -> dict[str, type]:
    names = {"int": int, "float": float, "str": str}
    return {f.name: names.get(f.type, f.type) for f in fields(PipelineConfig)}


FIELD_TYPES = _field_types()


def parse_value(key: str, raw: str):
    """Convert the text of a config value to the field's type."""
    try:
        kind = FIELD_TYPES[key]
    except KeyError:
        raise ConfigError(f"unknown config key {key!r}") from None
    raw = raw.strip()
    if kind is str:
        if len(raw) >= 2 and raw[0] == raw[-1] and raw[0] in "'\"":
            raw = raw[1:-1]
        return raw
    try:
        return kind(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected {kind.__name__}, got {raw!r}") from None


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment; blank lines are skipped."""
    out = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{n}: expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key in out:
            raise ConfigError(f"{source}:{n}: duplicate key {key!r}")
        out[key] = parse_value(key, value)
    return out


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> PipelineConfig:
    """Defaults, then the config file (if any), then ``overrides`` (CLI flags)."""
    values: dict = {}
    if path is not None:
        p = Path(path)
        try:
            text = p.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config file {p}: {exc.strerror}") from None
        values.update(parse_config_text(text, str(p)))
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return PipelineConfig.from_dict(values)
