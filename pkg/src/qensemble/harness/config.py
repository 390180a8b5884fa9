from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path

from ..encoding import KINDS
from ..errors import ConfigError

_LISTS = {"datasets", "normalizations", "kinds", "d_values"}
_ALIASES = {"dataset": "datasets", "normalization": "normalizations", "kind": "kinds", "d": "d_values"}


@dataclass
class ExperimentConfig:
    datasets: list[str] = field(default_factory=list)
    normalizations: list[str] = field(default_factory=lambda: ["std"])
    kinds: list[str] = field(default_factory=lambda: ["distance"])
    d_values: list[int] = field(default_factory=lambda: [3])
    mode: str = "exact"
    shots: int = 8192
    runs: int = 10
    split: float = 0.8
    seed: int = 0
    output: str = "results.csv"
    format: str = "csv"
    weights_on: str = "train"

    def validate(self) -> "ExperimentConfig":
        if not self.datasets:
            raise ConfigError("no dataset given")
        if not 0.0 < self.split < 1.0:
            raise ConfigError(f"split must lie in (0, 1), got {self.split}")
        if self.runs < 1:
            raise ConfigError("runs must be >= 1")
        if self.mode not in ("exact", "sampled"):
            raise ConfigError(f"mode must be exact or sampled, got {self.mode!r}")
        if self.shots < 1:
            raise ConfigError("shots must be >= 1")
        bad = [k for k in self.kinds if k not in KINDS]
        if bad or not self.kinds:
            raise ConfigError(f"unknown classifier kind(s) {bad}")
        bad = [k for k in self.normalizations if k not in ("none", "std", "minmax")]
        if bad or not self.normalizations:
            raise ConfigError(f"unknown normalisation(s) {bad}")
        if not self.d_values or any(d < 0 for d in self.d_values):
            raise ConfigError("d values must be non-negative")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")
        if self.weights_on not in ("train", "holdout"):
            raise ConfigError(f"weights_on must be train or holdout, got {self.weights_on!r}")
        return self

    @classmethod
    def from_mapping(cls, values: dict[str, str]) -> "ExperimentConfig":
        types = {f.name: f.type for f in fields(cls)}
        kwargs = {}
        for key, raw in values.items():
            name = _ALIASES.get(key, key)
            if name not in types:
                raise ConfigError(f"unknown config key {key!r}")
            try:
                if name in _LISTS:
                    items = [s.strip() for s in raw.split(",") if s.strip()]
                    kwargs[name] = [int(s) for s in items] if name == "d_values" else items
                elif name in ("shots", "runs", "seed"):
                    kwargs[name] = int(raw)
                elif name == "split":
                    kwargs[name] = float(raw)
                else:
                    kwargs[name] = raw.strip()
            except ValueError:
                raise ConfigError(f"bad value for {key}: {raw!r}") from None
        return cls(**kwargs).validate()

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        """Parse ``key = value`` lines; ``#`` starts a comment. Relative dataset paths resolve against the file."""
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        values = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            values[key] = value
        cfg = cls.from_mapping(values)
        cfg.datasets = [str((path.parent / d) if not Path(d).is_absolute() else Path(d)) for d in cfg.datasets]
        return cfg
