"""Experiment configuration and its flat ``key = value`` file format."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields
from pathlib import Path

from ..protocols import QUANTIZERS

SCENARIOS = (
    "undirected-static",
    "undirected-dynamic",
    "directed-static",
    "directed-dynamic",
    "quantized-static",
    "quantized-dynamic",
    "quantized-halfgrid",
    "quantization-sweep",
)
WEIGHT_RULES = ("metropolis", "modified-metropolis")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str = "undirected-static"
    n: int = 10
    T: int | None = None
    seed: int = 0
    repetitions: int = 20
    # beliefs: means ~ U[belief_low, belief_high], samples ~ N(mean, sample_variance)
    belief_low: float = 0.0
    belief_high: float = 100.0
    sample_variance: float = 10.0
    truncation_sigmas: float = 5.0
    constant_beliefs: bool = False
    # graphs
    radius: float | None = None
    p: float = 1.0
    delete_prob: float = 0.3
    # weights
    weights: str | None = None
    C: str = "2"
    # quantization
    quantizer: str = "truncation"
    delta: float = 0.1
    gamma: float = 1e-3
    deltas: tuple[float, ...] = ()
    # analysis
    fit_lo: int | None = None
    fit_hi: int | None = None
    threshold: float = 0.5
    steady_window: int = 200
    workers: int = 1

    @property
    def quantized(self) -> bool:
        return self.scenario.startswith("quantiz")

    @property
    def directed(self) -> bool:
        return self.scenario.startswith("directed")

    @property
    def dynamic(self) -> bool:
        if self.scenario.endswith("-dynamic"):
            return True
        return self.scenario in ("quantized-halfgrid", "quantization-sweep") and self.p < 1

    @property
    def horizon(self) -> int:
        if self.T is not None:
            return self.T
        return 2000 if self.quantized else 10_000

    @property
    def weight_rule(self) -> str:
        if self.weights is not None:
            return self.weights
        return "modified-metropolis" if self.quantized else "metropolis"

    def validate(self) -> "ExperimentConfig":
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; expected one of {SCENARIOS}")
        if self.n < 2:
            raise ConfigError("n must be >= 2")
        if self.horizon < 1:
            raise ConfigError("T must be >= 1")
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")
        if not 0 < self.p <= 1:
            raise ConfigError("p must lie in (0, 1]")
        if self.scenario.endswith("-dynamic") and self.p == 1:
            raise ConfigError(f"{self.scenario} needs an activation probability p < 1")
        if not 0 <= self.delete_prob < 1:
            raise ConfigError("delete_prob must lie in [0, 1)")
        if self.radius is not None and self.radius <= 0:
            raise ConfigError("radius must be positive")
        if self.weight_rule not in WEIGHT_RULES:
            raise ConfigError(f"unknown weight rule {self.weight_rule!r}")
        if self.quantized:
            if self.weight_rule != "modified-metropolis":
                raise ConfigError("quantized scenarios need modified-metropolis weights")
            if self.quantizer not in QUANTIZERS:
                raise ConfigError(f"unknown quantizer {self.quantizer!r}")
            if self.delta < 0 or any(d < 0 for d in self.deltas):
                raise ConfigError("precision delta must be nonnegative")
            if self.scenario == "quantized-halfgrid" and self.delta == 0:
                raise ConfigError("half-grid study needs delta > 0")
            if self.scenario == "quantization-sweep" and not self.deltas:
                raise ConfigError("quantization-sweep needs a nonempty 'deltas' list")
            if self.gamma <= 0:
                raise ConfigError("gamma must be positive")
        if self.sample_variance < 0 or self.belief_high < self.belief_low:
            raise ConfigError("bad belief parameters")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        return self

    def replace(self, **kw) -> "ExperimentConfig":
        return dataclasses.replace(self, **kw)

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                continue
            if isinstance(v, tuple):
                v = ", ".join(repr(x) for x in v)
            elif isinstance(v, bool):
                v = "true" if v else "false"
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"


def _coerce(name: str, raw: str, annotation: str):
    raw = raw.strip()
    try:
        if name == "deltas":
            return tuple(float(tok) for tok in raw.replace(",", " ").split())
        if raw.lower() in ("none", "") and "None" in annotation:
            return None
        if annotation.startswith("bool"):
            if raw.lower() in ("true", "yes", "1"):
                return True
            if raw.lower() in ("false", "no", "0"):
                return False
            raise ValueError(raw)
        if annotation.startswith("int"):
            return int(float(raw)) if "e" in raw.lower() else int(raw)
        if annotation.startswith("float"):
            return float(raw)
    except ValueError:
        raise ConfigError(f"bad value for {name}: {raw!r}") from None
    return raw


def parse_config(text: str) -> ExperimentConfig:
    known = {f.name: str(f.type) for f in fields(ExperimentConfig)}
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = _coerce(key, raw, known[key])
    return ExperimentConfig(**values).validate()


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)
