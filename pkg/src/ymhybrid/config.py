"""Run configuration: a flat ``key = value`` text format."""

import dataclasses
from dataclasses import dataclass, field, fields
from pathlib import Path


class ConfigError(ValueError):
    """Malformed configuration text or an invalid value."""


DOMAINS = ("square", "torus")
ALGEBRAS = ("su2", "u1")


@dataclass(frozen=True)
class RunConfig:
    domain: str = "torus"
    nx: int = 8
    ny: int = 8
    degree_r: int = 1
    degree_s: int = 3
    algebra: str = "su2"
    scenario: str = "su2_bump"
    amplitude: float = 1.0
    seed: int = 0
    dt: float = 0.01
    steps: int = 200
    output_every: int = 1
    output_dir: str = "output"
    kkt_delta: float = 1e-10
    weight_h: float = 1.0
    weight_d: float = 1.0
    per_element_csv: bool = True
    # fault-injection hook for the self test: flips one edge orientation sign
    inject_sign_fault: bool = field(default=False, metadata={"hidden": True})

    def validate(self) -> "RunConfig":
        def bad(key, why):
            raise ConfigError(f"invalid value for '{key}': {why}")

        if self.domain not in DOMAINS:
            bad("domain", f"expected one of {DOMAINS}, got {self.domain!r}")
        if self.algebra not in ALGEBRAS:
            bad("algebra", f"expected one of {ALGEBRAS}, got {self.algebra!r}")
        lo = 3 if self.domain == "torus" else 1
        for key in ("nx", "ny"):
            if getattr(self, key) < lo:
                bad(key, f"must be >= {lo} on the {self.domain}")
        if self.degree_r != 1:
            bad("degree_r", "only r = 1 is implemented")
        if not 1 <= self.degree_s <= 4:
            bad("degree_s", "must lie in 1..4")
        if not self.dt > 0:
            bad("dt", "must be positive")
        if self.steps < 0:
            bad("steps", "must be non-negative")
        if self.output_every < 1:
            bad("output_every", "must be >= 1")
        if not self.kkt_delta > 0:
            bad("kkt_delta", "must be positive")
        if self.weight_h < 0 or self.weight_d < 0 or self.weight_h + self.weight_d == 0:
            bad("weight_h", "weights must be non-negative and not both zero")
        if not self.amplitude == self.amplitude:
            bad("amplitude", "must be a number")
        from .dynamics import SCENARIOS
        if self.scenario not in SCENARIOS:
            bad("scenario", f"unknown scenario {self.scenario!r}; known: {sorted(SCENARIOS)}")
        return self

    @property
    def weights(self):
        return (self.weight_h, self.weight_d)

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes).validate()

    def dumps(self) -> str:
        lines = []
        for f in fields(self):
            if f.metadata.get("hidden"):
                continue
            v = getattr(self, f.name)
            if isinstance(v, bool):
                v = str(v).lower()
            elif isinstance(v, float):
                v = repr(v)
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _convert(name, typ, raw, lineno):
    try:
        if typ is bool:
            low = raw.lower()
            if low in _TRUE:
                return True
            if low in _FALSE:
                return False
            raise ValueError(raw)
        if typ is int:
            return int(raw)
        if typ is float:
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError(f"line {lineno}: cannot read {raw!r} as {typ.__name__} for '{name}'") from None


def parse_config(text: str) -> RunConfig:
    """Parse ``key = value`` lines; '#' starts a comment, unknown keys are rejected."""
    types = {f.name: f.type for f in fields(RunConfig)}
    types = {k: {"int": int, "float": float, "str": str, "bool": bool}.get(t, t) for k, t in types.items()}
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in types:
            raise ConfigError(f"line {lineno}: unknown key '{key}'")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key '{key}'")
        if not raw:
            raise ConfigError(f"line {lineno}: missing value for '{key}'")
        values[key] = _convert(key, types[key], raw, lineno)
    return RunConfig(**values).validate()


def load_config(path) -> RunConfig:
    return parse_config(Path(path).read_text())
