"""Learning configuration, loadable from a TOML file."""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from ..errors import ConfigError
from ..statespace import DEFAULT_MAX_STATES

BACKENDS = ("internal", "asp-emit")


@dataclass
class LearnConfig:
    width: int = 1
    max_rules: int = 6
    max_complexity: int = 8
    include_distance: bool = False
    max_states: int = DEFAULT_MAX_STATES
    max_instances: int = 200
    feature_weight: int = 1
    rule_weight: int = 1
    backend: str = "internal"
    time_limit: float | None = None  # seconds per solver call
    max_iterations: int = 50
    max_pool_candidates: int = 200_000
    max_features: int = 6  # bound on selected features per sketch

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.width not in (0, 1, 2):
            raise ConfigError(f"width must be 0, 1 or 2 (got {self.width})")
        if self.max_rules < 0:
            raise ConfigError("max_rules must be non-negative")
        if self.max_complexity < 1:
            raise ConfigError("max_complexity must be at least 1")
        if self.max_states < 1:
            raise ConfigError("max_states must be at least 1")
        if self.feature_weight < 1 or self.rule_weight < 1:
            raise ConfigError("objective weights must be positive integers")
        if self.max_features < 1:
            raise ConfigError("max_features must be at least 1")
        if self.backend not in BACKENDS:
            raise ConfigError(f"backend must be one of {BACKENDS}")

    def replace(self, **overrides):
        data = asdict(self)
        data.update({k: v for k, v in overrides.items() if v is not None})
        return LearnConfig(**data)

    def to_dict(self):
        return asdict(self)


def load_config(path, section="learn") -> LearnConfig:
    """Read ``[learn]`` (or the top level) of a TOML file into a config."""
    with open(path, "rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    data = data.get(section, data)
    known = {f.name for f in fields(LearnConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
    return LearnConfig(**data)
