"""
Configuration settings and environment variable management.
"""
import os
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Callable, Dict, Mapping, Optional, Tuple, Union

from dotenv import load_dotenv

from ..core.errors import ConfigError, ValidationError
from ..model.types import VenueCategory

ENV_PREFIX = "STREETSCORE_"

DEFAULT_THRESHOLDS = (1.0, 3.0, 10.0, 30.0, 100.0, 300.0, 1000.0, 3000.0)
KNOWN_TARGETS = ("safety", "walkability")


@dataclass(frozen=True)
class PipelineConfig:
    """Every run parameter of the scoring pipeline."""
    streets_path: Optional[str] = None
    photos_path: Optional[str] = None
    venues_path: Optional[str] = None
    output_dir: str = "output"
    buffer_radius: float = 22.5
    cell_size: Optional[float] = None
    night_confidence: float = 0.95
    keywords_path: Optional[str] = None
    stability_thresholds: Tuple[float, ...] = DEFAULT_THRESHOLDS
    stability_tolerance: float = 0.05
    targets: Tuple[str, ...] = KNOWN_TARGETS
    reference_category: Optional[str] = "travel"
    night_bins: int = 3
    gender_bins: int = 4
    tag_bins: int = 3
    snap_tolerance: float = 1.0
    walk_speed: float = 80.0
    walk_minutes: float = 5.0
    seed: int = 0
    workers: int = 1
    strict: bool = False
    strict_stats: bool = False

    @property
    def effective_cell_size(self) -> float:
        return self.cell_size if self.cell_size is not None else 2.0 * self.buffer_radius

    def validate(self) -> "PipelineConfig":
        """
        Check parameter ranges.

        Raises:
            ConfigError: Naming the first offending key
        """
        checks = [
            ("buffer_radius", self.buffer_radius > 0, "must be > 0"),
            ("night_confidence", 0 < self.night_confidence <= 1, "must be in (0, 1]"),
            ("cell_size", self.cell_size is None or self.cell_size >= self.buffer_radius,
             "must be >= buffer_radius"),
            ("stability_thresholds",
             all(t >= 0 for t in self.stability_thresholds)
             and list(self.stability_thresholds) == sorted(self.stability_thresholds),
             "must be ascending and >= 0"),
            ("stability_tolerance", self.stability_tolerance > 0, "must be > 0"),
            ("targets", bool(self.targets) and all(t in KNOWN_TARGETS for t in self.targets),
             f"must be a non-empty subset of {KNOWN_TARGETS}"),
            ("night_bins", self.night_bins >= 2, "must be >= 2"),
            ("gender_bins", self.gender_bins >= 2, "must be >= 2"),
            ("tag_bins", self.tag_bins >= 2, "must be >= 2"),
            ("snap_tolerance", self.snap_tolerance >= 0, "must be >= 0"),
            ("walk_speed", self.walk_speed > 0, "must be > 0"),
            ("walk_minutes", self.walk_minutes > 0, "must be > 0"),
            ("workers", self.workers >= 1, "must be >= 1"),
        ]
        for key, ok, message in checks:
            if not ok:
                raise ConfigError(f"{key} {message}, got {getattr(self, key)!r}", "config", {"key": key})
        if self.reference_category is not None:
            try:
                VenueCategory.parse(self.reference_category)
            except ValidationError:
                raise ConfigError(
                    f"reference_category must be a venue category or none, got {self.reference_category!r}",
                    "config",
                    {"key": "reference_category"}
                )
        return self

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["stability_thresholds"] = list(self.stability_thresholds)
        data["targets"] = list(self.targets)
        return data


def _to_bool(value: Any) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {value!r}")


def _to_float(value: Any) -> float:
    if isinstance(value, bool):
        raise ValueError(f"not a number: {value!r}")
    return float(value)


def _to_int(value: Any) -> int:
    if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
        raise ValueError(f"not an integer: {value!r}")
    return int(value)


def _optional(convert: Callable[[Any], Any]) -> Callable[[Any], Any]:
    def inner(value: Any) -> Any:
        if value is None or (isinstance(value, str) and value.strip().lower() in ("", "none")):
            return None
        return convert(value)
    return inner


def _sequence(convert: Callable[[Any], Any]) -> Callable[[Any], Tuple]:
    def inner(value: Any) -> Tuple:
        if isinstance(value, str):
            value = [v for v in value.replace(";", ",").split(",") if v.strip()]
        return tuple(convert(v.strip() if isinstance(v, str) else v) for v in value)
    return inner


_CONVERTERS: Dict[str, Callable[[Any], Any]] = {
    "streets_path": _optional(str),
    "photos_path": _optional(str),
    "venues_path": _optional(str),
    "output_dir": str,
    "buffer_radius": _to_float,
    "cell_size": _optional(_to_float),
    "night_confidence": _to_float,
    "keywords_path": _optional(str),
    "stability_thresholds": _sequence(_to_float),
    "stability_tolerance": _to_float,
    "targets": _sequence(str),
    "reference_category": _optional(str),
    "night_bins": _to_int,
    "gender_bins": _to_int,
    "tag_bins": _to_int,
    "snap_tolerance": _to_float,
    "walk_speed": _to_float,
    "walk_minutes": _to_float,
    "seed": _to_int,
    "workers": _to_int,
    "strict": _to_bool,
    "strict_stats": _to_bool,
}
CONFIG_KEYS = tuple(f.name for f in fields(PipelineConfig))


def _convert(values: Mapping[str, Any], source: str) -> Dict[str, Any]:
    converted = {}
    for key, value in values.items():
        name = key.replace("-", "_")
        if name not in _CONVERTERS:
            raise ConfigError(f"Unknown configuration key {key!r} in {source}", "config", {"key": key})
        try:
            converted[name] = _CONVERTERS[name](value)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Invalid value for {name} in {source}: {e}", "config", {"key": name})
    return converted


def _read_toml(path: Union[str, Path]) -> Dict[str, Any]:
    try:
        with open(path, "rb") as f:
            data = tomllib.load(f)
    except OSError as e:
        raise ConfigError(f"Cannot read config file {path}: {e.strerror}", "config", {"path": str(path)})
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"Invalid TOML in {path}: {e}", "config", {"path": str(path)})
    return data.get("pipeline", data)


def _read_env() -> Dict[str, str]:
    values = {}
    for key in CONFIG_KEYS:
        value = os.getenv(ENV_PREFIX + key.upper())
        if value is not None:
            values[key] = value
    return values


def load_settings(
    config_path: Optional[Union[str, Path]] = None,
    overrides: Optional[Mapping[str, Any]] = None,
    use_env: bool = True,
) -> PipelineConfig:
    """
    Load the pipeline configuration.

    Layers, lowest to highest: dataclass defaults, the TOML file (top level
    or a [pipeline] table), STREETSCORE_<KEY> environment variables (a .env
    file is loaded first), then explicit overrides such as command-line flags.

    Args:
        config_path: Optional TOML file
        overrides: Key -> value; None values are ignored
        use_env: Read STREETSCORE_* variables

    Returns:
        PipelineConfig: Validated configuration

    Raises:
        ConfigError: For unknown keys, unconvertible values or out-of-range parameters
    """
    config = PipelineConfig()
    if config_path is not None:
        config = replace(config, **_convert(_read_toml(config_path), str(config_path)))
    if use_env:
        load_dotenv()
        config = replace(config, **_convert(_read_env(), "environment"))
    if overrides:
        explicit = {k: v for k, v in overrides.items() if v is not None}
        config = replace(config, **_convert(explicit, "overrides"))
    return config.validate()


__all__ = ["PipelineConfig", "load_settings", "CONFIG_KEYS", "ENV_PREFIX"]
