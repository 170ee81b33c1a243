"""YAML model configuration loader and run-config resolution"""

import yaml
from dataclasses import dataclass, field
from datetime import datetime
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple
import logging

from plrmc.exceptions import ConfigError
from plrmc.models.registry import MODELS

logger = logging.getLogger(__name__)

CONFIG_KEYS = (
    "name", "model", "boundary", "width", "height", "n",
    "radius", "margin_override", "cuts", "seed",
)
CONFIG_SUFFIXES = (".yaml", ".yml", ".json")


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def parse_fraction(value: Any) -> Fraction:
    """Exact value of an int, a float or a string such as '3/2'"""
    if isinstance(value, bool) or value is None:
        raise ValueError(f"not a number: {value!r}")
    if isinstance(value, (int, float, Fraction)):
        return Fraction(value)
    return Fraction(str(value).strip())


def load_config_file(path: str) -> Dict[str, Any]:
    """One model config from a YAML or JSON file"""
    file = Path(path)
    if not file.exists():
        raise ConfigError(f"config file {path} does not exist")
    try:
        with open(file, "r") as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ConfigError(f"config file {path} is not valid YAML/JSON: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a mapping")
    return data


class ModelConfigLoader:
    def __init__(self, config_dir: str = "configs"):
        self.config_dir = Path(config_dir)
        self.configs: Dict[str, Dict[str, Any]] = {}
        self.last_loaded: Optional[datetime] = None

    def _config_files(self) -> List[Path]:
        return sorted(
            p for p in self.config_dir.glob("*") if p.suffix in CONFIG_SUFFIXES and p.is_file()
        )

    def load_configs(self) -> Dict[str, Dict[str, Any]]:
        """Load every model config in the directory"""
        self.configs = {}
        self.config_dir.mkdir(parents=True, exist_ok=True)

        for config_file in self._config_files():
            try:
                data = load_config_file(str(config_file))
            except ConfigError as e:
                logger.error(f"Failed to load config {config_file}: {e}")
                continue
            self.configs[config_file.stem] = data
            logger.info(f"Loaded config: {config_file.stem}")

        self.last_loaded = datetime.now()

        if not self.configs and not (self.config_dir / "default.yaml").exists():
            self._create_default_config()
            self.load_configs()

        return self.configs

    def _create_default_config(self):
        default_config = {
            "name": "default",
            "model": "translation",
            "n": 20,
            "cuts": [[12, 7], [13, 8], [11, 6]],
        }
        default_path = self.config_dir / "default.yaml"
        with open(default_path, "w") as f:
            yaml.dump(default_config, f, default_flow_style=False, sort_keys=False)
        logger.info(f"Created default config at {default_path}")

    def get_config(self, name: Optional[str] = None) -> Dict[str, Any]:
        """Named config, or the default one"""
        if not self.configs:
            self.load_configs()
        if name is not None:
            if name not in self.configs:
                raise ConfigError(f"no config named '{name}' in {self.config_dir}")
            return self.configs[name]
        if "default" in self.configs:
            return self.configs["default"]
        return next(iter(self.configs.values()), {})

    def reload_if_changed(self) -> bool:
        """Reload configs if files have changed"""
        if not self.last_loaded:
            self.load_configs()
            return True

        for config_file in self._config_files():
            mtime = datetime.fromtimestamp(config_file.stat().st_mtime)
            if mtime > self.last_loaded:
                logger.info("Config files changed, reloading...")
                self.load_configs()
                return True

        return False

    def validate_config(self, config: Dict[str, Any]) -> List[str]:
        return validate_config(config)


def validate_config(config: Dict[str, Any]) -> List[str]:
    """Validate config structure and return errors"""
    errors = []

    for key in config:
        if key not in CONFIG_KEYS:
            errors.append(f"unknown field '{key}'")

    model = config.get("model")
    info = MODELS.get(model) if isinstance(model, str) else None
    if info is None:
        errors.append(f"model must be one of {', '.join(MODELS)}")

    boundary = config.get("boundary")
    if info is not None and boundary is not None:
        if not info.boundaries:
            errors.append(f"model {model} takes no boundary")
        elif boundary not in info.boundaries:
            errors.append(f"boundary of {model} must be one of {', '.join(info.boundaries)}")

    for key in ("width", "height", "n"):
        if key not in config or config[key] is None:
            continue
        if not _is_int(config[key]) or config[key] <= 0:
            errors.append(f"{key} must be a positive integer")
        elif info is not None:
            used = info.uses_window if key != "n" else info.uses_sites
            if not used:
                errors.append(f"model {model} does not use {key}")

    for key in ("radius", "margin_override"):
        if config.get(key) is None:
            continue
        try:
            value = parse_fraction(config[key])
        except (ValueError, ZeroDivisionError):
            errors.append(f"{key} must be a number or a fraction such as '3/2'")
            continue
        if value <= 0 or (value * 2).denominator != 1:
            errors.append(f"{key} must be a positive multiple of 1/2")

    seed = config.get("seed")
    if seed is not None and (not _is_int(seed) or seed < 0 or seed >= 2 ** 64):
        errors.append("seed must be an unsigned 64-bit integer")

    cuts = config.get("cuts")
    if cuts is not None:
        if not isinstance(cuts, list):
            errors.append("cuts must be a list of [a, b] pairs")
        else:
            for k, cut in enumerate(cuts):
                try:
                    a, b = (parse_fraction(v) for v in cut)
                except (TypeError, ValueError, ZeroDivisionError):
                    errors.append(f"cuts[{k}] must be a pair [a, b] of numbers")
                    continue
                if a <= b:
                    errors.append(f"cuts[{k}] needs a > b")

    name = config.get("name")
    if name is not None and not isinstance(name, str):
        errors.append("name must be a string")

    return errors


@dataclass
class RunConfig:
    """Fully resolved configuration of one command-line run"""

    command: str
    model: Optional[str] = None
    name: str = ""
    boundary: Optional[str] = None
    width: Optional[int] = None
    height: Optional[int] = None
    n: Optional[int] = None
    radius: Optional[Fraction] = None
    margin_override: Optional[Fraction] = None
    cuts: List[Tuple[Fraction, Fraction]] = field(default_factory=list)
    seed: int = 0
    output: str = "text"
    source: str = "flags"
    input_file: Optional[str] = None

    def to_json(self) -> Dict[str, Any]:
        return {
            "command": self.command,
            "name": self.name,
            "model": self.model,
            "boundary": self.boundary,
            "width": self.width,
            "height": self.height,
            "n": self.n,
            "radius": None if self.radius is None else str(self.radius),
            "margin_override": None if self.margin_override is None else str(self.margin_override),
            "cuts": [[str(a), str(b)] for a, b in self.cuts],
            "seed": self.seed,
            "output": self.output,
            "source": self.source,
            "input_file": self.input_file,
        }


def resolve_run_config(
    command: str,
    file_config: Optional[Dict[str, Any]] = None,
    overrides: Optional[Dict[str, Any]] = None,
    output: str = "text",
    source: str = "flags",
) -> RunConfig:
    """Merge model defaults, a config file and command-line flags (in that order)"""
    merged: Dict[str, Any] = dict(file_config or {})
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[key] = value
    merged.setdefault("model", "translation")

    errors = validate_config(merged)
    if errors:
        raise ConfigError(f"invalid configuration ({len(errors)} errors)", errors)

    info = MODELS[merged["model"]]
    for key, value in info.defaults.items():
        merged.setdefault(key, value)

    radius = merged.get("radius")
    margin = merged.get("margin_override")
    rc = RunConfig(
        command=command,
        model=info.name,
        name=merged.get("name") or info.name,
        boundary=merged.get("boundary"),
        width=merged.get("width"),
        height=merged.get("height"),
        n=merged.get("n"),
        radius=None if radius is None else parse_fraction(radius),
        margin_override=None if margin is None else parse_fraction(margin),
        cuts=[(parse_fraction(a), parse_fraction(b)) for a, b in merged.get("cuts") or []],
        seed=int(merged.get("seed") or 0),
        output=output,
        source=source,
    )
    logger.debug(f"Resolved run config: {rc.to_json()}")
    return rc
