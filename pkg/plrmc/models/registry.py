"""Built-in models by name, with their defaults and builders"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Optional, Tuple, Union
import logging

from plrmc.dynamics.mqca import MqcaMap
from plrmc.exceptions import ConfigError
from plrmc.models.chains import (
    build_majorana_shift,
    build_shift_by_two_1d,
    build_teleport_chain,
    build_translation_1d,
    random_1d_plrmc,
)
from plrmc.models.glue import build_double_wpt, build_wpt_hh
from plrmc.models.hh import HhBoundary, build_hh
from plrmc.models.sequence import IsgSequence
from plrmc.models.wpt import WptBoundary, build_wpt

logger = logging.getLogger(__name__)

Built = Union[IsgSequence, MqcaMap]


@dataclass(frozen=True)
class ModelInfo:
    name: str
    description: str
    boundaries: Tuple[str, ...] = ()
    defaults: Dict[str, Any] = field(default_factory=dict)
    returns_map: bool = False

    @property
    def uses_window(self) -> bool:
        return "width" in self.defaults

    @property
    def uses_sites(self) -> bool:
        return "n" in self.defaults


MODELS: Dict[str, ModelInfo] = {
    info.name: info
    for info in (
        ModelInfo("translation", "measurement translation on a ring", defaults={"n": 20}),
        ModelInfo(
            "teleport-chain", "iterated teleportation (open, two steps)",
            defaults={"n": 4, "radius": Fraction(1)},
        ),
        ModelInfo(
            "majorana-shift", "Majorana chain shift automorphism",
            defaults={"n": 24}, returns_map=True,
        ),
        ModelInfo("shift-by-two", "three-step Majorana shift by two sites", defaults={"n": 16}),
        ModelInfo(
            "wpt", "Wen plaquette translation model",
            boundaries=tuple(b.value for b in WptBoundary),
            defaults={"boundary": "right_R", "width": 24, "height": 24},
        ),
        ModelInfo(
            "hh", "honeycomb Floquet code",
            boundaries=tuple(b.value for b in HhBoundary),
            defaults={"boundary": "zigzag_I", "width": 48, "height": 6},
        ),
        ModelInfo(
            "double-wpt", "two WPT strips glued along an edge",
            boundaries=("right", "left"),
            defaults={"boundary": "right", "width": 6, "height": 16},
        ),
        ModelInfo(
            "wpt-hh", "HH zigzag edge glued to a WPT right edge",
            defaults={"width": 48, "height": 6},
        ),
        ModelInfo(
            "random-1d", "randomized standalone 1D circuit", defaults={"n": 16}
        ),
    )
}


def get_model(name: str) -> ModelInfo:
    if name not in MODELS:
        raise ConfigError(f"unknown model '{name}'", [f"model must be one of {', '.join(MODELS)}"])
    return MODELS[name]


def build_model(rc) -> Built:
    """Build the sequence (or map) a resolved run configuration names"""
    info = get_model(rc.model)
    if rc.model == "translation":
        built = build_translation_1d(rc.n)
    elif rc.model == "teleport-chain":
        built = build_teleport_chain(rc.n, rc.radius if rc.radius is not None else Fraction(1))
    elif rc.model == "majorana-shift":
        built = build_majorana_shift(rc.n)
    elif rc.model == "shift-by-two":
        built = build_shift_by_two_1d(rc.n)
    elif rc.model == "wpt":
        built = build_wpt(rc.width, rc.height, rc.boundary)
    elif rc.model == "hh":
        built = build_hh(rc.width, rc.height, rc.boundary)
    elif rc.model == "double-wpt":
        built = build_double_wpt(rc.width, rc.height, rc.boundary)
    elif rc.model == "wpt-hh":
        built = build_wpt_hh(hh_width=rc.width, hh_height=rc.height)
    else:
        seq, expected = random_1d_plrmc(rc.seed, rc.n)
        seq.metadata["expected_index"] = expected
        built = seq
    if isinstance(built, IsgSequence) and rc.radius is not None:
        built.radius = Fraction(rc.radius)
    logger.debug(f"Built model {info.name} for {rc.command}")
    return built


def default_for(model: str, key: str) -> Optional[Any]:
    return get_model(model).defaults.get(key)
