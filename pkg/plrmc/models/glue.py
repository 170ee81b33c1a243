"""Gluing two circuits along boundaries with isomorphic logical algebras

Both circuits are stacked on a two-layer lattice. At every step the glued group
holds both layers' groups and the products P¹_k(t) P²_k(t) of paired boundary
logicals, each evolved to step t by its own circuit. Shorter periods are padded
with idle steps first.
"""

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple
import logging

from plrmc.core.pauli import Coord, LayeredLattice, PauliOp, Region, format_pauli
from plrmc.core.stab import StabilizerGroup
from plrmc.dynamics.mqca import trace_logical
from plrmc.dynamics.rev import commutation_matrix
from plrmc.exceptions import GlueError, NonAbelianError
from plrmc.models.hh import build_hh, zigzag_logicals
from plrmc.models.sequence import IsgSequence
from plrmc.models.wpt import build_wpt

logger = logging.getLogger(__name__)

Transform = Optional[Callable[[Coord], Coord]]


@dataclass
class GlueSpec:
    """Two circuits, their paired base logicals and how the layers line up

    ``interfaces`` are the glued edge regions of each circuit and ``axis`` the
    shared coordinate axis (before the layer axis is prepended).
    """

    first: IsgSequence
    second: IsgSequence
    pairs: List[Tuple[PauliOp, PauliOp]]
    interfaces: Tuple[Region, Region]
    axis: int
    transforms: Tuple[Transform, Transform] = (None, None)
    idle_first: List[int] = field(default_factory=list)
    idle_second: List[int] = field(default_factory=list)
    open_interfaces: Optional[Tuple[Region, Region]] = None
    name: str = "glued"


def _check_pairs(spec: GlueSpec, first: IsgSequence, second: IsgSequence):
    for k, (p1, p2) in enumerate(spec.pairs):
        if p1.lattice != first.lattice or p2.lattice != second.lattice:
            raise GlueError(f"pair {k} does not live on the glued circuits' lattices")
        if first.base.anticommuting(p1):
            raise GlueError(f"{format_pauli(p1)} is not a logical of the first circuit")
        if second.base.anticommuting(p2):
            raise GlueError(f"{format_pauli(p2)} is not a logical of the second circuit")
    ones = [p for p, _ in spec.pairs]
    twos = [q for _, q in spec.pairs]
    if ones and (commutation_matrix(ones, ones) != commutation_matrix(twos, twos)).any():
        raise GlueError("paired logicals do not share a commutation pattern")


def _synchronized(spec: GlueSpec) -> Tuple[IsgSequence, IsgSequence]:
    first = spec.first.with_idle(spec.idle_first) if spec.idle_first else spec.first
    second = spec.second.with_idle(spec.idle_second) if spec.idle_second else spec.second
    if first.period != second.period:
        raise GlueError(
            f"periods {first.period} and {second.period} differ; add idle steps to synchronize"
        )
    return first, second


def glue(spec: GlueSpec) -> IsgSequence:
    """Glued circuit whose base group contains every paired product"""
    first, second = _synchronized(spec)
    _check_pairs(spec, first, second)
    layered = LayeredLattice(
        [first.lattice, second.lattice], list(spec.transforms), name=spec.name
    )
    traces = [
        (trace_logical(first, p1), trace_logical(second, p2)) for p1, p2 in spec.pairs
    ]
    steps = []
    for t in range(first.period):
        gens = [layered.embed(g, 0) for g in first.steps[t].generators]
        gens += [layered.embed(g, 1) for g in second.steps[t].generators]
        gens += [layered.embed(one[t], 0) * layered.embed(two[t], 1) for one, two in traces]
        try:
            steps.append(StabilizerGroup(layered, gens, name=f"{spec.name}[{t}]"))
        except NonAbelianError as e:
            raise GlueError(f"glued group at step {t} is not abelian: {e}") from e
    interface = layered.embed_region(spec.interfaces[0], 0) | layered.embed_region(
        spec.interfaces[1], 1
    )
    seq = IsgSequence(
        layered, steps, radius=max(first.radius, second.radius), name=spec.name,
        interface=interface, axis=spec.axis + 1,
    )
    seq.metadata["glued_pairs"] = len(spec.pairs)
    if spec.open_interfaces is not None:
        seq.metadata["open_interface"] = layered.embed_region(
            spec.open_interfaces[0], 0
        ) | layered.embed_region(spec.open_interfaces[1], 1)
    logger.info(
        f"Glued {first.name} and {second.name}: {len(spec.pairs)} pairs, period {seq.period}"
    )
    return seq


def build_double_wpt(width: int = 6, height: int = 16, edge: str = "right") -> IsgSequence:
    """Two right-boundary WPT strips glued along their right or left edges"""
    if edge not in ("right", "left"):
        raise GlueError(f"edge must be 'right' or 'left', got '{edge}'")
    one = build_wpt(width, height, "right_R")
    two = build_wpt(width, height, "right_R")
    if edge == "right":
        key, glued_region, open_region = "edge_logicals", one.interface, one.metadata["far_interface"]
    else:
        key, glued_region, open_region = "far_edge_logicals", one.metadata["far_interface"], one.interface
    pairs = list(zip(one.metadata[key], two.metadata[key]))
    spec = GlueSpec(
        one, two, pairs,
        interfaces=(glued_region, glued_region), axis=1,
        open_interfaces=(open_region, open_region),
        name=f"double-wpt-{edge}",
    )
    seq = glue(spec)
    seq.metadata["model"] = "double-wpt"
    seq.metadata["boundary"] = edge
    return seq


def build_wpt_hh(hh_width: int = 48, hh_height: int = 6, wpt_width: int = 6) -> IsgSequence:
    """HH zigzag I edge glued to a WPT right edge; three honeycomb columns per WPT row

    The honeycomb gets one idle step after its R′ step. Honeycomb rows are shifted
    so that its edge sits at 0; WPT (x, y) becomes (3y, x).
    """
    if hh_width % 3:
        raise GlueError("the honeycomb width must be three times the WPT period")
    hh = build_hh(hh_width, hh_height, "zigzag_I")
    wpt = build_wpt(wpt_width, hh_width // 3, "right_R")
    shift2 = 2 * hh_height

    def hh_frame(site: Coord) -> Coord:
        return (site[0], site[1] - shift2)

    def wpt_frame(site: Coord) -> Coord:
        return (3 * site[1], site[0])

    pairs = list(zip(zigzag_logicals(hh.metadata["honeycomb"]), wpt.metadata["edge_logicals"]))
    spec = GlueSpec(
        hh, wpt, pairs,
        interfaces=(hh.interface, wpt.interface), axis=0,
        transforms=(hh_frame, wpt_frame),
        idle_first=[0],
        open_interfaces=(hh.metadata["far_interface"], wpt.metadata["far_interface"]),
        name="wpt-hh",
    )
    seq = glue(spec)
    seq.metadata["model"] = "wpt-hh"
    return seq


def pair_products(seq: IsgSequence) -> Sequence[PauliOp]:
    """Generators of the base group that straddle both layers"""
    lattice = seq.lattice
    if not isinstance(lattice, LayeredLattice):
        return []
    layer0 = frozenset(lattice.layer_qubits(0))
    return [
        g for g in seq.base.generators
        if g.support & layer0 and g.support - layer0
    ]

