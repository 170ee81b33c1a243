"""Honeycomb Floquet code on a brick-wall window, with zigzag boundaries

Vertices are (i, r) with columns i periodic. The vertical edge (i, r)-(i, r+1)
exists when i + r is even, so the hexagons are bricks spanning columns i..i+2
and rows r..r+1. Plaquettes are 3-coloured R, G, B and each edge takes the
colour missing from its two neighbouring plaquettes. Step c measures the edges of
colour c with X, Y or Z for R, G or B.

Open windows keep rows 0..height. The top row is the designated zigzag edge and
its vertices carry the boundary labels k = i. The bottom row is the mirror
image (i, r) -> (i + 3, height - r), which preserves colours, so bottom vertex
(i, 0) carries label i - 3 and the same family rules apply.
"""

from enum import Enum
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple
import logging

from plrmc.core.pauli import Lattice, LatticeKind, PauliOp, Region
from plrmc.core.stab import StabilizerGroup
from plrmc.exceptions import PreconditionError, WindowTooSmallError
from plrmc.models.sequence import IsgSequence

logger = logging.getLogger(__name__)

COLORS = ("R", "G", "B")
PAULI_OF_COLOR = {"R": "X", "G": "Y", "B": "Z"}
Vertex = Tuple[int, int]


class HhBoundary(str, Enum):
    BULK = "bulk"
    ZIGZAG_I = "zigzag_I"
    ZIGZAG_II = "zigzag_II"
    ZIGZAG_III_SEQUENCE = "zigzag_III_sequence"


class Honeycomb:
    """Brick-wall honeycomb window with its plaquette and edge colouring"""

    def __init__(self, width: int, height: int, periodic_rows: bool = False):
        if width % 6 or width < 12:
            raise WindowTooSmallError(f"honeycomb width must be a multiple of 6 and >= 12, got {width}")
        if height % 2 or height < 4:
            raise WindowTooSmallError(f"honeycomb height must be even and >= 4, got {height}")
        self.width = width
        self.height = height
        self.periodic_rows = periodic_rows
        self.num_rows = height if periodic_rows else height + 1
        self.lattice = Lattice.grid(
            [range(width), range(self.num_rows)],
            kind=LatticeKind.HONEYCOMB_ZIGZAG,
            periods=(width, height if periodic_rows else None),
            name=f"honeycomb{width}x{height}",
        )

    def brick_color(self, i: int, r: int) -> int:
        """Colour index of the brick anchored at (i, r), valid also for cut bricks"""
        return ((i + 3 * r - 3 * self.height + 4) // 2) % 3

    def bricks(self) -> List[Vertex]:
        return [(i, r) for r in range(self.height) for i in range(self.width) if (i + r) % 2 == 0]

    def brick_vertices(self, i: int, r: int) -> List[Vertex]:
        return [(i, r), (i + 1, r), (i + 2, r), (i + 2, r + 1), (i + 1, r + 1), (i, r + 1)]

    def qubit(self, v: Vertex) -> int:
        return self.lattice.qubit(*v)

    def edges(self) -> List[Tuple[Vertex, Vertex, int]]:
        """(u, v, colour) for every edge with both ends inside the window"""
        out = []
        for r in range(self.num_rows):
            for i in range(self.width):
                below = i if (i + r - 1) % 2 == 0 else i - 1
                above = i if (i + r) % 2 == 0 else i - 1
                color = (3 - self.brick_color(below, r - 1) - self.brick_color(above, r)) % 3
                out.append(((i, r), (i + 1, r), color))
        last = self.num_rows if self.periodic_rows else self.height
        for r in range(last):
            for i in range(self.width):
                if (i + r) % 2 == 0:
                    color = (3 - self.brick_color(i - 2, r) - self.brick_color(i, r)) % 3
                    out.append(((i, r), (i, r + 1), color))
        return out

    def edge_operators(self, color: str) -> List[PauliOp]:
        c = COLORS.index(color)
        letter = PAULI_OF_COLOR[color]
        return [
            PauliOp.from_letters(self.lattice, {self.qubit(u): letter, self.qubit(v): letter})
            for u, v, ec in self.edges()
            if ec == c
        ]

    def plaquette_operators(self, color: str, letter: str = "") -> List[PauliOp]:
        c = COLORS.index(color)
        letter = letter or PAULI_OF_COLOR[color]
        return [
            PauliOp.from_letters(
                self.lattice, {self.qubit(v): letter for v in self.brick_vertices(i, r)}
            )
            for i, r in self.bricks()
            if self.brick_color(i, r) == c
        ]

    def plaquettes(self) -> List[PauliOp]:
        """P_R^X, P_G^Y and P_B^Z"""
        return [op for color in COLORS for op in self.plaquette_operators(color)]

    # boundary labels

    def edge_vertex(self, label: int, edge: str = "top") -> Vertex:
        if self.periodic_rows:
            raise PreconditionError("a periodic honeycomb has no zigzag edge")
        if edge == "top":
            return (label % self.width, self.height)
        if edge == "bottom":
            return ((label + 3) % self.width, 0)
        raise PreconditionError(f"unknown edge '{edge}'")

    def labelled(self, terms: Sequence[Tuple[str, int]], edge: str = "top") -> PauliOp:
        letters: Dict[int, str] = {}
        for letter, label in terms:
            q = self.qubit(self.edge_vertex(label, edge))
            if q in letters:
                letters[q] = _product_letter(letters[q], letter)
            else:
                letters[q] = letter
        return PauliOp.from_letters(self.lattice, {q: p for q, p in letters.items() if p != "I"})

    def cells(self) -> range:
        return range(self.width // 6)


def _product_letter(a: str, b: str) -> str:
    x = (a in "XY") ^ (b in "XY")
    z = (a in "ZY") ^ (b in "ZY")
    return {(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}[(x, z)]


# terms per unit cell of six labels, relative to 6x
_FAMILIES: Dict[str, Dict[int, List[List[Tuple[str, int]]]]] = {
    "R": {
        1: [[("X", 0)]],
        2: [[("X", 1), ("X", 2)], [("X", 4), ("X", 5)]],
        3: [[("X", 2), ("X", 3), ("X", 4)]],
    },
    "G": {
        1: [[("Y", 2)]],
        2: [[("Y", 3), ("Y", 4)], [("Y", 0), ("Y", 1)]],
        3: [[("Y", 4), ("Y", 5), ("Y", 6)]],
    },
    "B": {
        1: [[("Z", 4)]],
        2: [[("Z", -1), ("Z", 0)], [("Z", 2), ("Z", 3)]],
        3: [[("Z", 0), ("Z", 1), ("Z", 2)]],
    },
}


def boundary_families(
    hc: Honeycomb, color: str, edges: Sequence[str] = ("top", "bottom")
) -> Dict[int, List[PauliOp]]:
    """The 1-, 2- and 3-body zigzag boundary families B^c_1, B^c_2, B^c_3"""
    if color not in _FAMILIES:
        raise PreconditionError(f"unknown colour '{color}'")
    out: Dict[int, List[PauliOp]] = {}
    for family, patterns in _FAMILIES[color].items():
        ops = []
        for edge in edges:
            for x in hc.cells():
                for pattern in patterns:
                    ops.append(hc.labelled([(p, 6 * x + k) for p, k in pattern], edge))
        out[family] = ops
    return out


def isg(hc: Honeycomb, color: str, families: Sequence[int] = ()) -> StabilizerGroup:
    """⟨E_c, P_R^X, P_G^Y, P_B^Z⟩ plus the listed boundary families of colour c"""
    gens = hc.edge_operators(color) + hc.plaquettes()
    if families:
        by_family = boundary_families(hc, color)
        for family in families:
            gens += by_family[family]
    primes = {(): "", (1, 2): "′", (2,): "″", (2, 3): "‴"}.get(tuple(sorted(families)), "*")
    return StabilizerGroup(hc.lattice, gens, name=f"ISG_{color}{primes}")


def zigzag_logicals(hc: Honeycomb, edge: str = "top") -> List[PauliOp]:
    """L_2j = Z_6j-2 Z_6j-1 Z_6j+1 Z_6j+2 and L_2j+1 = X_6j+2 X_6j+3 X_6j+4 of ISG_R′"""
    out = []
    for j in hc.cells():
        base = 6 * j
        out.append(hc.labelled([("Z", base - 2), ("Z", base - 1), ("Z", base + 1), ("Z", base + 2)], edge))
        out.append(hc.labelled([("X", base + 2), ("X", base + 3), ("X", base + 4)], edge))
    return out


def static_logicals(hc: Honeycomb, edge: str = "top") -> List[PauliOp]:
    """Logicals shared by all three zigzag II steps"""
    out = []
    for j in hc.cells():
        base = 6 * j
        out.append(hc.labelled([("X", base + 2), ("X", base + 3), ("X", base + 4)], edge))
        out.append(hc.labelled([("Y", base - 2), ("Y", base - 1), ("Y", base)], edge))
        out.append(hc.labelled([("Z", base), ("Z", base + 1), ("Z", base + 2)], edge))
    return out


def _schedule(boundary: HhBoundary) -> List[Tuple[str, Tuple[int, ...]]]:
    if boundary == HhBoundary.BULK:
        return [("R", ()), ("G", ()), ("B", ())]
    if boundary == HhBoundary.ZIGZAG_I:
        return [("R", (1, 2)), ("G", (1, 2)), ("B", (1, 2))]
    if boundary == HhBoundary.ZIGZAG_II:
        return [("R", (2,)), ("G", (2,)), ("B", (2,))]
    return [
        ("R", (1, 2)), ("G", (1, 2)), ("B", (2, 3)),
        ("R", (1, 2)), ("G", (2, 3)), ("B", (1, 2)),
    ]


def build_hh(width: int = 48, height: int = 6, boundary="zigzag_I") -> IsgSequence:
    """Honeycomb code window; ``bulk`` is a torus, the zigzag variants are cylinders"""
    try:
        kind = HhBoundary(boundary)
    except ValueError:
        choices = ", ".join(b.value for b in HhBoundary)
        raise PreconditionError(f"unknown HH boundary '{boundary}' (choose from {choices})")
    hc = Honeycomb(width, height, periodic_rows=kind == HhBoundary.BULK)
    steps = [isg(hc, color, families) for color, families in _schedule(kind)]
    if kind == HhBoundary.BULK:
        seq = IsgSequence(hc.lattice, steps, radius=Fraction(2), name="hh-bulk")
    else:
        seq = IsgSequence(
            hc.lattice, steps, radius=Fraction(2), name=f"hh-{kind.value}",
            interface=Region.band(hc.lattice, 1, height - 2, height), axis=0,
        )
        seq.metadata["edge_logicals"] = (
            static_logicals(hc) if kind == HhBoundary.ZIGZAG_II else zigzag_logicals(hc)
        )
        seq.metadata["far_interface"] = Region.band(hc.lattice, 1, 0, 2)
    seq.metadata["model"] = "hh"
    seq.metadata["boundary"] = kind.value
    seq.metadata["honeycomb"] = hc
    logger.info(
        f"Built HH {kind.value} on a {width}x{height} window "
        f"({hc.lattice.num_qubits} qubits, period {seq.period})"
    )
    return seq
