"""Lattices, regions and finitely supported Pauli operators

Coordinates are stored doubled so half-integer positions stay exact integers.
Qubit q owns symplectic columns 2q (x part) and 2q+1 (z part).
"""

from enum import Enum
from fractions import Fraction
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union
import itertools
import logging
import re

import numpy as np

from plrmc.core.f2core import F2Matrix, pack_dense, unpack_words, vector_from_indices
from plrmc.exceptions import (
    F2DimensionError,
    LatticeMismatchError,
    PauliSyntaxError,
    UnknownSiteError,
)

logger = logging.getLogger(__name__)

Number = Union[int, float, Fraction]
Coord = Tuple[int, ...]


class LatticeKind(Enum):
    CHAIN = "chain"
    CHAIN_WITH_ANCILLA = "chain_with_ancilla"
    SQUARE = "square"
    HONEYCOMB_ZIGZAG = "honeycomb_zigzag"
    LAYERED = "layered"


def to_doubled(value: Number) -> int:
    doubled = Fraction(value) * 2
    if doubled.denominator != 1:
        raise UnknownSiteError(f"coordinate {value} is not a multiple of 1/2")
    return int(doubled)


def from_doubled(value: int) -> Fraction:
    return Fraction(int(value), 2)


def format_coordinate(doubled: int) -> str:
    if doubled % 2 == 0:
        return str(doubled // 2)
    sign = "-" if doubled < 0 else ""
    return f"{sign}{abs(doubled) // 2}.5"


class Lattice:
    """Finite set of sites with qubits, an L-infinity metric and optional periodic axes"""

    def __init__(
        self,
        sites: Iterable[Coord],
        qubits_per_site: Union[int, Dict[Coord, int]] = 1,
        kind: LatticeKind = LatticeKind.CHAIN,
        periods: Optional[Sequence[Optional[int]]] = None,
        name: str = "",
    ):
        site_list = sorted({tuple(int(c) for c in s) for s in sites})
        if not site_list:
            raise UnknownSiteError("a lattice needs at least one site")
        self.dim = len(site_list[0])
        if any(len(s) != self.dim for s in site_list):
            raise UnknownSiteError("all sites must have the same number of coordinates")
        self.kind = kind
        self.name = name
        self.periods: Tuple[Optional[int], ...] = (
            tuple(periods) if periods is not None else (None,) * self.dim
        )
        if len(self.periods) != self.dim:
            raise UnknownSiteError("one period entry is needed per axis")
        self.sites: List[Coord] = site_list
        self.site_index: Dict[Coord, int] = {s: i for i, s in enumerate(site_list)}

        qubit_sites: List[int] = []
        qubit_slots: List[int] = []
        self.site_qubits: List[List[int]] = []
        for i, s in enumerate(site_list):
            count = qubits_per_site if isinstance(qubits_per_site, int) else qubits_per_site.get(s, 1)
            first = len(qubit_sites)
            self.site_qubits.append(list(range(first, first + count)))
            qubit_sites.extend([i] * count)
            qubit_slots.extend(range(count))
        self.qubit_site = np.array(qubit_sites, dtype=np.int64)
        self.qubit_slot = np.array(qubit_slots, dtype=np.int64)
        site_arr = np.array(site_list, dtype=np.int64).reshape(len(site_list), self.dim)
        self.coords = site_arr[self.qubit_site]
        self._axis_lo = site_arr.min(axis=0)
        self._key = (
            self.dim,
            tuple(site_list),
            tuple(len(q) for q in self.site_qubits),
            self.periods,
        )

    # constructors

    @classmethod
    def chain(cls, n: int, qubits_per_site: int = 1, periodic: bool = False) -> "Lattice":
        return cls(
            [(2 * j,) for j in range(n)],
            qubits_per_site,
            LatticeKind.CHAIN,
            periods=(2 * n if periodic else None,),
            name=f"chain{n}",
        )

    @classmethod
    def from_natural(
        cls,
        sites: Iterable[Sequence[Number]],
        qubits_per_site: Union[int, Dict[Coord, int]] = 1,
        kind: LatticeKind = LatticeKind.SQUARE,
        periods: Optional[Sequence[Optional[Number]]] = None,
        name: str = "",
    ) -> "Lattice":
        doubled = [tuple(to_doubled(c) for c in s) for s in sites]
        per = None if periods is None else [None if p is None else to_doubled(p) for p in periods]
        return cls(doubled, qubits_per_site, kind, per, name)

    @classmethod
    def grid(
        cls,
        axes: Sequence[Sequence[Number]],
        qubits_per_site: int = 1,
        kind: LatticeKind = LatticeKind.SQUARE,
        periods: Optional[Sequence[Optional[Number]]] = None,
        name: str = "",
    ) -> "Lattice":
        """Product of per-axis natural coordinate lists; half-integers allowed"""
        return cls.from_natural(itertools.product(*axes), qubits_per_site, kind, periods, name)

    @classmethod
    def layered(
        cls,
        layers: Sequence["Lattice"],
        transforms: Optional[Sequence[Optional[Callable[[Coord], Coord]]]] = None,
        periods: Optional[Sequence[Optional[int]]] = None,
        name: str = "",
    ) -> "LayeredLattice":
        return LayeredLattice(layers, transforms, periods, name)

    # basic queries

    @property
    def num_qubits(self) -> int:
        return int(self.coords.shape[0])

    @property
    def num_cols(self) -> int:
        return 2 * self.num_qubits

    def qubits_at(self, site: Coord) -> List[int]:
        return self.site_qubits[self.site_index[site]]

    def site_of(self, qubit: int) -> Coord:
        return self.sites[int(self.qubit_site[qubit])]

    def slot_of(self, qubit: int) -> int:
        return int(self.qubit_slot[qubit])

    def qubit(self, *coord: Number, slot: int = 0) -> int:
        """Dense index of the qubit at a natural-unit coordinate"""
        return self.qubit_doubled(tuple(to_doubled(c) for c in coord), slot)

    def qubit_doubled(self, coord: Coord, slot: int = 0) -> int:
        coord = self.wrap(coord)
        if coord not in self.site_index:
            raise UnknownSiteError(
                f"no site at ({', '.join(format_coordinate(c) for c in coord)})"
            )
        qubits = self.site_qubits[self.site_index[coord]]
        if not 0 <= slot < len(qubits):
            raise UnknownSiteError(f"site {coord} has no qubit slot {slot}")
        return qubits[slot]

    def has_site(self, *coord: Number) -> bool:
        try:
            return self.wrap(tuple(to_doubled(c) for c in coord)) in self.site_index
        except UnknownSiteError:
            return False

    def wrap(self, coord: Coord) -> Coord:
        if len(coord) != self.dim:
            raise UnknownSiteError(f"expected {self.dim} coordinates, got {len(coord)}")
        if all(p is None for p in self.periods):
            return tuple(coord)
        out = []
        for c, p in zip(coord, self.periods):
            if p is None:
                out.append(c)
            else:
                lo = int(self._axis_lo[len(out)])
                out.append(lo + (c - lo) % p)
        return tuple(out)

    def position(self, qubit: int, axis: int) -> int:
        return int(self.coords[qubit, axis])

    # metric (doubled units)

    def _axis_gaps(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        gaps = np.abs(a - b)
        for axis, p in enumerate(self.periods):
            if p is not None:
                g = gaps[..., axis] % p
                gaps[..., axis] = np.minimum(g, p - g)
        return gaps

    def distance2(self, q1: int, q2: int) -> int:
        return int(self._axis_gaps(self.coords[q1], self.coords[q2]).max())

    def distance(self, q1: int, q2: int) -> Fraction:
        return from_doubled(self.distance2(q1, q2))

    def diameter2(self, qubits: Iterable[int]) -> int:
        idx = np.fromiter(qubits, dtype=np.int64)
        if idx.size <= 1:
            return 0
        pts = self.coords[idx]
        best = 0
        for start in range(0, idx.size, 512):
            block = pts[start : start + 512]
            gaps = self._axis_gaps(block[:, None, :], pts[None, :, :]).max(axis=2)
            best = max(best, int(gaps.max()))
        return best

    def within2(self, qubits: Iterable[int], radius2: int) -> np.ndarray:
        """Mask of qubits within doubled distance radius2 of any given qubit"""
        idx = np.fromiter(qubits, dtype=np.int64)
        mask = np.zeros(self.num_qubits, dtype=bool)
        if idx.size == 0:
            return mask
        mask[idx] = True
        if radius2 < 0:
            return mask
        pts = self.coords[idx]
        for start in range(0, idx.size, 256):
            block = pts[start : start + 256]
            gaps = self._axis_gaps(self.coords[None, :, :], block[:, None, :]).max(axis=2)
            mask |= (gaps <= radius2).any(axis=0)
        return mask

    def signature(self):
        return self._key

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, Lattice):
            return NotImplemented
        return self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self) -> str:
        label = self.name or self.kind.value
        return f"Lattice({label}, sites={len(self.sites)}, qubits={self.num_qubits})"

    def to_json(self) -> Dict:
        return {
            "kind": self.kind.value,
            "name": self.name,
            "sites": [[format_coordinate(c) for c in s] for s in self.sites],
            "qubits_per_site": [len(q) for q in self.site_qubits],
            "periods": [None if p is None else format_coordinate(p) for p in self.periods],
        }

    @classmethod
    def from_json(cls, data: Dict) -> "Lattice":
        sites = [tuple(to_doubled(Fraction(c)) for c in s) for s in data["sites"]]
        counts = data.get("qubits_per_site", 1)
        if isinstance(counts, list):
            counts = {s: int(c) for s, c in zip(sites, counts)}
        periods = data.get("periods")
        if periods is not None:
            periods = [None if p is None else to_doubled(Fraction(p)) for p in periods]
        return cls(
            sites, counts, LatticeKind(data.get("kind", "chain")), periods, data.get("name", "")
        )


class LayeredLattice(Lattice):
    """Disjoint copies of lattices stacked along a new leading axis

    Each layer's coordinates may be remapped (for instance rescaled) so that the
    layers share a common interface coordinate.
    """

    def __init__(
        self,
        layers: Sequence[Lattice],
        transforms: Optional[Sequence[Optional[Callable[[Coord], Coord]]]] = None,
        periods: Optional[Sequence[Optional[int]]] = None,
        name: str = "",
    ):
        transforms = list(transforms) if transforms is not None else [None] * len(layers)
        sites: List[Coord] = []
        counts: Dict[Coord, int] = {}
        self._site_maps: List[Dict[Coord, Coord]] = []
        for index, (layer, fn) in enumerate(zip(layers, transforms)):
            mapping = {}
            for s, qubits in zip(layer.sites, layer.site_qubits):
                new = (2 * index,) + tuple(fn(s) if fn is not None else s)
                if new in counts:
                    raise UnknownSiteError(f"layer transform maps two sites onto {new}")
                mapping[s] = new
                sites.append(new)
                counts[new] = len(qubits)
            self._site_maps.append(mapping)
        if periods is None:
            periods = (None,) + tuple(layers[0].periods)
        super().__init__(sites, counts, LatticeKind.LAYERED, periods, name)
        self.layers = list(layers)
        self._qubit_maps: List[np.ndarray] = []
        for layer, mapping in zip(layers, self._site_maps):
            table = np.empty(layer.num_qubits, dtype=np.int64)
            for q in range(layer.num_qubits):
                new_site = mapping[layer.site_of(q)]
                table[q] = self.site_qubits[self.site_index[new_site]][layer.slot_of(q)]
            self._qubit_maps.append(table)

    def embed_qubit(self, layer: int, qubit: int) -> int:
        return int(self._qubit_maps[layer][qubit])

    def layer_qubits(self, layer: int) -> List[int]:
        return [int(q) for q in self._qubit_maps[layer]]

    def embed(self, op: "PauliOp", layer: int) -> "PauliOp":
        if op.lattice != self.layers[layer]:
            raise LatticeMismatchError(f"operator does not live on layer {layer}")
        table = self._qubit_maps[layer]
        return PauliOp(self, (int(table[q]) for q in op.x), (int(table[q]) for q in op.z))

    def embed_region(self, region: "Region", layer: int) -> "Region":
        table = self._qubit_maps[layer]
        return Region(self, (int(table[q]) for q in region.qubits))


class Region:
    """Set of qubits of a lattice"""

    def __init__(self, lattice: Lattice, qubits: Iterable[int]):
        self.lattice = lattice
        self.qubits: FrozenSet[int] = frozenset(int(q) for q in qubits)

    @classmethod
    def everything(cls, lattice: Lattice) -> "Region":
        return cls(lattice, range(lattice.num_qubits))

    @classmethod
    def box(cls, lattice: Lattice, lo: Sequence[Number], hi: Sequence[Number]) -> "Region":
        """Qubits whose coordinates lie in the closed box [lo, hi] (no wrap-around)"""
        lo2 = np.array([to_doubled(c) for c in lo])
        hi2 = np.array([to_doubled(c) for c in hi])
        mask = ((lattice.coords >= lo2) & (lattice.coords <= hi2)).all(axis=1)
        return cls(lattice, np.flatnonzero(mask))

    @classmethod
    def band(cls, lattice: Lattice, axis: int, lo: Number, hi: Number) -> "Region":
        col = lattice.coords[:, axis]
        mask = (col >= to_doubled(lo)) & (col <= to_doubled(hi))
        return cls(lattice, np.flatnonzero(mask))

    @classmethod
    def where(cls, lattice: Lattice, predicate: Callable[[Coord], bool]) -> "Region":
        return cls(
            lattice,
            (q for q in range(lattice.num_qubits) if predicate(lattice.site_of(q))),
        )

    def __contains__(self, qubit: int) -> bool:
        return qubit in self.qubits

    def __len__(self) -> int:
        return len(self.qubits)

    def __iter__(self):
        return iter(sorted(self.qubits))

    def __or__(self, other: "Region") -> "Region":
        _same_lattice(self.lattice, other.lattice)
        return Region(self.lattice, self.qubits | other.qubits)

    def __and__(self, other: "Region") -> "Region":
        _same_lattice(self.lattice, other.lattice)
        return Region(self.lattice, self.qubits & other.qubits)

    def __sub__(self, other: "Region") -> "Region":
        _same_lattice(self.lattice, other.lattice)
        return Region(self.lattice, self.qubits - other.qubits)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Region):
            return NotImplemented
        return self.lattice == other.lattice and self.qubits == other.qubits

    def __hash__(self):
        return hash(self.qubits)

    def complement(self) -> "Region":
        return Region(self.lattice, set(range(self.lattice.num_qubits)) - self.qubits)

    def neighborhood(self, radius: Number) -> "Region":
        """All qubits within distance radius of the region; radius 0 returns the region"""
        radius2 = to_doubled(radius)
        if radius2 <= 0:
            return self
        mask = self.lattice.within2(self.qubits, radius2)
        return Region(self.lattice, np.flatnonzero(mask))

    def bounds(self, axis: int) -> Tuple[int, int]:
        """Doubled (min, max) of the region along an axis, ignoring wrap-around"""
        col = self.lattice.coords[sorted(self.qubits), axis]
        return int(col.min()), int(col.max())

    def columns(self) -> List[int]:
        cols = []
        for q in sorted(self.qubits):
            cols.extend((2 * q, 2 * q + 1))
        return cols

    def __repr__(self) -> str:
        return f"Region({len(self.qubits)} qubits)"


def _same_lattice(a: Lattice, b: Lattice):
    if a != b:
        raise LatticeMismatchError(f"{a!r} and {b!r} differ")


_FACTOR = re.compile(r"([XYZ])\(\s*([^():]*?)\s*(?::\s*(\d+)\s*)?\)")
_NUMBER = re.compile(r"^-?\d+(\.\d+)?$|^-?\d+/\d+$")


class PauliOp:
    """Pauli operator modulo phase, stored as sparse x and z qubit sets"""

    __slots__ = ("lattice", "x", "z", "_hash")

    def __init__(self, lattice: Lattice, x: Iterable[int] = (), z: Iterable[int] = ()):
        self.lattice = lattice
        self.x: FrozenSet[int] = frozenset(x)
        self.z: FrozenSet[int] = frozenset(z)
        self._hash = None

    @classmethod
    def identity(cls, lattice: Lattice) -> "PauliOp":
        return cls(lattice)

    @classmethod
    def single(cls, lattice: Lattice, pauli: str, qubit: int) -> "PauliOp":
        return cls.from_letters(lattice, {qubit: pauli})

    @classmethod
    def from_letters(cls, lattice: Lattice, letters: Dict[int, str]) -> "PauliOp":
        xs, zs = set(), set()
        for q, letter in letters.items():
            if letter in ("X", "Y"):
                xs ^= {q}
            if letter in ("Z", "Y"):
                zs ^= {q}
        return cls(lattice, xs, zs)

    @classmethod
    def on(cls, lattice: Lattice, pauli: str, qubits: Iterable[int]) -> "PauliOp":
        """The same single-qubit Pauli on every listed qubit"""
        return cls.from_letters(lattice, {q: pauli for q in qubits})

    @classmethod
    def from_vector(cls, lattice: Lattice, v: np.ndarray) -> "PauliOp":
        bits = unpack_words(v, lattice.num_cols)
        nz = np.flatnonzero(bits)
        xs = [int(c) // 2 for c in nz if c % 2 == 0]
        zs = [int(c) // 2 for c in nz if c % 2 == 1]
        return cls(lattice, xs, zs)

    @classmethod
    def from_dense(cls, lattice: Lattice, dense: np.ndarray) -> "PauliOp":
        return cls.from_vector(lattice, pack_dense(dense, lattice.num_cols))

    # algebra

    @property
    def support(self) -> FrozenSet[int]:
        return self.x | self.z

    def is_identity(self) -> bool:
        return not self.x and not self.z

    @property
    def weight(self) -> int:
        return len(self.support)

    def letter(self, qubit: int) -> str:
        inx, inz = qubit in self.x, qubit in self.z
        return {(True, True): "Y", (True, False): "X", (False, True): "Z"}.get((inx, inz), "I")

    def __mul__(self, other: "PauliOp") -> "PauliOp":
        return multiply(self, other)

    def diameter2(self) -> int:
        return self.lattice.diameter2(self.support)

    def diameter(self) -> Fraction:
        return from_doubled(self.diameter2())

    def to_vector(self) -> np.ndarray:
        cols = [2 * q for q in self.x] + [2 * q + 1 for q in self.z]
        return vector_from_indices(cols, self.lattice.num_cols)

    def region(self) -> Region:
        return Region(self.lattice, self.support)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliOp):
            return NotImplemented
        return self.x == other.x and self.z == other.z and self.lattice == other.lattice

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.x, self.z))
        return self._hash

    def __repr__(self) -> str:
        return f"PauliOp({format_pauli(self) or 'I'})"

    # serialization

    def to_json(self) -> Dict:
        factors = []
        for q in sorted(self.support):
            factors.append(
                {
                    "pauli": self.letter(q),
                    "site": [format_coordinate(c) for c in self.lattice.site_of(q)],
                    "qubit": self.lattice.slot_of(q),
                }
            )
        return {"factors": factors}

    @classmethod
    def from_json(cls, lattice: Lattice, data: Dict) -> "PauliOp":
        op = cls(lattice)
        for factor in data.get("factors", []):
            coord = tuple(to_doubled(Fraction(str(c))) for c in factor["site"])
            q = lattice.qubit_doubled(coord, int(factor.get("qubit", 0)))
            op = op * cls.single(lattice, factor["pauli"], q)
        return op


def multiply(p: PauliOp, q: PauliOp) -> PauliOp:
    _same_lattice(p.lattice, q.lattice)
    return PauliOp(p.lattice, p.x ^ q.x, p.z ^ q.z)


def commutes(p: PauliOp, q: PauliOp) -> int:
    """0 if p and q commute, 1 if they anticommute"""
    _same_lattice(p.lattice, q.lattice)
    return (len(p.x & q.z) + len(p.z & q.x)) & 1


def restrict(p: PauliOp, r: Region) -> PauliOp:
    return PauliOp(p.lattice, p.x & r.qubits, p.z & r.qubits)


def product(ops: Iterable[PauliOp], lattice: Lattice) -> PauliOp:
    out = PauliOp(lattice)
    for op in ops:
        out = multiply(out, op)
    return out


def ops_to_matrix(ops: Sequence[PauliOp], lattice: Lattice) -> F2Matrix:
    for op in ops:
        _same_lattice(op.lattice, lattice)
    return F2Matrix.from_vectors([op.to_vector() for op in ops], lattice.num_cols)


def matrix_to_ops(m: F2Matrix, lattice: Lattice) -> List[PauliOp]:
    if m.ncols != lattice.num_cols:
        raise F2DimensionError(f"{m.ncols} columns do not match {lattice.num_cols}")
    return [PauliOp.from_vector(lattice, m.row(i)) for i in range(m.nrows)]


def parse_pauli(text: str, lattice: Lattice) -> PauliOp:
    """Parse factors like ``X(0,1) Z(0,2.5) Y(3:1)``; the empty string is the identity"""
    op = PauliOp(lattice)
    pos = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _FACTOR.match(text, pos)
        if not m:
            raise PauliSyntaxError(f"expected X(..), Y(..) or Z(..), got {text[pos:pos + 8]!r}", pos)
        letter, body, slot = m.group(1), m.group(2), m.group(3)
        parts = [s.strip() for s in body.split(",")] if body.strip() else []
        if not parts:
            raise PauliSyntaxError("empty coordinate", m.start(2))
        coord = []
        for part in parts:
            if not _NUMBER.match(part):
                raise PauliSyntaxError(f"bad coordinate {part!r}", m.start(2))
            coord.append(to_doubled(Fraction(part)))
        q = lattice.qubit_doubled(tuple(coord), int(slot) if slot else 0)
        op = multiply(op, PauliOp.single(lattice, letter, q))
        pos = m.end()
    return op


def format_pauli(p: PauliOp) -> str:
    factors = []
    for q in sorted(p.support):
        coord = ",".join(format_coordinate(c) for c in p.lattice.site_of(q))
        slot = p.lattice.slot_of(q)
        suffix = f":{slot}" if slot else ""
        factors.append(f"{p.letter(q)}({coord}{suffix})")
    return " ".join(factors)
