"""Stabilizer groups as symplectic subspaces and logical bases on regions"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple
import logging

import numpy as np

from plrmc.core.f2core import (
    Echelon,
    F2Matrix,
    SpanSolver,
    Subspace,
    eliminate_leading,
    independent_rows,
    kernel,
    rank,
    subspace_intersection,
    symplectic_products,
)
from plrmc.core.pauli import (
    Lattice,
    PauliOp,
    Region,
    commutes,
    format_pauli,
    from_doubled,
    matrix_to_ops,
    multiply,
    ops_to_matrix,
    parse_pauli,
    to_doubled,
)
from plrmc.exceptions import LatticeMismatchError, NonAbelianError

logger = logging.getLogger(__name__)


class StabilizerGroup:
    """Abelian Pauli group (phases dropped) with its canonical RREF basis

    The generators are kept as given for reporting; membership and equality go
    through the canonical basis, which is computed once at construction.
    """

    def __init__(
        self,
        lattice: Lattice,
        generators: Iterable[PauliOp] = (),
        check_abelian: bool = True,
        name: str = "",
    ):
        self.lattice = lattice
        self.name = name
        gens: List[PauliOp] = []
        for g in generators:
            if g.lattice != lattice:
                raise LatticeMismatchError(f"generator {g!r} lives on another lattice")
            if not g.is_identity():
                gens.append(g)
        self.generators = gens
        self._by_qubit: Optional[Dict[int, List[int]]] = None
        if check_abelian:
            witness = self._first_anticommuting_pair()
            if witness is not None:
                a, b = witness
                raise NonAbelianError(
                    f"generators {format_pauli(a)} and {format_pauli(b)} anticommute",
                    witness=witness,
                )
        self.matrix = ops_to_matrix(gens, lattice)
        self.space = Subspace(lattice.num_cols, self.matrix)
        self.radius2 = max((g.diameter2() for g in gens), default=0)

    @classmethod
    def vacuum(cls, lattice: Lattice, region: Optional[Region] = None) -> "StabilizerGroup":
        """Single-qubit Z on every qubit (of the region)"""
        qubits = range(lattice.num_qubits) if region is None else sorted(region.qubits)
        return cls(lattice, [PauliOp(lattice, (), (q,)) for q in qubits], False, "vacuum")

    @classmethod
    def from_basis(cls, lattice: Lattice, rows: F2Matrix, name: str = "") -> "StabilizerGroup":
        return cls(lattice, matrix_to_ops(rows, lattice), check_abelian=False, name=name)

    # structure

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def canonical_basis(self) -> F2Matrix:
        return self.space.basis

    @property
    def locality_radius(self) -> Fraction:
        return from_doubled(self.radius2)

    def qubit_index(self) -> Dict[int, List[int]]:
        """Generator indices touching each qubit"""
        if self._by_qubit is None:
            index: Dict[int, List[int]] = {}
            for i, g in enumerate(self.generators):
                for q in g.support:
                    index.setdefault(q, []).append(i)
            self._by_qubit = index
        return self._by_qubit

    def _first_anticommuting_pair(self) -> Optional[Tuple[PauliOp, PauliOp]]:
        index = self.qubit_index()
        for i, g in enumerate(self.generators):
            near: Set[int] = set()
            for q in g.support:
                near.update(j for j in index[q] if j > i)
            for j in sorted(near):
                if commutes(g, self.generators[j]):
                    return g, self.generators[j]
        return None

    def gens_meeting(self, qubits: Iterable[int]) -> List[int]:
        index = self.qubit_index()
        hit: Set[int] = set()
        for q in qubits:
            hit.update(index.get(q, ()))
        return sorted(hit)

    def anticommuting(self, p: PauliOp) -> List[int]:
        """Indices of generators anticommuting with p"""
        return [i for i in self.gens_meeting(p.support) if commutes(self.generators[i], p)]

    def commutes_with(self, p: PauliOp) -> bool:
        return not self.anticommuting(p)

    def contains(self, p: PauliOp) -> bool:
        return contains(self, p)

    def __contains__(self, p: PauliOp) -> bool:
        return contains(self, p)

    def __eq__(self, other) -> bool:
        if not isinstance(other, StabilizerGroup):
            return NotImplemented
        return self.lattice == other.lattice and self.space == other.space

    def __hash__(self):
        return hash(self.space)

    def __len__(self) -> int:
        return len(self.generators)

    def __repr__(self) -> str:
        label = f"{self.name}, " if self.name else ""
        return f"StabilizerGroup({label}dim={self.dim}, gens={len(self.generators)})"

    # regions

    def restricted_to(self, region: Region) -> "StabilizerGroup":
        """The subgroup of elements supported inside the region"""
        if region.lattice != self.lattice:
            raise LatticeMismatchError("region lives on another lattice")
        if len(region) == self.lattice.num_qubits:
            return self
        local = [g for g in self.generators if g.support <= region.qubits]
        if self.dim == 0:
            return StabilizerGroup(self.lattice, (), False, self.name)
        inside = region.columns()
        inside_set = set(inside)
        outside = [c for c in range(self.lattice.num_cols) if c not in inside_set]
        permuted = self.space.basis.dense()[:, outside + inside]
        _, tail = eliminate_leading(F2Matrix.from_dense(permuted), len(outside))
        tail_inside = tail.dense()[:, len(outside):]
        target = rank(F2Matrix.from_dense(tail_inside, len(inside)))
        if rank(ops_to_matrix(local, self.lattice)) == target:
            return StabilizerGroup(self.lattice, local, False, self.name)
        logger.debug(
            "restriction of %s needs %d extra elements beyond local generators",
            self.name or "group", target - len(local),
        )
        full = np.zeros((tail_inside.shape[0], self.lattice.num_cols), dtype=np.uint8)
        full[:, inside] = tail_inside
        rows = F2Matrix.from_dense(full, self.lattice.num_cols)
        return StabilizerGroup(
            self.lattice, local + matrix_to_ops(rows, self.lattice), False, self.name
        )

    # serialization

    def to_json(self) -> Dict:
        return {
            "lattice": self.lattice.to_json(),
            "generators": [format_pauli(g) for g in self.generators],
            "locality_radius": str(self.locality_radius),
        }

    @classmethod
    def from_json(cls, data: Dict, lattice: Optional[Lattice] = None) -> "StabilizerGroup":
        lattice = lattice or Lattice.from_json(data["lattice"])
        gens = [parse_pauli(text, lattice) for text in data.get("generators", [])]
        return cls(lattice, gens, name=data.get("name", ""))


def _same(a: StabilizerGroup, b: StabilizerGroup):
    if a.lattice != b.lattice:
        raise LatticeMismatchError(f"{a!r} and {b!r} live on different lattices")


def contains(g: StabilizerGroup, p: PauliOp) -> bool:
    if p.lattice != g.lattice:
        raise LatticeMismatchError("operator lives on another lattice")
    return g.space.contains(p.to_vector())


def logicals_equivalent(p: PauliOp, q: PauliOp, g: StabilizerGroup) -> bool:
    """p and q differ by an element of g"""
    return contains(g, multiply(p, q))


def intersect(a: StabilizerGroup, b: StabilizerGroup) -> StabilizerGroup:
    _same(a, b)
    if a.space == b.space:
        return a
    common = subspace_intersection(a.space, b.space)
    return StabilizerGroup.from_basis(a.lattice, common.basis, name="intersection")


def measure(isg: StabilizerGroup, ops: Sequence[PauliOp]) -> StabilizerGroup:
    """Stabilizer group after measuring the operators in order

    Each measured operator joins the group; generators anticommuting with it are
    replaced by products with the first of them, which then leaves the group.
    """
    gens: Dict[int, PauliOp] = dict(enumerate(isg.generators))
    by_qubit: Dict[int, Set[int]] = {}

    def attach(i: int):
        for q in gens[i].support:
            by_qubit.setdefault(q, set()).add(i)

    def detach(i: int):
        for q in gens[i].support:
            by_qubit[q].discard(i)

    for i in gens:
        attach(i)
    next_id = len(gens)
    for m in ops:
        near: Set[int] = set()
        for q in m.support:
            near |= by_qubit.get(q, set())
        anti = sorted(i for i in near if commutes(gens[i], m))
        if anti:
            pivot = gens[anti[0]]
            detach(anti[0])
            del gens[anti[0]]
            for i in anti[1:]:
                detach(i)
                gens[i] = multiply(gens[i], pivot)
                attach(i)
        gens[next_id] = m
        attach(next_id)
        next_id += 1
    return StabilizerGroup(isg.lattice, [gens[i] for i in sorted(gens)], False, isg.name)


@dataclass
class LogicalBasis:
    """Coset representatives of logical operators supported on an interface"""

    interface: Region
    elements: List[PauliOp]
    modulo: StabilizerGroup
    _solver: Optional[SpanSolver] = field(default=None, repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.elements)

    def commutation_matrix(self) -> np.ndarray:
        m = ops_to_matrix(self.elements, self.interface.lattice)
        return symplectic_products(m, m)

    def _stacked(self) -> F2Matrix:
        cols = self.interface.columns()
        rows = self.elements + [
            g for g in self.modulo.generators if g.support <= self.interface.qubits
        ]
        return ops_to_matrix(rows, self.interface.lattice).columns(cols)

    def coordinates(self, p: PauliOp) -> Optional[np.ndarray]:
        """Coefficients of p over the elements modulo interface stabilizers

        None when p is not supported on the interface or not in the span.
        """
        if not p.support <= self.interface.qubits:
            return None
        if self._solver is None:
            self._solver = SpanSolver(self._stacked())
        cols = self.interface.columns()
        target = F2Matrix.from_vectors([p.to_vector()], p.lattice.num_cols).columns(cols)
        coeffs = self._solver.solve(target.row(0))
        if coeffs is None:
            return None
        return coeffs[: len(self.elements)]


def _local_frame(qubits: Sequence[int]) -> Dict[int, int]:
    return {q: i for i, q in enumerate(qubits)}


def _restricted_dense(ops: Sequence[PauliOp], frame: Dict[int, int]) -> np.ndarray:
    out = np.zeros((len(ops), 2 * len(frame)), dtype=np.uint8)
    for r, op in enumerate(ops):
        for q in op.x:
            if q in frame:
                out[r, 2 * frame[q]] = 1
        for q in op.z:
            if q in frame:
                out[r, 2 * frame[q] + 1] = 1
    return out


def _ops_from_local(lattice: Lattice, qubits: Sequence[int], dense: np.ndarray) -> List[PauliOp]:
    ops = []
    for row in dense:
        nz = np.flatnonzero(row)
        xs = [qubits[c // 2] for c in nz if c % 2 == 0]
        zs = [qubits[c // 2] for c in nz if c % 2 == 1]
        ops.append(PauliOp(lattice, xs, zs))
    return ops


def _commutant(g: StabilizerGroup, qubits: Sequence[int]) -> np.ndarray:
    """Paulis on the qubits commuting with every generator, as local dense rows"""
    frame = _local_frame(qubits)
    meeting = [g.generators[i] for i in g.gens_meeting(qubits)]
    if not meeting:
        return np.eye(2 * len(qubits), dtype=np.uint8)
    constraints = _restricted_dense(meeting, frame)
    swapped = np.empty_like(constraints)
    swapped[:, 0::2] = constraints[:, 1::2]
    swapped[:, 1::2] = constraints[:, 0::2]
    return kernel(F2Matrix.from_dense(swapped, 2 * len(qubits))).dense()


def _axis_offsets(lattice: Lattice, positions: np.ndarray, start: int, axis: int) -> np.ndarray:
    period = lattice.periods[axis]
    offsets = positions - start
    if period is not None:
        offsets = offsets % period
    return offsets


def _extent2(lattice: Lattice, qubits: Iterable[int], axis: int) -> Tuple[int, int]:
    """(length, start) of the shortest arc along an axis covering the qubits"""
    pos = np.unique(lattice.coords[list(qubits), axis])
    if pos.size == 0:
        return 0, 0
    period = lattice.periods[axis]
    if period is None or pos.size == 1:
        return int(pos[-1] - pos[0]), int(pos[0])
    gaps = np.diff(np.append(pos, pos[0] + period))
    k = int(np.argmax(gaps))
    start = int(pos[(k + 1) % pos.size])
    return int(period - gaps[k]), start


def centralizer_in_region(
    g: StabilizerGroup,
    region: Region,
    axis: Optional[int] = None,
    window: Optional[float] = None,
    canonical: bool = True,
) -> LogicalBasis:
    """Logical operators of g supported on a region, modulo stabilizers inside it

    With an axis, candidates are drawn from sliding windows of the given length
    along that axis and admitted shortest first, so the basis consists of local
    elements and operators wrapping a periodic region are left out.

    Canonical representatives are fully reduced against the RREF of the stabilizers
    in the region (pivots in qubit order). With an axis each one is reduced only
    against the stabilizers inside its own extent, so it stays local.
    """
    lattice = g.lattice
    qubits = sorted(region.qubits)
    modulo = g.restricted_to(region)
    frame = _local_frame(qubits)
    seed = _restricted_dense(modulo.generators, frame)

    if axis is None:
        candidates = _commutant(g, qubits)
    else:
        window2 = to_doubled(window if window is not None else max(4, 4 * g.locality_radius))
        positions = lattice.coords[qubits, axis]
        blocks = []
        for start in np.unique(positions):
            offsets = _axis_offsets(lattice, positions, int(start), axis)
            sub = [q for q, o in zip(qubits, offsets) if o <= window2]
            local = _commutant(g, sub)
            lifted = np.zeros((local.shape[0], 2 * len(qubits)), dtype=np.uint8)
            cols = [c for q in sub for c in (2 * frame[q], 2 * frame[q] + 1)]
            lifted[:, cols] = local
            blocks.append(lifted)
        candidates = np.vstack(blocks) if blocks else np.zeros((0, 2 * len(qubits)), np.uint8)
        keys = []
        for row in candidates:
            support = [qubits[c // 2] for c in np.flatnonzero(row)]
            length, start = _extent2(lattice, support, axis)
            keys.append((length, start, len(support)))
        order = sorted(range(len(keys)), key=keys.__getitem__)
        candidates = candidates[order]

    cand = F2Matrix.from_dense(candidates, 2 * len(qubits))
    picked = independent_rows(cand, seed=F2Matrix.from_dense(seed, 2 * len(qubits)))
    reps = candidates[picked]
    if canonical and len(picked):
        if axis is None:
            reps = _canonical_reps(reps, seed)
        else:
            reps = np.vstack([
                _canonical_reps(row[None, :], _extent_seed(modulo, qubits, frame, row, axis))
                for row in reps
            ])
    elements = _ops_from_local(lattice, qubits, reps)
    logger.debug(
        "centralizer on %d qubits: %d logicals modulo %d stabilizers",
        len(qubits), len(elements), modulo.dim,
    )
    return LogicalBasis(region, elements, modulo)


def _extent_seed(
    modulo: StabilizerGroup, qubits: Sequence[int], frame: Dict[int, int], row: np.ndarray, axis: int
) -> np.ndarray:
    """Stabilizers inside the axis extent of a local row, in the local frame"""
    lattice = modulo.lattice
    length, start = _extent2(lattice, [qubits[c // 2] for c in np.flatnonzero(row)], axis)
    offsets = _axis_offsets(lattice, lattice.coords[qubits, axis], start, axis)
    inside = Region(lattice, [q for q, o in zip(qubits, offsets) if o <= length])
    return _restricted_dense(modulo.restricted_to(inside).generators, frame)


def _canonical_reps(reps: np.ndarray, seed: np.ndarray) -> np.ndarray:
    """Reduce representatives against the RREF of the stabilizer rows"""
    ncols = reps.shape[1]
    ech = Echelon(ncols, capacity=seed.shape[0] + 1)
    for row in F2Matrix.from_dense(seed, ncols).words:
        ech.add(row)
    packed = F2Matrix.from_dense(reps, ncols)
    reduced = [ech.residue(packed.row(i)) for i in range(packed.nrows)]
    return F2Matrix.from_vectors(reduced, ncols).dense()


def is_centerless(lb: LogicalBasis) -> bool:
    """No nontrivial combination of elements commutes with all elements"""
    k = len(lb.elements)
    if k == 0:
        return True
    return rank(F2Matrix.from_dense(lb.commutation_matrix())) == k
