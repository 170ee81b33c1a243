"""Reversibility of stabilizer-group transitions and logical operator evolution"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Set, Tuple
import itertools
import logging

import numpy as np

from plrmc.core.f2core import (
    F2Matrix,
    Subspace,
    independent_rows,
    kernel,
    left_kernel,
    pack_dense,
    rank,
    solve_in_span,
    subspace_intersection,
    subspace_sum,
    symplectic_products,
    unpack_words,
)
from plrmc.core.pauli import (
    LayeredLattice,
    PauliOp,
    Region,
    commutes,
    format_pauli,
    from_doubled,
    multiply,
    ops_to_matrix,
    to_doubled,
)
from plrmc.core.stab import (
    StabilizerGroup,
    _commutant,
    _extent2,
    _local_frame,
    _ops_from_local,
    _restricted_dense,
    contains,
    intersect,
)
from plrmc.exceptions import (
    LatticeMismatchError,
    NotReversibleError,
    PreconditionError,
    WindowTooSmallError,
)

logger = logging.getLogger(__name__)


@dataclass
class ConjugateBases:
    """Paired bases of a/S and b/S with commutes(a_side[i], b_side[j]) == δ_ij"""

    a_side: List[PauliOp]
    b_side: List[PauliOp]
    radius2: int
    pairing: List[int] = field(default_factory=list)
    _b_index: Optional[Dict[int, List[int]]] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if len(self.a_side) != len(self.b_side):
            raise PreconditionError("conjugate bases need equally many elements per side")
        if not self.pairing:
            self.pairing = list(range(len(self.a_side)))

    @property
    def radius(self) -> Fraction:
        return from_doubled(self.radius2)

    def __len__(self) -> int:
        return len(self.a_side)

    def b_partners(self, p: PauliOp) -> List[int]:
        """Indices j with p anticommuting with b_side[j]"""
        if self._b_index is None:
            index: Dict[int, List[int]] = {}
            for j, op in enumerate(self.b_side):
                for q in op.support:
                    index.setdefault(q, []).append(j)
            self._b_index = index
        near = set()
        for q in p.support:
            near.update(self._b_index.get(q, ()))
        return sorted(j for j in near if commutes(p, self.b_side[j]))

    def is_valid(self) -> bool:
        if not self.a_side:
            return True
        lattice = self.a_side[0].lattice
        m = symplectic_products(
            ops_to_matrix(self.a_side, lattice), ops_to_matrix(self.b_side, lattice)
        )
        return bool(np.array_equal(m, np.eye(len(self.a_side), dtype=np.uint8)))

    def reversed(self) -> "ConjugateBases":
        """The same pairs read as a transition from b to a"""
        return ConjugateBases(list(self.b_side), list(self.a_side), self.radius2)


@dataclass
class TransitionReport:
    reversible: bool
    locally_reversible: bool
    radius_used: Optional[Fraction] = None
    witness: Optional[PauliOp] = None
    witness_side: Optional[str] = None
    quotient_dims: Tuple[int, int] = (0, 0)
    matrix_condition: bool = True
    enlargement_free: bool = True
    conjugate_bases: Optional[ConjugateBases] = field(default=None, repr=False)

    def to_json(self) -> Dict:
        return {
            "reversible": self.reversible,
            "locally_reversible": self.locally_reversible,
            "radius_used": None if self.radius_used is None else str(self.radius_used),
            "witness": None if self.witness is None else format_pauli(self.witness),
            "witness_side": self.witness_side,
            "quotient_dims": list(self.quotient_dims),
        }


def commutation_matrix(ops_a: Sequence[PauliOp], ops_b: Sequence[PauliOp]) -> np.ndarray:
    if not ops_a or not ops_b:
        return np.zeros((len(ops_a), len(ops_b)), dtype=np.uint8)
    lattice = ops_a[0].lattice
    return symplectic_products(ops_to_matrix(ops_a, lattice), ops_to_matrix(ops_b, lattice))


def _local_order(ops: Sequence[PauliOp]) -> List[PauliOp]:
    return sorted(ops, key=lambda g: (g.diameter2(), min(g.support), g.weight))


def _quotient_ops(g: StabilizerGroup, common: StabilizerGroup) -> List[PauliOp]:
    """Generators of g forming a basis of g modulo the common subgroup, local ones first"""
    pool = _local_order(g.generators)
    if not pool:
        return []
    picked = independent_rows(ops_to_matrix(pool, g.lattice), seed=common.space.basis)
    return [pool[i] for i in picked]


def _enlargement_witness(a: StabilizerGroup, b: StabilizerGroup) -> Optional[PauliOp]:
    """An element of a commuting with all of b but not in b"""
    if not a.generators:
        return None
    if not b.generators:
        return a.generators[0]
    comm = symplectic_products(a.matrix, b.matrix)
    combos = left_kernel(F2Matrix.from_dense(comm, b.matrix.nrows))
    if combos.nrows == 0:
        return None
    elements = combos @ a.matrix
    for i in range(elements.nrows):
        if not b.space.contains(elements.row(i)):
            return PauliOp.from_vector(a.lattice, elements.row(i))
    return None


def is_reversible_pair(
    a: StabilizerGroup,
    b: StabilizerGroup,
    radius: Optional[float] = None,
    pinned: Optional[ConjugateBases] = None,
) -> TransitionReport:
    """Check the reversibility conditions of a transition a → b

    The commutation matrix between bases of a/S and b/S (S = a ∩ b) must be
    square and invertible; independently no element of either group may commute
    with the other group without belonging to it. With a radius, conjugate bases
    of that radius are searched as well. Pinned bases replace the search: they are
    checked and used as given.
    """
    if a.lattice != b.lattice:
        raise LatticeMismatchError("transition between different lattices")
    if a.space == b.space:
        # idle step
        report = TransitionReport(True, radius is not None)
        if radius is not None:
            report.radius_used = Fraction(0)
            report.conjugate_bases = ConjugateBases([], [], 0)
        return report
    common = intersect(a, b)
    a_ops = _quotient_ops(a, common)
    b_ops = _quotient_ops(b, common)
    m = commutation_matrix(a_ops, b_ops)
    square = len(a_ops) == len(b_ops)
    matrix_ok = square and rank(F2Matrix.from_dense(m, len(b_ops))) == len(a_ops)

    witness, side = _enlargement_witness(a, b), "a"
    if witness is None:
        witness, side = _enlargement_witness(b, a), "b"
    enlargement_free = witness is None
    if matrix_ok != enlargement_free:
        logger.error(
            "reversibility conditions disagree: matrix=%s enlargement_free=%s",
            matrix_ok, enlargement_free,
        )
    report = TransitionReport(
        reversible=matrix_ok and enlargement_free,
        locally_reversible=False,
        witness=witness,
        witness_side=side if witness is not None else None,
        quotient_dims=(len(a_ops), len(b_ops)),
        matrix_condition=matrix_ok,
        enlargement_free=enlargement_free,
    )
    if report.reversible and radius is not None:
        if pinned is not None:
            cb = pinned if _pinned_ok(a, b, pinned, common, to_doubled(radius)) else None
        else:
            cb = _search_conjugates(a, a_ops, b, to_doubled(radius))
        if cb is not None:
            report.locally_reversible = True
            report.radius_used = cb.radius
            report.conjugate_bases = cb
    return report


def conjugate_bases_valid(
    a: StabilizerGroup, b: StabilizerGroup, cb: ConjugateBases,
    common: Optional[StabilizerGroup] = None,
) -> bool:
    """cb pairs a basis of a modulo a ∩ b with a basis of b modulo a ∩ b"""
    common = common if common is not None else intersect(a, b)
    size = a.dim - common.dim
    if len(cb) != size or b.dim - common.dim != size:
        return False
    if not all(contains(a, p) for p in cb.a_side):
        return False
    if not all(contains(b, q) for q in cb.b_side):
        return False
    return cb.is_valid()


def _pinned_ok(
    a: StabilizerGroup, b: StabilizerGroup, cb: ConjugateBases, common: StabilizerGroup,
    radius2: int,
) -> bool:
    if not conjugate_bases_valid(a, b, cb, common):
        logger.error("pinned conjugate bases do not pair %s with %s", a.name, b.name)
        return False
    if cb.radius2 > radius2:
        logger.warning("pinned conjugate bases need radius %s", cb.radius)
        return False
    return True


def _search_conjugates(
    a: StabilizerGroup, a_ops: List[PauliOp], b: StabilizerGroup, radius2: int
) -> Optional[ConjugateBases]:
    lattice = a.lattice
    a_index: Dict[int, List[int]] = {}
    for i, op in enumerate(a_ops):
        for q in op.support:
            a_index.setdefault(q, []).append(i)
    b_side: List[PauliOp] = []
    for i, target in enumerate(a_ops):
        near = lattice.within2(target.support, radius2)
        allowed = frozenset(int(q) for q in np.flatnonzero(near))
        local = [
            b.generators[j]
            for j in b.gens_meeting(allowed)
            if b.generators[j].support <= allowed
        ]
        related = sorted({k for op in local for q in op.support for k in a_index.get(q, ())})
        if i not in related or not local:
            logger.warning(
                "no conjugate for %s within radius %s", format_pauli(target), from_doubled(radius2)
            )
            return None
        comm = commutation_matrix(local, [a_ops[k] for k in related])
        want = np.zeros(len(related), dtype=np.uint8)
        want[related.index(i)] = 1
        coeffs = solve_in_span(
            F2Matrix.from_dense(comm, len(related)), pack_dense(want, len(related))
        )
        if coeffs is None:
            logger.warning(
                "no conjugate for %s within radius %s", format_pauli(target), from_doubled(radius2)
            )
            return None
        partner = PauliOp(lattice)
        for c, op in zip(coeffs, local):
            if c:
                partner = multiply(partner, op)
        b_side.append(partner)
    used = max((op.diameter2() for op in a_ops + b_side), default=0)
    return ConjugateBases(list(a_ops), b_side, used)


def find_conjugate_bases(
    a: StabilizerGroup, b: StabilizerGroup, radius: float
) -> Optional[ConjugateBases]:
    """Local conjugate bases for a → b, or None when none is found at this radius

    The a side consists of generators of a spanning a modulo a ∩ b, shortest
    first; each partner is a product of b-generators inside the radius-neighborhood
    of its a-element.
    """
    if a.lattice != b.lattice:
        raise LatticeMismatchError("transition between different lattices")
    report = is_reversible_pair(a, b)
    if not report.reversible:
        raise NotReversibleError(
            f"pair is not reversible (witness {format_pauli(report.witness) if report.witness else '-'})"
        )
    common = intersect(a, b)
    return _search_conjugates(a, _quotient_ops(a, common), b, to_doubled(radius))


def evolve_logical(
    p: PauliOp, a: StabilizerGroup, b: StabilizerGroup, cb: ConjugateBases,
    canonical: bool = True,
) -> PauliOp:
    """Dress a logical of a into the equivalent logical of b

    p is multiplied by the a-side elements whose b-side partners anticommute
    with it; the result commutes with both groups. The canonical representative
    is reduced modulo the elements of a ∩ b generated within 2·radius of p.
    """
    if a.anticommuting(p):
        raise PreconditionError(f"{format_pauli(p)} is not a logical operator of the source group")
    out = p
    for j in cb.b_partners(p):
        out = multiply(out, cb.a_side[j])
    if canonical and not out.is_identity():
        out = _reduce_near(out, p, a, b, cb.radius2)
    return out


def _local_span(g: StabilizerGroup, near: Set[int], frame: Dict[int, int]) -> Subspace:
    gens = [g.generators[i] for i in g.gens_meeting(near) if g.generators[i].support <= near]
    return Subspace.span(F2Matrix.from_dense(_restricted_dense(gens, frame), 2 * len(frame)))


def _reduce_near(
    out: PauliOp, p: PauliOp, a: StabilizerGroup, b: StabilizerGroup, radius2: int
) -> PauliOp:
    """RREF residue of out modulo the common elements generated near p"""
    lattice = p.lattice
    near = set(out.support)
    if not p.is_identity():
        near.update(int(q) for q in np.flatnonzero(lattice.within2(p.support, 2 * radius2)))
    qubits = sorted(near)
    frame = _local_frame(qubits)
    common = subspace_intersection(_local_span(a, near, frame), _local_span(b, near, frame))
    if common.dim == 0:
        return out
    ncols = 2 * len(qubits)
    reduced = common.residue(pack_dense(_restricted_dense([out], frame)[0], ncols))
    return _ops_from_local(lattice, qubits, unpack_words(reduced, ncols)[None, :])[0]


def is_outcome_random(p: PauliOp, isg: StabilizerGroup) -> bool:
    """Measuring p on a state stabilized by isg gives a uniformly random outcome"""
    return bool(isg.anticommuting(p))


def _commutant_space(ops: Sequence[PauliOp], lattice) -> Subspace:
    m = ops_to_matrix(list(ops), lattice)
    dense = m.dense()
    swapped = np.empty_like(dense)
    swapped[:, 0::2] = dense[:, 1::2]
    swapped[:, 1::2] = dense[:, 0::2]
    return Subspace.span(kernel(F2Matrix.from_dense(swapped, lattice.num_cols)))


def has_shared_logicals(a: StabilizerGroup, b: StabilizerGroup) -> bool:
    """Every logical of a is a-equivalent to one commuting with b, and vice versa"""
    lattice = a.lattice
    both = _commutant_space(a.generators + b.generators, lattice)
    ca = _commutant_space(a.generators, lattice)
    cb = _commutant_space(b.generators, lattice)
    return subspace_sum(both, a.space) == ca and subspace_sum(both, b.space) == cb


@dataclass
class TopologicalReport:
    topological: bool
    condition: Optional[str] = None
    witness: Optional[PauliOp] = None
    checked_boxes: int = 0
    checked_operators: int = 0

    def __bool__(self) -> bool:
        return self.topological


def _check_margins(g: StabilizerGroup, bulk: Region, ell2: int):
    lattice = g.lattice
    skip = {0} if isinstance(lattice, LayeredLattice) else set()
    for axis, period in enumerate(lattice.periods):
        if period is not None or axis in skip:
            continue
        lo, hi = bulk.bounds(axis)
        edge_lo = int(lattice.coords[:, axis].min())
        edge_hi = int(lattice.coords[:, axis].max())
        if lo - edge_lo < 2 * ell2 or edge_hi - hi < 2 * ell2:
            raise WindowTooSmallError(
                f"bulk is closer than 2ℓ to the window edge along axis {axis}"
            )


def _box_shapes(lattice, ell2: int, max_box: int) -> List[Tuple[int, ...]]:
    """Doubled side lengths of every axis-aligned test box up to max_box·ℓ per axis

    The layer axis of a layered lattice always spans the largest side.
    """
    ndim = lattice.coords.shape[1]
    sides = [range(1, max_box + 1)] * ndim
    if isinstance(lattice, LayeredLattice):
        sides[0] = range(max_box, max_box + 1)
    return [tuple(k * ell2 for k in shape) for shape in itertools.product(*sides)]


def _box(lattice, anchor: Tuple[int, ...], sides2: Sequence[int], allowed: frozenset) -> List[int]:
    offsets = lattice.coords - np.array(anchor)
    for axis, period in enumerate(lattice.periods):
        if period is not None:
            offsets[:, axis] %= period
    mask = ((offsets >= 0) & (offsets <= np.array(sides2))).all(axis=1)
    return [int(q) for q in np.flatnonzero(mask) if int(q) in allowed]


def _local_paulis(lattice, box: Sequence[int], max_weight: int):
    """Every Pauli on the box of weight 1..max_weight, in a fixed order"""
    for weight in range(1, min(max_weight, len(box)) + 1):
        for qubits in itertools.combinations(box, weight):
            for letters in itertools.product("XYZ", repeat=weight):
                yield PauliOp.from_letters(lattice, dict(zip(qubits, letters)))


def _in_local_span(g: StabilizerGroup, vec_ops: List[PauliOp], region_qubits: frozenset) -> int:
    """Index of the first operator not generated by generators inside the region, or -1"""
    gens = [
        g.generators[i] for i in g.gens_meeting(region_qubits)
        if g.generators[i].support <= region_qubits
    ]
    space = Subspace.span(ops_to_matrix(gens, g.lattice))
    for k, op in enumerate(vec_ops):
        if not space.contains(op.to_vector()):
            return k
    return -1


def is_topological(
    g: StabilizerGroup,
    bulk: Region,
    ell: float,
    max_box: int = 3,
    max_weight: int = 2,
) -> TopologicalReport:
    """Check the two topological-code conditions on test regions inside the bulk

    (i) logical operators of every rectangular test box up to max_box·ℓ per side
    are generated by stabilizer generators near the box; (ii) every Pauli of
    weight up to max_weight on an ℓ box is cleaned up near the hull of the
    generators it violates. Boxes and operators are visited in a fixed order,
    so the witness is the first failure in that order.
    """
    lattice = g.lattice
    ell2 = to_doubled(ell)
    _check_margins(g, bulk, ell2)
    report = TopologicalReport(True)
    bulk_q = frozenset(bulk.qubits)

    for q in sorted(bulk_q):
        for letter in ("X", "Z", "Y"):
            p = PauliOp.single(lattice, letter, q)
            report.checked_operators += 1
            if not g.anticommuting(p) and not contains(g, p):
                return TopologicalReport(False, "local_logical", p, 0, report.checked_operators)

    anchors = sorted({lattice.site_of(q) for q in bulk_q})
    for sides2 in _box_shapes(lattice, ell2, max_box):
        for anchor in anchors:
            box = _box(lattice, anchor, sides2, bulk_q)
            if not box:
                continue
            report.checked_boxes += 1
            logicals = _commutant(g, box)
            ops = [
                PauliOp(
                    lattice,
                    [box[c // 2] for c in np.flatnonzero(row) if c % 2 == 0],
                    [box[c // 2] for c in np.flatnonzero(row) if c % 2 == 1],
                )
                for row in logicals
            ]
            near = frozenset(int(q) for q in np.flatnonzero(lattice.within2(box, ell2)))
            bad = _in_local_span(g, ops, near)
            if bad >= 0:
                report.topological = False
                report.condition = "local_logical"
                report.witness = ops[bad]
                return report

    seen: Set[PauliOp] = set()
    cube = _box_shapes(lattice, ell2, 1)[0]
    for anchor in anchors:
        for p in _local_paulis(lattice, _box(lattice, anchor, cube, bulk_q), max_weight):
            if p in seen:
                continue
            seen.add(p)
            report.checked_operators += 1
            violated = [g.generators[i] for i in g.anticommuting(p)]
            if not violated:
                if not contains(g, p):
                    return TopologicalReport(
                        False, "local_logical", p, report.checked_boxes, report.checked_operators
                    )
                continue
            hull = _hull(lattice, [q for op in violated for q in op.support], ell2)
            if not p.support - hull:
                continue
            reach = frozenset(
                int(q) for q in np.flatnonzero(lattice.within2(p.support | hull, 2 * ell2))
            )
            if not _cleanable(g, p, hull, reach):
                return TopologicalReport(
                    False, "not_annihilable", p, report.checked_boxes, report.checked_operators
                )
    logger.info(
        "topological check passed: %d boxes, %d operators",
        report.checked_boxes, report.checked_operators,
    )
    return report


def _hull(lattice, qubits: List[int], ell2: int) -> frozenset:
    """Qubits in the axis-aligned hull of the given qubits, widened by ell2"""
    mask = np.ones(lattice.num_qubits, dtype=bool)
    for axis, period in enumerate(lattice.periods):
        length, start = _extent2(lattice, qubits, axis)
        offsets = lattice.coords[:, axis] - (start - ell2)
        if period is not None:
            offsets = offsets % period
        mask &= (offsets >= 0) & (offsets <= length + 2 * ell2)
    return frozenset(int(q) for q in np.flatnonzero(mask))


def _cleanable(g: StabilizerGroup, p: PauliOp, hull: frozenset, reach: frozenset) -> bool:
    """Some product of generators inside reach agrees with p outside the hull"""
    gens = [
        g.generators[i] for i in g.gens_meeting(reach) if g.generators[i].support <= reach
    ]
    cols = [c for q in sorted(reach - hull) for c in (2 * q, 2 * q + 1)]
    if not cols:
        return True
    lattice = g.lattice
    space = Subspace.span(ops_to_matrix(gens, lattice).columns(cols))
    target = F2Matrix.from_vectors([p.to_vector()], lattice.num_cols).columns(cols)
    return space.contains(target.row(0))
