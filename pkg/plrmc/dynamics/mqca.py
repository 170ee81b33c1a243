"""Period automorphisms of boundary logical algebras and their index

An MqcaMap stores a logical basis laid out along one axis of the lattice and the
matrix of the induced automorphism (row i holds the coordinates of the image of
element i). The index is computed from the information-flow formula

    ind = (dim(F<a ∩ α⁻¹F>b) − dim(F<a ∩ F>b)) / 2

where F<a (F>b) are the cosets representable on the arc [c, a) ((b, d]) and
c, d sit one margin inside the ends of the interface. Positive values mean flow
toward increasing coordinate.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple
import logging

import numpy as np

from plrmc.core.f2core import (
    F2Matrix,
    Subspace,
    eliminate_leading,
    inverse as f2_inverse,
    is_invertible,
    solve_in_span,
    subspace_intersection,
)
from plrmc.core.pauli import (
    Lattice,
    LayeredLattice,
    PauliOp,
    Region,
    format_pauli,
    from_doubled,
    multiply,
    ops_to_matrix,
    to_doubled,
)
from plrmc.core.stab import LogicalBasis, StabilizerGroup, _extent2, centralizer_in_region
from plrmc.dynamics.rev import evolve_logical
from plrmc.exceptions import (
    LatticeMismatchError,
    MarginError,
    NotInvertibleError,
    PeriodMapError,
    PreconditionError,
)
from plrmc.telemetry import telemetry

logger = logging.getLogger(__name__)


def _signed_gap(period: Optional[int], start: int, end: int) -> int:
    delta = end - start
    if period is None:
        return delta
    delta %= period
    return delta - period if delta > period // 2 else delta


@dataclass
class MqcaMap:
    basis: LogicalBasis
    matrix: F2Matrix
    axis: int
    name: str = ""
    range2: int = field(default=-1)
    positions2: List[int] = field(default_factory=list)
    width2: int = 0

    def __post_init__(self):
        k = len(self.basis.elements)
        if self.matrix.shape != (k, k):
            raise PreconditionError(f"matrix of shape {self.matrix.shape} for {k} elements")
        lattice = self.lattice
        arcs = [_extent2(lattice, op.support, self.axis) for op in self.basis.elements]
        self.positions2 = [start for _, start in arcs]
        self.width2 = max((length for length, _ in arcs), default=0)
        if self.range2 < 0:
            self.range2 = _matrix_range(self, self.matrix)

    @property
    def lattice(self) -> Lattice:
        return self.basis.interface.lattice

    @property
    def elements(self) -> List[PauliOp]:
        return self.basis.elements

    @property
    def period2(self) -> Optional[int]:
        return self.lattice.periods[self.axis]

    @property
    def range(self) -> Fraction:
        return from_doubled(self.range2)

    def extent2(self) -> Tuple[int, int]:
        """Doubled (lo, hi) of the interface along the axis"""
        return self.basis.interface.bounds(self.axis)

    def image(self, i: int) -> PauliOp:
        """α(e_i) as a product of basis elements"""
        out = PauliOp(self.lattice)
        for j in np.flatnonzero(self.matrix.dense()[i]):
            out = multiply(out, self.elements[int(j)])
        return out

    def describe(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "elements": len(self.elements),
            "range": str(self.range),
            "width": str(from_doubled(self.width2)),
        }


def _matrix_range(m: MqcaMap, matrix: F2Matrix) -> int:
    """Largest displacement of an image arc beyond its element's arc"""
    lattice, axis = m.lattice, m.axis
    period = lattice.periods[axis]
    dense = matrix.dense()
    worst = 0
    for i, op in enumerate(m.elements):
        support = set()
        for j in np.flatnonzero(dense[i]):
            support ^= set(m.elements[int(j)].support)
        if not support:
            continue
        length, start = _extent2(lattice, op.support, axis)
        length_img, start_img = _extent2(lattice, support, axis)
        shift = _signed_gap(period, start, start_img)
        worst = max(worst, -shift, shift + length_img - length)
    return worst


@dataclass
class IndexResult:
    value: Fraction
    cut_a: Fraction
    cut_b: Fraction
    dims: Tuple[int, int]
    margins_ok: bool
    margin: Fraction

    @property
    def index_times_two(self) -> int:
        return int(self.value * 2)

    @property
    def fraction(self) -> Fraction:
        return self.value

    def to_json(self) -> Dict[str, Any]:
        return {
            "index": str(self.value),
            "index_times_two": self.index_times_two,
            "cut_a": str(self.cut_a),
            "cut_b": str(self.cut_b),
            "dims": list(self.dims),
            "margin": str(self.margin),
            "margins_ok": self.margins_ok,
            "z2": z2_invariant(self.value),
        }


def _interface_frame(m: MqcaMap) -> Tuple[List[int], np.ndarray, np.ndarray]:
    interface = m.basis.interface
    qubits = sorted(interface.qubits)
    cols = interface.columns()
    lattice = m.lattice
    elems = ops_to_matrix(m.elements, lattice).columns(cols).dense()
    mods = [g for g in m.basis.modulo.generators if g.support <= interface.qubits]
    modrows = ops_to_matrix(mods, lattice).columns(cols).dense()
    return qubits, elems, modrows


def representable_subspace(m: MqcaMap, lo: Fraction, hi: Fraction) -> Subspace:
    """Coefficient vectors of cosets with a representative on the closed arc [lo, hi]"""
    return _representable2(m, to_doubled(lo), to_doubled(hi))


def _representable2(m: MqcaMap, lo2: int, hi2: int) -> Subspace:
    k = len(m.elements)
    qubits, elems, modrows = _interface_frame(m)
    pos = m.lattice.coords[qubits, m.axis]
    inside = (pos >= lo2) & (pos <= hi2)
    out_cols = [c for i, q in enumerate(qubits) if not inside[i] for c in (2 * i, 2 * i + 1)]
    in_cols = [c for i, q in enumerate(qubits) if inside[i] for c in (2 * i, 2 * i + 1)]
    top = np.hstack([elems[:, out_cols], elems[:, in_cols], np.eye(k, dtype=np.uint8)])
    bottom = np.hstack(
        [modrows[:, out_cols], modrows[:, in_cols], np.zeros((modrows.shape[0], k), np.uint8)]
    )
    block = F2Matrix.from_dense(np.vstack([top, bottom]), top.shape[1])
    _, tail = eliminate_leading(block, len(out_cols))
    coeffs = tail.dense()[:, top.shape[1] - k:] if tail.nrows else np.zeros((0, k), np.uint8)
    return Subspace(k, F2Matrix.from_dense(coeffs, k))


def mqca_index(
    m: MqcaMap,
    a: Optional[Fraction] = None,
    b: Optional[Fraction] = None,
    margin: Optional[Fraction] = None,
) -> IndexResult:
    """Index of the map from the flow formula at cuts b < a (natural units)"""
    lo2, hi2 = m.extent2()
    gap2 = m.range2 + m.width2
    margin2 = max(gap2, 2) if margin is None else to_doubled(margin)
    c2, d2 = lo2 + margin2, hi2 - margin2
    if a is None or b is None:
        mid = (c2 + d2) // 2
        b2, a2 = mid - gap2, mid + gap2
    else:
        a2, b2 = to_doubled(a), to_doubled(b)
    problems = []
    if a2 - b2 < gap2:
        problems.append(f"cuts {from_doubled(b2)} and {from_doubled(a2)} are closer than range + width")
    if b2 - c2 < gap2:
        problems.append("cut b is too close to the low margin")
    if d2 - a2 < gap2:
        problems.append("cut a is too close to the high margin")
    if problems:
        raise MarginError("; ".join(problems))

    with telemetry.span("plrmc.index", {"plrmc.map": m.name, "plrmc.elements": len(m.elements)}):
        below_a = _representable2(m, c2, a2 - 1)
        above_b = _representable2(m, b2 + 1, d2)
        inv = f2_inverse(m.matrix)
        pulled = Subspace(len(m.elements), above_b.basis @ inv) if above_b.dim else above_b
        flowing = subspace_intersection(below_a, pulled).dim
        static = subspace_intersection(below_a, above_b).dim
    value = Fraction(flowing - static, 2)
    logger.info(
        "index of %s: %s (cuts b=%s a=%s, dims %d/%d)",
        m.name or "map", value, from_doubled(b2), from_doubled(a2), flowing, static,
    )
    return IndexResult(
        value, from_doubled(a2), from_doubled(b2), (flowing, static), True, from_doubled(margin2)
    )


def z2_invariant(value: Fraction) -> int:
    doubled = Fraction(value) * 2
    if doubled.denominator != 1:
        raise PreconditionError(f"{value} is not a half-integer")
    return int(doubled) % 2


def _pull_into(p: PauliOp, g: StabilizerGroup, region: Region, reach2: int) -> Optional[PauliOp]:
    """Multiply p by nearby stabilizers so that it is supported in the region"""
    stray = p.support - region.qubits
    if not stray:
        return p
    lattice = p.lattice
    near = frozenset(int(q) for q in np.flatnonzero(lattice.within2(p.support, reach2)))
    gens = [g.generators[i] for i in g.gens_meeting(near) if g.generators[i].support <= near]
    if not gens:
        return None
    touched = {q for op in gens for q in op.support} | stray
    outside = sorted(q for q in touched if q not in region.qubits)
    cols = [c for q in outside for c in (2 * q, 2 * q + 1)]
    basis = ops_to_matrix(gens, lattice).columns(cols)
    target = F2Matrix.from_vectors([p.to_vector()], lattice.num_cols).columns(cols)
    coeffs = solve_in_span(basis, target.row(0))
    if coeffs is None:
        return None
    out = p
    for c, op in zip(coeffs, gens):
        if c:
            out = multiply(out, op)
    return out


def trace_logical(seq, p: PauliOp, cycles: int = 1) -> List[PauliOp]:
    """The dressed operator after each step, starting with p itself"""
    out = [p]
    cur = p
    for _ in range(cycles):
        for t, a, b in seq.transitions():
            cur = evolve_logical(cur, a, b, seq.conjugates(t))
            out.append(cur)
    return out


def period_map(
    seq,
    interface: Optional[Region] = None,
    axis: Optional[int] = None,
    window: Optional[Fraction] = None,
) -> MqcaMap:
    """Automorphism induced by one period of the circuit on the interface logicals"""
    interface = interface if interface is not None else seq.interface
    axis = axis if axis is not None else seq.axis
    if interface is None or axis is None:
        raise PreconditionError(f"{seq.name or 'sequence'} has no interface to analyse")
    if not seq.periodic:
        raise PreconditionError("period maps need a periodic sequence")
    window = window if window is not None else seq.window
    attributes = {"plrmc.model": seq.name, "plrmc.interface_qubits": len(interface)}
    with telemetry.span("plrmc.period_map", attributes):
        basis = centralizer_in_region(seq.base, interface, axis=axis, window=window)
        order = sorted(
            range(len(basis.elements)),
            key=lambda i: _extent2(seq.lattice, basis.elements[i].support, axis)[::-1],
        )
        basis = LogicalBasis(interface, [basis.elements[i] for i in order], basis.modulo)
        reach2 = 4 * max(g.radius2 for g in seq.steps) + 2 * to_doubled(seq.radius)
        rows = []
        for p in basis.elements:
            image = p
            for t, a, b in seq.transitions():
                image = evolve_logical(image, a, b, seq.conjugates(t))
            pulled = _pull_into(image, seq.base, interface, reach2)
            if pulled is None:
                raise PeriodMapError(
                    f"image of {format_pauli(p)} leaves the interface: {format_pauli(image)}"
                )
            coeffs = basis.coordinates(pulled)
            if coeffs is None:
                raise PeriodMapError(
                    f"image of {format_pauli(p)} is not a local logical of the interface"
                )
            rows.append(coeffs)
        k = len(basis.elements)
        matrix = F2Matrix.from_dense(np.array(rows, dtype=np.uint8).reshape(k, k), k)
        if not is_invertible(matrix):
            logger.error("period map of %s is singular", seq.name or "sequence")
            raise PeriodMapError("period map is not invertible on the interface logicals")
    m = MqcaMap(basis, matrix, axis, name=seq.name)
    logger.info(
        "period map of %s: %d logicals, range %s", seq.name or "sequence", k, m.range
    )
    return m


def identity_map(basis: LogicalBasis, axis: int, name: str = "identity") -> MqcaMap:
    k = len(basis.elements)
    return MqcaMap(basis, F2Matrix.identity(k) if k else F2Matrix.zeros(0, 0), axis, name)


def _same_basis(m1: MqcaMap, m2: MqcaMap):
    if m1.lattice != m2.lattice or m1.elements != m2.elements or m1.axis != m2.axis:
        raise LatticeMismatchError("maps act on different logical bases")


def compose(m1: MqcaMap, m2: MqcaMap) -> MqcaMap:
    """m2 ∘ m1: apply m1 first"""
    _same_basis(m1, m2)
    return MqcaMap(m1.basis, m1.matrix @ m2.matrix, m1.axis, f"{m2.name}∘{m1.name}")


def inverse(m: MqcaMap) -> MqcaMap:
    return MqcaMap(m.basis, f2_inverse(m.matrix), m.axis, f"{m.name}⁻¹")


def conjugate(m: MqcaMap, u: F2Matrix, max_shift: Optional[Fraction] = None) -> MqcaMap:
    """u α u⁻¹ for a basis automorphism u (rows: images of the elements)"""
    k = len(m.elements)
    if u.shape != (k, k):
        raise PreconditionError(f"conjugating matrix must be {k}x{k}")
    try:
        u_inv = f2_inverse(u)
    except NotInvertibleError as e:
        raise PreconditionError(f"conjugating map is not invertible: {e}") from e
    shift2 = _matrix_range(m, u)
    if max_shift is not None and shift2 > to_doubled(max_shift):
        raise PreconditionError(f"conjugating map moves elements by {from_doubled(shift2)}")
    matrix = u_inv @ m.matrix @ u
    out = MqcaMap(m.basis, matrix, m.axis, f"{m.name}^u")
    out.range2 = max(out.range2, m.range2 + 2 * shift2)
    return out


def tensor(m1: MqcaMap, m2: MqcaMap, name: str = "") -> MqcaMap:
    """Both maps side by side on a two-layer lattice, basis interleaved by position"""
    if m1.lattice.periods[m1.axis] != m2.lattice.periods[m2.axis]:
        raise LatticeMismatchError("tensor factors need the same period along their axis")
    if m1.axis != m2.axis:
        raise LatticeMismatchError("tensor factors need the same interface axis")
    layered = LayeredLattice([m1.lattice, m2.lattice])
    elements = [layered.embed(op, 0) for op in m1.elements] + [
        layered.embed(op, 1) for op in m2.elements
    ]
    modulo = StabilizerGroup(
        layered,
        [layered.embed(g, 0) for g in m1.basis.modulo.generators]
        + [layered.embed(g, 1) for g in m2.basis.modulo.generators],
        check_abelian=False,
    )
    interface = layered.embed_region(m1.basis.interface, 0) | layered.embed_region(
        m2.basis.interface, 1
    )
    k1, k2 = len(m1.elements), len(m2.elements)
    block = np.zeros((k1 + k2, k1 + k2), dtype=np.uint8)
    block[:k1, :k1] = m1.matrix.dense()
    block[k1:, k1:] = m2.matrix.dense()
    axis = m1.axis + 1
    keys = [
        (_extent2(layered, op.support, axis)[1], 0 if i < k1 else 1, i)
        for i, op in enumerate(elements)
    ]
    order = [key[2] for key in sorted(keys)]
    block = block[np.ix_(order, order)]
    basis = LogicalBasis(interface, [elements[i] for i in order], modulo)
    return MqcaMap(
        basis,
        F2Matrix.from_dense(block, k1 + k2),
        axis,
        name or f"{m1.name}⊗{m2.name}",
        range2=max(m1.range2, m2.range2),
    )
