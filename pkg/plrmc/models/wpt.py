"""Wen plaquette model driven by a measurement translation circuit, with its boundaries

Data qubits sit at integer (x, y) and ancillas at (x, y + 1/2). Every column runs
the four-step teleportation circuit, which moves the plaquette stabilizers down by
half a unit every two steps and moves logical strings down by one unit per cycle.

Window conventions:

* ``bulk_torus``: both axes periodic, ``width`` columns and ``height`` rows.
* ``right_R``, ``right_R_reversed``: ``width`` bulk columns x = -(width-1) .. 0
  followed by trivial columns x = 1, 2; y periodic with period ``height``. The
  interface is the band around x = 0 and logicals are laid out along y.
* ``top_T``, ``top_T_prime``, ``bottom_B``, ``bottom_B_prime``: x periodic with
  period ``width``; a strip of ``height`` bulk rows with a top boundary at y = 0
  and a bottom boundary at y = -height. The bottom cycle runs one step ahead of
  the textbook one so that both edges idle on the same transition.
"""

from enum import Enum
from fractions import Fraction
from typing import Dict, Iterable, List, Sequence, Tuple
import logging

from plrmc.core.pauli import Lattice, LatticeKind, PauliOp, Region
from plrmc.core.stab import StabilizerGroup
from plrmc.dynamics.rev import ConjugateBases
from plrmc.exceptions import PreconditionError, WindowTooSmallError
from plrmc.models.sequence import IsgSequence

logger = logging.getLogger(__name__)

HALF = Fraction(1, 2)
MIN_EXTENT = 6


class WptBoundary(str, Enum):
    BULK_TORUS = "bulk_torus"
    RIGHT_R = "right_R"
    RIGHT_R_REVERSED = "right_R_reversed"
    TOP_T = "top_T"
    TOP_T_PRIME = "top_T_prime"
    BOTTOM_B = "bottom_B"
    BOTTOM_B_PRIME = "bottom_B_prime"


Term = Tuple[str, Fraction, Fraction]


def _op(lattice: Lattice, *terms: Term) -> PauliOp:
    letters: Dict[int, str] = {}
    for letter, x, y in terms:
        q = lattice.qubit(x, y)
        if q in letters:
            raise WindowTooSmallError(f"operator wraps onto itself at ({x}, {y})")
        letters[q] = letter
    return PauliOp.from_letters(lattice, letters)


def _half_rows(lo: Fraction, hi: Fraction) -> List[Fraction]:
    """lo, lo + 1/2, …, hi"""
    count = int((Fraction(hi) - Fraction(lo)) * 2) + 1
    return [Fraction(lo) + HALF * k for k in range(max(count, 0))]


def plaquette(lattice: Lattice, t: int, x: Fraction, y: Fraction) -> PauliOp:
    """P_t(x, y); P_t+2(x, y) = P_t(x, y - 1/2)"""
    if not 0 <= t < 4:
        raise PreconditionError(f"plaquette step must be 0..3, got {t}")
    x, y = Fraction(x), Fraction(y) - HALF * (t // 2)
    if t % 2 == 0:
        return _op(lattice, ("Z", x, y), ("X", x + 1, y), ("X", x, y + 1), ("Z", x + 1, y + 1))
    return _op(
        lattice,
        ("Z", x, y - HALF), ("Z", x, y), ("X", x + 1, y),
        ("X", x, y + 1), ("Z", x + 1, y + HALF), ("Z", x + 1, y + 1),
    )


def column_step(lattice: Lattice, t: int, x: Fraction, y: Fraction) -> PauliOp:
    """Teleportation measurement of step t anchored at data row y of column x"""
    x, y = Fraction(x), Fraction(y)
    if t == 0:
        return _op(lattice, ("Z", x, y + HALF))
    if t == 1:
        return _op(lattice, ("X", x, y - HALF), ("X", x, y))
    if t == 2:
        return _op(lattice, ("Z", x, y))
    if t == 3:
        return _op(lattice, ("X", x, y), ("X", x, y + HALF))
    raise PreconditionError(f"teleportation step must be 0..3, got {t}")


def _singles(lattice: Lattice, letter: str, qubits: Iterable[int]) -> List[PauliOp]:
    return [PauliOp.single(lattice, letter, q) for q in qubits]


def _where(lattice: Lattice, predicate) -> List[int]:
    return [q for q in range(lattice.num_qubits) if predicate(*_natural(lattice, q))]


def _natural(lattice: Lattice, q: int) -> Tuple[Fraction, ...]:
    return tuple(Fraction(int(c), 2) for c in lattice.coords[q])


def _check_extent(width: int, height: int):
    if width < MIN_EXTENT or height < MIN_EXTENT:
        raise WindowTooSmallError(
            f"WPT windows need width and height >= {MIN_EXTENT}, got {width}x{height}"
        )


# bulk torus


def _build_bulk(width: int, height: int) -> IsgSequence:
    lattice = Lattice.grid(
        [range(width), _half_rows(0, height - HALF)],
        periods=(width, height), name=f"wpt-torus{width}x{height}",
    )
    steps = []
    for t in range(4):
        gens = [plaquette(lattice, t, x, y) for x in range(width) for y in range(height)]
        gens += [column_step(lattice, t, x, y) for x in range(width) for y in range(height)]
        steps.append(StabilizerGroup(lattice, gens, name=f"wpt[{t}]"))
    seq = IsgSequence(lattice, steps, radius=Fraction(1), name="wpt-bulk_torus")
    seq.metadata["string_row"] = 0
    return seq


def y_string(lattice: Lattice, y: Fraction, columns: Sequence[int]) -> PauliOp:
    """∏_x Y_(x, y) across the given columns"""
    return PauliOp.from_letters(lattice, {lattice.qubit(x, y): "Y" for x in columns})


# vertical (right) boundary


def _right_lattice(width: int, height: int) -> Lattice:
    return Lattice.grid(
        [range(-(width - 1), 3), _half_rows(0, height - HALF)],
        periods=(None, height), name=f"wpt-right{width}x{height}",
    )


def _right_step(lattice: Lattice, t: int, width: int, height: int) -> List[PauliOp]:
    left = -(width - 1)
    gens = [plaquette(lattice, t, x, y) for x in range(left, 0) for y in range(height)]
    gens += [column_step(lattice, t, x, y) for x in range(left, 1) for y in range(height)]
    gens += _singles(lattice, "Z", _where(lattice, lambda x, y: x >= 1))
    return gens


def _right_reversing_steps(lattice: Lattice, width: int, height: int) -> List[List[PauliOp]]:
    """The two extra steps shifting the edge logicals up by two on column 1"""
    left = -(width - 1)
    shared = [plaquette(lattice, 0, x, y) for x in range(left, 0) for y in range(height)]
    shared += [column_step(lattice, 0, x, y) for x in range(left, 2) for y in range(height)]
    shared += _singles(lattice, "Z", _where(lattice, lambda x, y: x >= 2))
    mixed = [
        _op(lattice, ("Z", 0, y), ("X", 0, y + 1), ("Z", 1, y), ("X", 1, y + 1))
        for y in range(height)
    ]
    flipped = [_op(lattice, ("X", 1, y)) for y in range(height)]
    return [shared + mixed, shared + flipped]


def edge_logicals_right(lattice: Lattice, height: int) -> List[PauliOp]:
    """L_j = Z_(0,j) X_(0,j+1)"""
    return [_op(lattice, ("Z", 0, j), ("X", 0, j + 1)) for j in range(height)]


def edge_logicals_left(lattice: Lattice, width: int, height: int) -> List[PauliOp]:
    """M_j = X_(x0,j) Z_(x0,j+1) on the leftmost bulk column"""
    left = -(width - 1)
    return [_op(lattice, ("X", left, j), ("Z", left, j + 1)) for j in range(height)]


def _build_right(width: int, height: int, reversed_flow: bool) -> IsgSequence:
    lattice = _right_lattice(width, height)
    step_gens = [_right_step(lattice, t, width, height) for t in range(4)]
    if reversed_flow:
        step_gens += [step_gens[0]] + _right_reversing_steps(lattice, width, height)
    label = "right_R_reversed" if reversed_flow else "right_R"
    steps = [
        StabilizerGroup(lattice, gens, name=f"wpt-{label}[{t}]")
        for t, gens in enumerate(step_gens)
    ]
    seq = IsgSequence(
        lattice, steps, radius=Fraction(1), name=f"wpt-{label}",
        interface=Region.band(lattice, 0, -3, 2), axis=1,
    )
    seq.metadata["edge_logicals"] = edge_logicals_right(lattice, height)
    seq.metadata["far_edge_logicals"] = edge_logicals_left(lattice, width, height)
    seq.metadata["far_interface"] = Region.band(lattice, 0, -(width - 1), -(width - 4))
    return seq


# horizontal (top and bottom) boundaries


def _strip_lattice(width: int, height: int) -> Lattice:
    return Lattice.grid(
        [range(width), _half_rows(-height, 1)],
        periods=(width, None), name=f"wpt-strip{width}x{height}",
    )


# per step: plaquette rows, teleport rows, top pad from, bottom pad up to
_STRIP_LAYOUT = [
    (0, (1, -1), (1, -1), HALF, HALF),
    (1, (1, -1), (1, 0), HALF, 0),
    (2, (1, -1), (1, 0), HALF, 0),
    (3, (1, -1), (0, -1), 0, -HALF),
    (0, (0, -2), (0, -2), -HALF, -HALF),
]


def _strip_step(
    lattice: Lattice, step: int, width: int, height: int, top_prime: bool, bottom_prime: bool
) -> List[PauliOp]:
    s = -height
    t, plaq_rows, tele_rows, top_from, bottom_upto = _STRIP_LAYOUT[step]
    gens = [
        plaquette(lattice, t, x, y)
        for x in range(width) for y in range(s + plaq_rows[0], plaq_rows[1] + 1)
    ]
    gens += [
        column_step(lattice, t, x, y)
        for x in range(width) for y in range(s + tele_rows[0], tele_rows[1] + 1)
    ]
    x_row_top = top_prime and step == 4
    x_row_bottom = bottom_prime and step == 0
    for q in _where(lattice, lambda x, y: y >= top_from):
        letter = "X" if x_row_top and _natural(lattice, q)[1] == 0 else "Z"
        gens.append(PauliOp.single(lattice, letter, q))
    for q in _where(lattice, lambda x, y: y <= s + bottom_upto):
        letter = "X" if x_row_bottom and _natural(lattice, q)[1] == s else "Z"
        gens.append(PauliOp.single(lattice, letter, q))
    return gens


def edge_logicals_top(lattice: Lattice, width: int) -> List[PauliOp]:
    """L_j = Z_(j,0) X_(j+1,0)"""
    return [_op(lattice, ("Z", j, 0), ("X", j + 1, 0)) for j in range(width)]


def edge_logicals_bottom(lattice: Lattice, width: int, height: int) -> List[PauliOp]:
    """L_j = X_(j,y0) Z_(j+1,y0) on the lowest bulk row of the base step"""
    y0 = 1 - height
    return [_op(lattice, ("X", j, y0), ("Z", j + 1, y0)) for j in range(width)]


def restoring_pairs(
    lattice: Lattice, width: int, height: int, top_prime: bool, bottom_prime: bool
) -> ConjugateBases:
    """Conjugate pairs of the last strip step, which moves both edges back by one row

    Top: (Z_(x,0), P_0(x,-1)), or (X_(x+1,0), P_0(x,-1)) with the X row.
    Bottom: (P_0(x,s), Z_(x+1,s)), or (P_0(x,s), X_(x,s)) with the X row.
    """
    s = -height
    a_side, b_side = [], []
    for x in range(width):
        if top_prime:
            a_side.append(_op(lattice, ("X", x + 1, 0)))
        else:
            a_side.append(_op(lattice, ("Z", x, 0)))
        b_side.append(plaquette(lattice, 0, x, -1))
    for x in range(width):
        a_side.append(plaquette(lattice, 0, x, s))
        if bottom_prime:
            b_side.append(_op(lattice, ("X", x, s)))
        else:
            b_side.append(_op(lattice, ("Z", x + 1, s)))
    radius2 = max(op.diameter2() for op in a_side + b_side)
    return ConjugateBases(a_side, b_side, radius2)


def _build_strip(width: int, height: int, boundary: WptBoundary) -> IsgSequence:
    lattice = _strip_lattice(width, height)
    top_prime = boundary == WptBoundary.TOP_T_PRIME
    bottom_prime = boundary == WptBoundary.BOTTOM_B_PRIME
    steps = [
        StabilizerGroup(
            lattice,
            _strip_step(lattice, step, width, height, top_prime, bottom_prime),
            name=f"wpt-{boundary.value}[{step}]",
        )
        for step in range(5)
    ]
    if boundary in (WptBoundary.TOP_T, WptBoundary.TOP_T_PRIME):
        interface = Region.band(lattice, 1, -2, 1)
        edge = edge_logicals_top(lattice, width)
    else:
        interface = Region.band(lattice, 1, -height, 3 - height)
        edge = edge_logicals_bottom(lattice, width, height)
    seq = IsgSequence(
        lattice, steps, radius=Fraction(1), name=f"wpt-{boundary.value}",
        interface=interface, axis=0,
        pinned={4: restoring_pairs(lattice, width, height, top_prime, bottom_prime)},
    )
    seq.metadata["edge_logicals"] = edge
    return seq


def build_wpt(width: int = 24, height: int = 24, boundary="right_R") -> IsgSequence:
    """Build the WPT circuit on a finite window with the requested boundary"""
    try:
        kind = WptBoundary(boundary)
    except ValueError:
        choices = ", ".join(b.value for b in WptBoundary)
        raise PreconditionError(f"unknown WPT boundary '{boundary}' (choose from {choices})")
    _check_extent(width, height)
    if kind == WptBoundary.BULK_TORUS:
        seq = _build_bulk(width, height)
    elif kind in (WptBoundary.RIGHT_R, WptBoundary.RIGHT_R_REVERSED):
        seq = _build_right(width, height, kind == WptBoundary.RIGHT_R_REVERSED)
    else:
        seq = _build_strip(width, height, kind)
    seq.metadata["model"] = "wpt"
    seq.metadata["boundary"] = kind.value
    logger.info(
        f"Built WPT {kind.value} on a {width}x{height} window "
        f"({seq.lattice.num_qubits} qubits, period {seq.period})"
    )
    return seq
