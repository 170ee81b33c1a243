"""One-dimensional circuits: measurement translation, teleportation, Majorana shifts"""

from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple
import logging

import numpy as np

from plrmc.core.f2core import F2Matrix
from plrmc.core.pauli import Lattice, LatticeKind, PauliOp, Region
from plrmc.core.stab import LogicalBasis, StabilizerGroup, measure
from plrmc.dynamics.mqca import MqcaMap, compose
from plrmc.dynamics.rev import is_reversible_pair
from plrmc.exceptions import PreconditionError
from plrmc.models.sequence import IsgSequence

logger = logging.getLogger(__name__)


def _ring(n: int, qubits_per_site: int = 1) -> Lattice:
    return Lattice.chain(n, qubits_per_site, periodic=True)


LetterFn = Callable[[int, int], str]


def _plain_letters(step: int, site: int) -> str:
    return "X" if step % 2 == 0 else "Z"


def _translation_steps(
    lattice: Lattice, slot: int, direction: int, letter: LetterFn = _plain_letters
) -> List[List[PauliOp]]:
    """Generators of the four steps moving logicals on odd sites by two sites

    letter(step, site) picks the Pauli of each factor; the default gives
    ⟨X⟩ → ⟨ZZ⟩ → ⟨X⟩ → ⟨ZZ⟩.
    """
    n = len(lattice.sites)

    def q(j: int) -> int:
        return lattice.site_qubits[j % n][slot]

    def single(t: int, j: int) -> PauliOp:
        return PauliOp.from_letters(lattice, {q(j): letter(t, j % n)})

    def pair(t: int, i: int, j: int) -> PauliOp:
        return PauliOp.from_letters(lattice, {q(i): letter(t, i % n), q(j): letter(t, j % n)})

    d = 1 if direction > 0 else -1
    evens = range(0, n, 2)
    return [
        [single(0, j) for j in evens],
        [pair(1, j - d, j) for j in evens],
        [single(2, j - d) for j in evens],
        [pair(3, j, j + d) for j in evens],
    ]


def build_translation_1d(n: int) -> IsgSequence:
    """⟨X_2j⟩ → ⟨Z_2j−1 Z_2j⟩ → ⟨X_2j−1⟩ → ⟨Z_2j Z_2j+1⟩ on a ring of n qubits

    Logicals on odd qubits move two qubits toward increasing coordinate per period.
    """
    if n < 6 or n % 2:
        raise PreconditionError("the translation circuit needs an even number n >= 6 of sites")
    lattice = _ring(n)
    steps = [
        StabilizerGroup(lattice, gens, name=f"translation[{t}]")
        for t, gens in enumerate(_translation_steps(lattice, 0, +1))
    ]
    seq = IsgSequence(
        lattice, steps, radius=Fraction(1), name="translation",
        interface=Region.everything(lattice), axis=0,
    )
    logger.info(f"Built translation circuit on {n} sites")
    return seq


def build_teleport_chain(n: int, radius: Fraction = Fraction(1)) -> IsgSequence:
    """Two Bell-pair tilings of qubits 1..2n+1, offset by one qubit (open chain)"""
    if n < 2:
        raise PreconditionError("iterated teleportation needs n >= 2 parties")
    lattice = Lattice.from_natural(
        [(i,) for i in range(1, 2 * n + 2)], kind=LatticeKind.CHAIN, name=f"teleport{n}"
    )

    def pair(i: int, j: int) -> List[PauliOp]:
        a, b = lattice.qubit(i), lattice.qubit(j)
        return [PauliOp(lattice, (a, b)), PauliOp(lattice, (), (a, b))]

    first = [op for j in range(1, n + 1) for op in pair(2 * j, 2 * j + 1)]
    second = [op for j in range(1, n + 1) for op in pair(2 * j - 1, 2 * j)]
    everything = range(lattice.num_qubits)
    seq = IsgSequence(
        lattice,
        [StabilizerGroup(lattice, first, name="A"), StabilizerGroup(lattice, second, name="B")],
        radius=Fraction(radius),
        name="teleport-chain",
        periodic=False,
    )
    seq.metadata["shared_logicals"] = [
        PauliOp(lattice, everything), PauliOp(lattice, (), everything)
    ]
    return seq


def majorana_basis(lattice: Lattice, slot: int = 0) -> List[PauliOp]:
    """L_j = X_j Z_j+1 around a ring"""
    n = len(lattice.sites)
    return [
        PauliOp(lattice, (lattice.site_qubits[j][slot],), (lattice.site_qubits[(j + 1) % n][slot],))
        for j in range(n)
    ]


def build_majorana_shift(n: int, step: int = 1) -> MqcaMap:
    """α(L_j) = L_j+step on a ring of n sites; the modulo group is trivial"""
    if n < 8:
        raise PreconditionError("the Majorana shift needs n >= 8 sites")
    lattice = _ring(n)
    elements = majorana_basis(lattice)
    matrix = np.zeros((n, n), dtype=np.uint8)
    for j in range(n):
        matrix[j, (j + step) % n] = 1
    basis = LogicalBasis(Region.everything(lattice), elements, StabilizerGroup(lattice))
    return MqcaMap(basis, F2Matrix.from_dense(matrix, n), axis=0, name=f"majorana-shift{step:+d}")


def build_majorana_shift_by_two(n: int) -> MqcaMap:
    shift = build_majorana_shift(n)
    return compose(shift, shift)


def build_shift_by_two_1d(n: int) -> IsgSequence:
    """Three-step circuit moving the Majorana chain on slot 0 by two, using slot-1 ancillas

    ⟨Z_k⟩ → ⟨L_k Z_k−1 X_k⟩ → ⟨X_k⟩ on the ancillas.
    """
    if n < 6:
        raise PreconditionError("the shift-by-two circuit needs n >= 6 sites")
    lattice = _ring(n, qubits_per_site=2)
    logicals = majorana_basis(lattice, slot=0)

    def anc(k: int) -> int:
        return lattice.site_qubits[k % n][1]

    zs = [PauliOp(lattice, (), (anc(k),)) for k in range(n)]
    mixed = [
        logicals[k] * PauliOp(lattice, (anc(k),), (anc(k - 1),)) for k in range(n)
    ]
    xs = [PauliOp(lattice, (anc(k),)) for k in range(n)]
    steps = [
        StabilizerGroup(lattice, zs, name="shift2[0]"),
        StabilizerGroup(lattice, mixed, name="shift2[1]"),
        StabilizerGroup(lattice, xs, name="shift2[2]"),
    ]
    return IsgSequence(
        lattice, steps, radius=Fraction(1), name="shift-by-two",
        interface=Region.everything(lattice), axis=0,
    )


def build_identity(lattice: Lattice, group: Optional[StabilizerGroup] = None) -> IsgSequence:
    """Single-step circuit; every operator is left unchanged"""
    group = group if group is not None else StabilizerGroup(lattice)
    return IsgSequence(
        lattice, [group], radius=Fraction(1), name="identity",
        interface=Region.everything(lattice), axis=0,
    )


def _other_letter(rng: np.random.Generator, avoid: str) -> str:
    return str(rng.choice([p for p in "XYZ" if p != avoid]))


def _random_letters(rng: np.random.Generator, n: int) -> LetterFn:
    """Per-step letters keeping every transition of a translation layer reversible

    Even sites: steps 1 and 3 differ from step 0. Odd sites: step 2 differs from
    steps 1 and 3.
    """
    table: Dict[Tuple[int, int], str] = {}
    for site in range(n):
        if site % 2 == 0:
            table[0, site] = str(rng.choice(list("XYZ")))
            table[1, site] = _other_letter(rng, table[0, site])
            table[3, site] = _other_letter(rng, table[0, site])
        else:
            table[2, site] = str(rng.choice(list("XYZ")))
            table[1, site] = _other_letter(rng, table[2, site])
            table[3, site] = _other_letter(rng, table[2, site])
    return lambda step, site: table[step, site]


def _random_two_local(rng: np.random.Generator, lattice: Lattice) -> PauliOp:
    """A random Pauli on one qubit and a qubit of the same or the next site"""
    n = len(lattice.sites)
    site = int(rng.integers(n))
    first = lattice.site_qubits[site]
    offset = int(rng.integers(2)) if len(first) > 1 else 1
    second = lattice.site_qubits[(site + offset) % n]
    a = int(rng.choice(first))
    b = int(rng.choice([q for q in second if q != a]))
    return PauliOp.from_letters(
        lattice, {a: str(rng.choice(list("XYZ"))), b: str(rng.choice(list("XYZ")))}
    )


def _with_detours(
    rng: np.random.Generator, steps: List[StabilizerGroup], detours: int, attempts: int = 20
) -> List[StabilizerGroup]:
    """Insert round trips S → S' → S, S' being S after random two-local measurements"""
    out = list(steps)
    for _ in range(detours):
        for _ in range(attempts):
            t = int(rng.integers(len(out)))
            here = out[t]
            ops = [_random_two_local(rng, here.lattice) for _ in range(int(rng.integers(1, 4)))]
            there = measure(here, ops)
            if there.space == here.space:
                continue
            forth = is_reversible_pair(here, there, radius=Fraction(1))
            back = is_reversible_pair(there, here, radius=Fraction(1))
            if forth.locally_reversible and back.locally_reversible:
                there.name = f"{here.name}'"
                out[t + 1:t + 1] = [there, here]
                break
    return out


def random_1d_plrmc(
    seed: int, n: int = 16, max_layers: int = 2, detours: int = 2
) -> Tuple[IsgSequence, int]:
    """Random standalone 1D PLRMC and the net number of right-moving qubit layers

    Each of up to max_layers qubit slots per site runs a right-moving, a
    left-moving or a static circuit of random two-local measurements. Random
    two-local round trips are then spliced in at random steps.
    """
    if n < 6 or n % 2:
        raise PreconditionError("random 1D circuits need an even number n >= 6 of sites")
    rng = np.random.default_rng(seed)
    layers = int(rng.integers(1, max_layers + 1))
    lattice = _ring(n, qubits_per_site=layers)
    kinds = [str(k) for k in rng.choice(["right", "left", "static"], size=layers)]
    per_step: List[List[PauliOp]] = [[] for _ in range(4)]
    for slot, kind in enumerate(kinds):
        letters = _random_letters(rng, n)
        if kind == "static":
            hold = _translation_steps(lattice, slot, +1, letters)[0]
            for t in range(4):
                per_step[t].extend(hold)
        else:
            direction = +1 if kind == "right" else -1
            for t, gens in enumerate(_translation_steps(lattice, slot, direction, letters)):
                per_step[t].extend(gens)
    steps = [
        StabilizerGroup(lattice, gens, name=f"random[{t}]") for t, gens in enumerate(per_step)
    ]
    steps = _with_detours(rng, steps, detours)
    expected = kinds.count("right") - kinds.count("left")
    seq = IsgSequence(
        lattice, steps, radius=Fraction(1), name=f"random-1d-{seed}",
        interface=Region.everything(lattice), axis=0,
    )
    seq.metadata["layers"] = kinds
    logger.debug("random 1D circuit %d: layers %s, period %d", seed, kinds, seq.period)
    return seq, expected
