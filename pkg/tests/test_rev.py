"""Tests for transition reversibility, conjugate bases and logical evolution"""

from fractions import Fraction

import numpy as np
import pytest

from plrmc.core.pauli import Lattice, PauliOp, Region, commutes
from plrmc.core.stab import StabilizerGroup, logicals_equivalent, measure
from plrmc.dynamics.rev import (
    evolve_logical,
    find_conjugate_bases,
    has_shared_logicals,
    is_outcome_random,
    is_reversible_pair,
    is_topological,
)
from plrmc.exceptions import NotReversibleError, PreconditionError, WindowTooSmallError
from plrmc.models.chains import build_teleport_chain, build_translation_1d
from plrmc.models.sequence import verify
from plrmc.models.wpt import build_wpt


def random_pauli(rng, lattice):
    while True:
        letters = rng.integers(0, 4, size=lattice.num_qubits)
        p = PauliOp.from_letters(lattice, {q: "IXYZ"[int(c)] for q, c in enumerate(letters) if c})
        if not p.is_identity():
            return p


def random_group(rng, lattice):
    ops = [random_pauli(rng, lattice) for _ in range(int(rng.integers(1, lattice.num_qubits + 2)))]
    return measure(StabilizerGroup(lattice), ops)


def bell_groups(lattice, offset):
    gens = []
    for j in range(offset, lattice.num_qubits - 1, 2):
        gens.append(PauliOp(lattice, (j, j + 1)))
        gens.append(PauliOp(lattice, (), (j, j + 1)))
    return StabilizerGroup(lattice, gens)


def as_bits(p, n):
    """p as an int with x bits below bit n and z bits from bit n"""
    out = 0
    for q in p.support:
        letter = p.letter(q)
        if letter in "XY":
            out |= 1 << q
        if letter in "ZY":
            out |= 1 << (n + q)
    return out


def all_paulis(n):
    return np.arange(4 ** n, dtype=np.int64)


def commuting_with(candidates, gens, n):
    parity = np.array([bin(i).count("1") & 1 for i in range(1 << n)], dtype=np.int64)
    low = (1 << n) - 1
    keep = np.ones(len(candidates), dtype=bool)
    for g in gens:
        gx, gz = g & low, g >> n
        cross = ((candidates & low) & gz) ^ ((candidates >> n) & gx)
        keep &= parity[cross] == 0
    return candidates[keep]


def group_elements(gens):
    elements = np.zeros(1, dtype=np.int64)
    for g in gens:
        elements = np.union1d(elements, elements ^ g)
    return elements


def brute_shared_logicals(a, b, n):
    """Every logical of each group is equivalent, within it, to one commuting with both"""
    ga = [as_bits(p, n) for p in a.generators]
    gb = [as_bits(p, n) for p in b.generators]
    both = commuting_with(all_paulis(n), ga + gb, n)
    for gens in (ga, gb):
        logicals = commuting_with(all_paulis(n), gens, n)
        shifted = logicals[:, None] ^ group_elements(gens)[None, :]
        if not np.isin(shifted, both).any(axis=1).all():
            return False
    return True


def brute_enlargement_free(a, b, n):
    """No element of either group commutes with the other group without belonging to it"""
    ga = [as_bits(p, n) for p in a.generators]
    gb = [as_bits(p, n) for p in b.generators]
    for mine, other in ((ga, gb), (gb, ga)):
        kept = commuting_with(group_elements(mine), other, n)
        if not np.isin(kept, group_elements(other)).all():
            return False
    return True

class TestReversiblePair:

    def test_bell_pair_tilings(self):
        lattice = Lattice.chain(5)
        report = is_reversible_pair(bell_groups(lattice, 1), bell_groups(lattice, 0))
        assert report.reversible
        assert report.witness is None
        assert report.quotient_dims == (4, 4)

    def test_direct_transition_destroys_information(self):
        lattice = Lattice.chain(2)
        a = StabilizerGroup(lattice, [PauliOp(lattice, (0,))])
        b = StabilizerGroup(lattice, [PauliOp(lattice, (1,))])
        report = is_reversible_pair(a, b)
        assert not report.reversible
        assert not report.matrix_condition
        assert report.witness == PauliOp(lattice, (0,))
        assert report.witness_side == "a"

    def test_witness_on_the_b_side(self):
        lattice = Lattice.chain(2)
        a = StabilizerGroup(lattice, [PauliOp(lattice, (), (0,))])
        b = StabilizerGroup(lattice, [PauliOp(lattice, (0,)), PauliOp(lattice, (), (1,))])
        report = is_reversible_pair(a, b)
        assert not report.reversible
        assert report.witness == PauliOp(lattice, (), (1,))
        assert report.witness_side == "b"

    def test_idle_step(self):
        g = StabilizerGroup.vacuum(Lattice.chain(3))
        report = is_reversible_pair(g, g, radius=1)
        assert report.reversible
        assert report.locally_reversible
        assert report.radius_used == 0

    def test_locally_reversible_implies_reversible(self):
        seq = build_translation_1d(10)
        for _, a, b in seq.transitions():
            report = is_reversible_pair(a, b, radius=1)
            assert report.reversible and report.locally_reversible
            assert report.radius_used <= 1
            assert report.conjugate_bases.is_valid()

    def test_to_json(self):
        lattice = Lattice.chain(2)
        a = StabilizerGroup(lattice, [PauliOp(lattice, (0,))])
        b = StabilizerGroup(lattice, [PauliOp(lattice, (1,))])
        data = is_reversible_pair(a, b).to_json()
        assert data["witness"] == "X(0)"
        assert data["witness_side"] == "a"
        assert data["quotient_dims"] == [1, 1]


class TestConditionEquivalence:

    def test_random_small_pairs_agree(self):
        rng = np.random.default_rng(2024)
        outcomes = {True: 0, False: 0}
        for trial in range(200):
            lattice = Lattice.chain(int(rng.integers(2, 7)))
            a = random_group(rng, lattice)
            if trial % 2:
                b = random_group(rng, lattice)
            else:
                b = measure(a, [random_pauli(rng, lattice) for _ in range(int(rng.integers(1, 3)))])
            report = is_reversible_pair(a, b)
            n = lattice.num_qubits
            assert report.matrix_condition == report.enlargement_free, trial
            assert report.enlargement_free == brute_enlargement_free(a, b, n), trial
            assert report.reversible == brute_shared_logicals(a, b, n), trial
            assert report.reversible == has_shared_logicals(a, b), trial
            outcomes[report.reversible] += 1
        assert outcomes[True] > 0
        assert outcomes[False] > 0


class TestConjugateBases:

    def test_translation_pairs_are_nearest_neighbour(self):
        seq = build_translation_1d(20)
        a, b = seq.steps[0], seq.steps[1]
        cb = find_conjugate_bases(a, b, 1)
        assert cb is not None
        assert len(cb) == 10
        assert cb.is_valid()
        lattice = seq.lattice
        pairs = {frozenset(x.support): y for x, y in zip(cb.a_side, cb.b_side)}
        assert pairs[frozenset([2])] == PauliOp(lattice, (), (1, 2))

    def test_reversed_bases_stay_valid(self):
        seq = build_translation_1d(8)
        cb = find_conjugate_bases(seq.steps[1], seq.steps[2], 1)
        assert cb.reversed().is_valid()

    def test_non_reversible_pair_rejected(self):
        lattice = Lattice.chain(2)
        a = StabilizerGroup(lattice, [PauliOp(lattice, (0,))])
        b = StabilizerGroup(lattice, [PauliOp(lattice, (1,))])
        with pytest.raises(NotReversibleError):
            find_conjugate_bases(a, b, 1)

    def test_teleport_chain_needs_long_range(self):
        seq = build_teleport_chain(4, radius=Fraction(1))
        report = verify(seq)
        assert not report.passed
        only = report.transitions[0].report
        assert only.reversible
        assert not only.locally_reversible

    def test_teleport_chain_with_wide_radius(self):
        seq = build_teleport_chain(4, radius=Fraction(8))
        assert verify(seq).passed
        assert seq.conjugate_bases[0].radius <= 8


class TestEvolveLogical:

    def setup_method(self):
        self.seq = build_translation_1d(20)
        self.lattice = self.seq.lattice
        self.a, self.b = self.seq.steps[0], self.seq.steps[1]
        self.cb = find_conjugate_bases(self.a, self.b, 1)

    def test_commuting_logical_unchanged(self):
        z1 = PauliOp(self.lattice, (), (1,))
        assert evolve_logical(z1, self.a, self.b, self.cb) == z1

    def test_dressing(self):
        x1 = PauliOp(self.lattice, (1,))
        out = evolve_logical(x1, self.a, self.b, self.cb)
        assert out == PauliOp(self.lattice, (1, 2))
        assert self.b.commutes_with(out)

    def test_not_a_logical(self):
        with pytest.raises(PreconditionError):
            evolve_logical(PauliOp(self.lattice, (), (2,)), self.a, self.b, self.cb)

    def test_commutation_preserved(self):
        ops = [PauliOp(self.lattice, (q,)) for q in (1, 3)] + [PauliOp(self.lattice, (), (1,))]
        evolved = [evolve_logical(p, self.a, self.b, self.cb) for p in ops]
        for i in range(len(ops)):
            for j in range(len(ops)):
                assert commutes(ops[i], ops[j]) == commutes(evolved[i], evolved[j])

    def test_round_trip(self):
        x1 = PauliOp(self.lattice, (1,))
        there = evolve_logical(x1, self.a, self.b, self.cb)
        back = evolve_logical(there, self.b, self.a, self.cb.reversed())
        assert logicals_equivalent(back, x1, self.a)

    def test_support_growth_bounded(self):
        x1 = PauliOp(self.lattice, (1,))
        out = evolve_logical(x1, self.a, self.b, self.cb)
        assert out.diameter() <= x1.diameter() + 2


class TestCanonicalDressing:

    def setup_method(self):
        self.lattice = Lattice.chain(4)
        zz01 = PauliOp(self.lattice, (), (0, 1))
        self.a = StabilizerGroup(self.lattice, [zz01, PauliOp(self.lattice, (2,))])
        self.b = StabilizerGroup(self.lattice, [zz01, PauliOp(self.lattice, (), (2, 3))])
        self.cb = find_conjugate_bases(self.a, self.b, 1)

    def test_coset_members_share_a_representative(self):
        z0 = PauliOp(self.lattice, (), (0,))
        z1 = PauliOp(self.lattice, (), (1,))
        assert evolve_logical(z0, self.a, self.b, self.cb) == z1
        assert evolve_logical(z1, self.a, self.b, self.cb) == z1

    def test_raw_dressing_keeps_the_input(self):
        z0 = PauliOp(self.lattice, (), (0,))
        assert evolve_logical(z0, self.a, self.b, self.cb, canonical=False) == z0

    def test_representative_is_reduced(self):
        x3 = PauliOp(self.lattice, (3,))
        out = evolve_logical(x3, self.a, self.b, self.cb)
        assert out == PauliOp(self.lattice, (2, 3))
        assert self.b.commutes_with(out)


class TestOutcomeRandomness:

    def setup_method(self):
        self.lattice = Lattice.chain(2)
        self.isg = StabilizerGroup(self.lattice, [PauliOp(self.lattice, (1,))])

    def test_random_outcome(self):
        assert is_outcome_random(PauliOp(self.lattice, (), (0, 1)), self.isg)

    def test_member_is_deterministic(self):
        assert not is_outcome_random(PauliOp(self.lattice, (1,)), self.isg)

    def test_information_destroying_measurement(self):
        x0 = PauliOp(self.lattice, (0,))
        assert not is_outcome_random(x0, self.isg)
        assert x0 not in self.isg


class TestTopological:

    def setup_method(self):
        self.lattice = Lattice.chain(12)
        self.bulk = Region.band(self.lattice, 0, 3, 8)

    def test_vacuum(self):
        report = is_topological(StabilizerGroup.vacuum(self.lattice), self.bulk, 1)
        assert report
        assert report.checked_boxes > 0

    def test_ising_chain_has_local_logical(self):
        ising = StabilizerGroup(
            self.lattice, [PauliOp(self.lattice, (), (i, i + 1)) for i in range(11)]
        )
        report = is_topological(ising, self.bulk, 1)
        assert not report
        assert report.condition == "local_logical"
        assert report.witness.weight == 1
        assert report.witness.letter(next(iter(report.witness.support))) == "Z"

    def test_bulk_too_close_to_edge(self):
        with pytest.raises(WindowTooSmallError):
            is_topological(StabilizerGroup.vacuum(self.lattice), Region.everything(self.lattice), 1)

    def test_enumeration_counts(self):
        report = is_topological(StabilizerGroup.vacuum(self.lattice), self.bulk, 1, max_box=3)
        # one box per anchor and side, one operator per single site letter and local pair
        assert report.checked_boxes == 6 * 3
        assert report.checked_operators == 18 + 6 * 3 + 5 * 9

    def test_rectangular_boxes_are_visited(self):
        lattice = Lattice.grid([range(12), range(12)])
        bulk = Region.band(lattice, 0, 4, 7) & Region.band(lattice, 1, 4, 7)
        report = is_topological(StabilizerGroup.vacuum(lattice), bulk, 1, max_box=2)
        assert report
        assert report.checked_boxes == 16 * 4

    def test_witness_is_deterministic(self):
        ising = StabilizerGroup(
            self.lattice, [PauliOp(self.lattice, (), (i, i + 1)) for i in range(11)]
        )
        first = is_topological(ising, self.bulk, 1)
        second = is_topological(ising, self.bulk, 1)
        assert first.witness == second.witness
        assert first.checked_operators == second.checked_operators

    @pytest.mark.slow
    def test_wen_plaquette_bulk_is_topological(self):
        base = build_wpt(10, 10, "bulk_torus").base
        lattice = base.lattice
        bulk = Region.band(lattice, 0, 2, 7) & Region.band(lattice, 1, 2, 7)
        report = is_topological(base, bulk, 1, max_box=2)
        assert report, report.witness
        assert report.checked_boxes > 0
