"""Tests for stabilizer groups, measurement updates and logical bases"""

import pytest

from plrmc.core.pauli import Lattice, PauliOp, Region, commutes, parse_pauli
from plrmc.core.stab import (
    LogicalBasis,
    StabilizerGroup,
    centralizer_in_region,
    contains,
    intersect,
    is_centerless,
    logicals_equivalent,
    measure,
)
from plrmc.exceptions import LatticeMismatchError, NonAbelianError
from plrmc.models.chains import build_translation_1d


def zz(lattice, i, j):
    return PauliOp(lattice, (), (i, j))


def xx(lattice, i, j):
    return PauliOp(lattice, (i, j))


class TestStabilizerGroup:

    def setup_method(self):
        self.lattice = Lattice.chain(4)

    def test_non_abelian_generators(self):
        x0 = PauliOp(self.lattice, (0,))
        z0 = PauliOp(self.lattice, (), (0,))
        with pytest.raises(NonAbelianError) as info:
            StabilizerGroup(self.lattice, [x0, z0])
        assert info.value.witness == (x0, z0)

    def test_identity_generators_dropped(self):
        g = StabilizerGroup(self.lattice, [PauliOp(self.lattice), zz(self.lattice, 0, 1)])
        assert len(g) == 1
        assert g.dim == 1

    def test_equality_uses_canonical_basis(self):
        a = StabilizerGroup(self.lattice, [zz(self.lattice, 0, 1), PauliOp(self.lattice, (), (1,))])
        b = StabilizerGroup(
            self.lattice, [PauliOp(self.lattice, (), (0,)), PauliOp(self.lattice, (), (1,))]
        )
        assert a == b
        assert hash(a) == hash(b)

    def test_contains(self):
        g = StabilizerGroup(self.lattice, [zz(self.lattice, 1, 2), zz(self.lattice, 2, 3)])
        assert contains(g, zz(self.lattice, 1, 3))
        assert PauliOp(self.lattice, (1,)) not in g
        # membership is closed under products
        assert contains(g, zz(self.lattice, 1, 2) * zz(self.lattice, 1, 3))

    def test_contains_other_lattice(self):
        g = StabilizerGroup.vacuum(self.lattice)
        with pytest.raises(LatticeMismatchError):
            contains(g, PauliOp(Lattice.chain(5), (), (0,)))

    def test_vacuum(self):
        g = StabilizerGroup.vacuum(self.lattice)
        assert g.dim == 4
        assert g.locality_radius == 0
        part = StabilizerGroup.vacuum(self.lattice, Region(self.lattice, [1, 2]))
        assert part.dim == 2

    def test_locality_radius(self):
        g = StabilizerGroup(self.lattice, [zz(self.lattice, 0, 2)])
        assert g.locality_radius == 2

    def test_anticommuting(self):
        g = StabilizerGroup(self.lattice, [zz(self.lattice, 0, 1), zz(self.lattice, 1, 2)])
        assert g.anticommuting(PauliOp(self.lattice, (1,))) == [0, 1]
        assert g.anticommuting(PauliOp(self.lattice, (3,))) == []
        assert g.gens_meeting([2, 3]) == [1]

    def test_json_round_trip(self):
        g = StabilizerGroup(self.lattice, [zz(self.lattice, 0, 1), xx(self.lattice, 0, 1)])
        back = StabilizerGroup.from_json(g.to_json())
        assert back == g
        assert g.to_json()["generators"] == ["Z(0) Z(1)", "X(0) X(1)"]


class TestGroupOperations:

    def setup_method(self):
        self.lattice = Lattice.chain(2)

    def test_intersect_trivial(self):
        a = StabilizerGroup(self.lattice, [PauliOp(self.lattice, (1,))])
        b = StabilizerGroup(self.lattice, [zz(self.lattice, 0, 1)])
        assert intersect(a, b).dim == 0

    def test_intersect_with_itself(self):
        g = StabilizerGroup(self.lattice, [zz(self.lattice, 0, 1)])
        assert intersect(g, g) == g

    def test_intersect_common_element(self):
        a = StabilizerGroup.vacuum(self.lattice)
        b = StabilizerGroup(self.lattice, [zz(self.lattice, 0, 1), xx(self.lattice, 0, 1)])
        common = intersect(a, b)
        assert common.dim == 1
        assert zz(self.lattice, 0, 1) in common

    def test_logicals_equivalent(self):
        g = StabilizerGroup(self.lattice, [zz(self.lattice, 0, 1)])
        z0 = PauliOp(self.lattice, (), (0,))
        z1 = PauliOp(self.lattice, (), (1,))
        assert logicals_equivalent(z0, z1, g)
        assert not logicals_equivalent(z0, PauliOp(self.lattice, (0,)), g)

    def test_measure_anticommuting(self):
        after = measure(StabilizerGroup.vacuum(self.lattice), [xx(self.lattice, 0, 1)])
        expected = StabilizerGroup(self.lattice, [zz(self.lattice, 0, 1), xx(self.lattice, 0, 1)])
        assert after == expected

    def test_measure_member_changes_nothing(self):
        vacuum = StabilizerGroup.vacuum(self.lattice)
        assert measure(vacuum, [PauliOp(self.lattice, (), (0,))]) == vacuum

    def test_measure_reproduces_translation_step(self):
        seq = build_translation_1d(8)
        measured = measure(seq.steps[0], seq.steps[1].generators)
        assert measured == seq.steps[1]


class TestRestriction:

    def test_restriction_needs_products(self):
        lattice = Lattice.chain(3)
        g = StabilizerGroup(lattice, [zz(lattice, 0, 2), zz(lattice, 1, 2)])
        inside = g.restricted_to(Region(lattice, [0, 1]))
        assert inside.dim == 1
        assert zz(lattice, 0, 1) in inside

    def test_restriction_to_everything(self):
        lattice = Lattice.chain(3)
        g = StabilizerGroup(lattice, [zz(lattice, 0, 1)])
        assert g.restricted_to(Region.everything(lattice)) is g

    def test_restriction_of_other_lattice_region(self):
        g = StabilizerGroup.vacuum(Lattice.chain(3))
        with pytest.raises(LatticeMismatchError):
            g.restricted_to(Region.everything(Lattice.chain(4)))


class TestCentralizer:

    def setup_method(self):
        self.lattice = Lattice.chain(4)
        self.repetition = StabilizerGroup(
            self.lattice, [zz(self.lattice, i, i + 1) for i in range(3)]
        )

    def test_repetition_code_logicals(self):
        lb = centralizer_in_region(self.repetition, Region.everything(self.lattice))
        assert len(lb) == 2
        assert is_centerless(lb)
        for element in lb.elements:
            assert self.repetition.commutes_with(element)
            assert element not in self.repetition
        # kernel dimension = 2·qubits − rank of the constraints
        assert len(lb) + lb.modulo.dim == 2 * 4 - 3

    def test_ising_edge_is_not_centerless(self):
        lb = centralizer_in_region(self.repetition, Region(self.lattice, [0, 1]))
        assert len(lb) == 1
        assert not is_centerless(lb)
        assert lb.coordinates(PauliOp(self.lattice, (), (1,))) is not None
        assert lb.coordinates(PauliOp(self.lattice, (0,))) is None
        assert lb.coordinates(PauliOp(self.lattice, (), (2,))) is None

    def test_vacuum_has_no_logicals(self):
        vacuum = StabilizerGroup.vacuum(self.lattice)
        lb = centralizer_in_region(vacuum, Region(self.lattice, [1, 2]))
        assert len(lb) == 0
        assert is_centerless(lb)

    def test_sliding_window_along_axis(self):
        lb = centralizer_in_region(
            self.repetition, Region.everything(self.lattice), axis=0, window=1
        )
        assert len(lb) == 1
        assert lb.elements[0].weight == 1

    def test_majorana_chain_is_centerless(self):
        lattice = Lattice.chain(7)
        elements = [parse_pauli(f"X({j}) Z({j + 1})", lattice) for j in range(6)]
        lb = LogicalBasis(Region.everything(lattice), elements, StabilizerGroup(lattice))
        assert is_centerless(lb)
        m = lb.commutation_matrix()
        assert m[0, 1] == 1
        assert m[0, 2] == 0

    def test_odd_majorana_chain_has_center(self):
        lattice = Lattice.chain(6)
        elements = [parse_pauli(f"X({j}) Z({j + 1})", lattice) for j in range(5)]
        lb = LogicalBasis(Region.everything(lattice), elements, StabilizerGroup(lattice))
        assert not is_centerless(lb)

    def test_elements_commute_pairwise_as_reported(self):
        lb = centralizer_in_region(self.repetition, Region.everything(self.lattice))
        m = lb.commutation_matrix()
        for i, a in enumerate(lb.elements):
            for j, b in enumerate(lb.elements):
                assert m[i, j] == commutes(a, b)

    def test_representatives_are_reduced(self):
        lb = centralizer_in_region(self.repetition, Region.everything(self.lattice))
        for element in lb.elements:
            v = element.to_vector()
            assert (lb.modulo.space.residue(v) == v).all()

    def test_raw_representatives_on_request(self):
        raw = centralizer_in_region(self.repetition, Region.everything(self.lattice), canonical=False)
        reduced = centralizer_in_region(self.repetition, Region.everything(self.lattice))
        assert len(raw) == len(reduced)
        for p, q in zip(raw.elements, reduced.elements):
            assert logicals_equivalent(p, q, self.repetition)

    def test_windowed_representatives_reduced_within_their_extent(self):
        lattice = Lattice.chain(10)
        g = StabilizerGroup(
            lattice, [zz(lattice, j, j + 1) for j in (1, 3, 5, 7)] + [xx(lattice, 3, 4)]
        )
        lb = centralizer_in_region(g, Region.everything(lattice), axis=0, window=2)
        assert lb.elements
        for element in lb.elements:
            assert element.diameter() <= 2
            support = sorted(element.support)
            extent = Region(lattice, range(support[0], support[-1] + 1))
            local = g.restricted_to(extent)
            v = element.to_vector()
            assert (local.space.residue(v) == v).all()
