"""Tests for the one-dimensional circuit builders"""

from fractions import Fraction

import pytest

from plrmc.core.pauli import PauliOp
from plrmc.dynamics.mqca import mqca_index, period_map, z2_invariant
from plrmc.exceptions import PreconditionError
from plrmc.models.chains import (
    build_majorana_shift,
    build_shift_by_two_1d,
    build_teleport_chain,
    build_translation_1d,
    majorana_basis,
    random_1d_plrmc,
)
from plrmc.models.sequence import verify, window_margin


class TestBuilders:

    def test_translation_verifies(self):
        seq = build_translation_1d(20)
        report = verify(seq)
        assert report.passed
        assert report.period == 4
        assert len(report.transitions) == 4
        assert all(cb is not None for cb in seq.conjugate_bases)

    def test_translation_needs_even_ring(self):
        with pytest.raises(PreconditionError):
            build_translation_1d(7)
        with pytest.raises(PreconditionError):
            build_translation_1d(4)

    def test_teleport_chain_layout(self):
        seq = build_teleport_chain(2)
        assert seq.lattice.num_qubits == 5
        assert not seq.periodic
        assert seq.num_transitions == 1
        everything_x, everything_z = seq.metadata["shared_logicals"]
        for g in seq.steps:
            assert g.commutes_with(everything_x)
            assert g.commutes_with(everything_z)

    def test_teleport_two_parties_is_local_enough(self):
        # the partner chain for the last pair spans four qubits
        assert verify(build_teleport_chain(2, radius=Fraction(3))).passed

    def test_majorana_basis_on_ring(self):
        m = build_majorana_shift(8)
        lattice = m.lattice
        assert m.elements == majorana_basis(lattice)
        assert m.elements[7] == PauliOp(lattice, (7,), (0,))

    def test_majorana_shift_size(self):
        with pytest.raises(PreconditionError):
            build_majorana_shift(6)

    def test_shift_by_two_verifies(self):
        seq = build_shift_by_two_1d(12)
        assert seq.period == 3
        assert verify(seq).passed

    def test_describe(self):
        info = build_translation_1d(10).describe()
        assert info == {
            "name": "translation",
            "period": 4,
            "qubits": 10,
            "radius": "1",
            "periodic": True,
            "interface_qubits": 10,
        }

    def test_window_margin(self):
        seq = build_translation_1d(10)
        # period · radius + 2ℓ in doubled units
        assert window_margin(seq) == 4 * 2 + 2 * 2


class TestRandomCircuits:

    def test_random_circuit_is_deterministic(self):
        first, expected_first = random_1d_plrmc(11)
        second, expected_second = random_1d_plrmc(11)
        assert expected_first == expected_second
        assert first.steps == second.steps

    def test_random_circuit_size(self):
        with pytest.raises(PreconditionError):
            random_1d_plrmc(0, n=9)

    def test_random_circuit_measures_two_local_paulis(self):
        seq, _ = random_1d_plrmc(5)
        layered = [g for g in seq.steps if not g.name.endswith("'")]
        assert len(layered) >= 4
        assert all(op.weight <= 2 for g in layered for op in g.generators)
        singles = {
            op.letter(q) for g in layered for op in g.generators if op.weight == 1 for q in op.support
        }
        assert len(singles) > 1

    def test_random_round_trips_are_spliced_in(self):
        periods = [random_1d_plrmc(seed)[0].period for seed in range(6)]
        assert max(periods) > 4
        assert all(p % 2 == 0 for p in periods)

    @pytest.mark.slow
    def test_fifty_random_circuits_have_integer_index(self):
        for seed in range(50):
            seq, expected = random_1d_plrmc(seed)
            assert verify(seq).passed, seed
            result = mqca_index(period_map(seq))
            assert result.value.denominator == 1, seed
            assert result.value == expected, seed
            assert z2_invariant(result.value) == 0
