"""Tests for period maps and the index"""

from fractions import Fraction

import numpy as np
import pytest

from plrmc.core.f2core import F2Matrix
from plrmc.core.pauli import Lattice, PauliOp, commutes
from plrmc.dynamics.mqca import (
    compose,
    conjugate,
    identity_map,
    inverse,
    mqca_index,
    period_map,
    representable_subspace,
    tensor,
    trace_logical,
    z2_invariant,
)
from plrmc.exceptions import MarginError, PreconditionError
from plrmc.models.chains import (
    build_identity,
    build_majorana_shift,
    build_majorana_shift_by_two,
    build_shift_by_two_1d,
    build_teleport_chain,
    build_translation_1d,
)

TRANSLATION_CUTS = [(12, 7), (13, 8), (11, 6)]
MAJORANA_CUTS = [(14, 9), (15, 10), (13, 8)]


def pairing_matrix(k):
    """e_2i ↦ e_2i + e_2i+1, e_2i+1 ↦ e_2i+1"""
    u = np.eye(k, dtype=np.uint8)
    for i in range(0, k - 1, 2):
        u[i, i + 1] = 1
    return F2Matrix.from_dense(u, k)


class TestTranslationIndex:

    def setup_method(self):
        self.seq = build_translation_1d(20)
        self.m = period_map(self.seq)

    def test_index_is_one_across_cuts(self):
        for a, b in TRANSLATION_CUTS:
            result = mqca_index(self.m, a, b)
            assert result.value == 1
            assert result.index_times_two == 2
            assert (result.cut_a, result.cut_b) == (a, b)

    def test_default_cuts(self):
        result = mqca_index(self.m)
        assert result.value == 1
        assert result.margins_ok

    def test_logicals_move_two_qubits(self):
        lattice = self.seq.lattice
        v = self.m.basis.coordinates(PauliOp(lattice, (1,)))
        w = self.m.basis.coordinates(PauliOp(lattice, (3,)))
        assert v is not None and w is not None
        image = (v.astype(int) @ self.m.matrix.dense().astype(int)) % 2
        assert np.array_equal(image, w)

    def test_wider_margins_and_shifted_cuts(self):
        for a, b in TRANSLATION_CUTS:
            assert mqca_index(self.m, a, b, margin=Fraction(3)).value == 1
        for shift in (-2, 2):
            assert mqca_index(self.m, 12 + shift, 7 + shift).value == 1
            assert mqca_index(self.m, 12 + shift, 7 + shift, margin=Fraction(3)).value == 1

    def test_idle_steps_do_not_change_the_index(self):
        m = period_map(self.seq.with_idle([0, 2]))
        assert mqca_index(m, 12, 7).value == 1

    def test_to_json(self):
        data = mqca_index(self.m, 12, 7).to_json()
        assert data["index"] == "1"
        assert data["index_times_two"] == 2
        assert data["z2"] == 0
        assert data["cut_a"] == "12"

    def test_cuts_too_close(self):
        with pytest.raises(MarginError):
            mqca_index(self.m, 10, Fraction(19, 2))

    def test_cut_inside_margin(self):
        with pytest.raises(MarginError):
            mqca_index(self.m, 5, 2)

    def test_trace_logical(self):
        x1 = PauliOp(self.seq.lattice, (1,))
        steps = trace_logical(self.seq, x1, cycles=2)
        assert len(steps) == 1 + 2 * self.seq.period
        assert steps[0] == x1
        for op in steps:
            assert op.diameter() <= 2


class TestMajoranaShift:

    def setup_method(self):
        self.m = build_majorana_shift(24)

    def test_commutation_pattern(self):
        elements = self.m.elements
        n = len(elements)
        for j in range(n):
            for k in range(n):
                near = min((j - k) % n, (k - j) % n) == 1
                assert commutes(elements[j], elements[k]) == int(near)

    def test_half_index_and_dimensions(self):
        for a, b in MAJORANA_CUTS:
            result = mqca_index(self.m, a, b)
            assert result.value == Fraction(1, 2)
            assert result.dims == (a - b - 1, a - b - 2)

    def test_margins_and_shifts(self):
        for shift in (-2, 0, 2):
            a, b = 14 + shift, 9 + shift
            assert mqca_index(self.m, a, b).value == Fraction(1, 2)
            assert mqca_index(self.m, a, b, margin=Fraction(3)).value == Fraction(1, 2)

    def test_inverse_flows_the_other_way(self):
        assert mqca_index(inverse(self.m)).value == Fraction(-1, 2)

    def test_compose_is_additive(self):
        assert mqca_index(compose(self.m, self.m)).value == 1
        assert mqca_index(build_majorana_shift_by_two(24)).value == 1
        assert mqca_index(compose(self.m, inverse(self.m))).value == 0

    def test_tensor_is_additive(self):
        assert mqca_index(tensor(self.m, self.m)).value == 1
        assert mqca_index(tensor(self.m, inverse(self.m))).value == 0
        ident = identity_map(self.m.basis, self.m.axis)
        assert mqca_index(tensor(self.m, ident)).value == Fraction(1, 2)

    def test_conjugation_invariance(self):
        m = build_majorana_shift(32)
        k = len(m.elements)
        assert mqca_index(conjugate(m, F2Matrix.identity(k))).value == Fraction(1, 2)
        assert mqca_index(conjugate(m, pairing_matrix(k))).value == Fraction(1, 2)

    def test_singular_conjugation(self):
        k = len(self.m.elements)
        with pytest.raises(PreconditionError):
            conjugate(self.m, F2Matrix.zeros(k, k))

    def test_representable_subspace(self):
        # L_j with j and j+1 inside [2, 6]
        assert representable_subspace(self.m, 2, 6).dim == 4

    def test_describe(self):
        info = self.m.describe()
        assert info["elements"] == 24
        assert info["range"] == "1"
        assert info["width"] == "1"


class TestOtherMaps:

    def test_identity_circuit(self):
        seq = build_identity(Lattice.chain(10, periodic=True))
        m = period_map(seq)
        assert m.matrix == F2Matrix.identity(len(m.elements))
        assert mqca_index(m).value == 0

    def test_shift_by_two_circuit(self):
        m = period_map(build_shift_by_two_1d(24))
        result = mqca_index(m)
        assert result.value == 1
        assert result.value.denominator == 1

    def test_open_sequence_has_no_period_map(self):
        with pytest.raises(PreconditionError):
            period_map(build_teleport_chain(3))


class TestZ2:

    def test_values(self):
        assert z2_invariant(Fraction(1, 2)) == 1
        assert z2_invariant(Fraction(-1, 2)) == 1
        assert z2_invariant(Fraction(1)) == 0
        assert z2_invariant(Fraction(0)) == 0

    def test_not_a_half_integer(self):
        with pytest.raises(PreconditionError):
            z2_invariant(Fraction(1, 3))
