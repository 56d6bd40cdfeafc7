from fractions import Fraction
from itertools import product

import numpy as np
import pytest

from eoqubit import angular_momentum as am

import oracles


class TestClebschGordan:
    HALF_SPINS = [Fraction(k, 2) for k in range(0, 5)]

    def test_matches_sympy(self):
        checked = 0
        for j1, j2 in product(self.HALF_SPINS, repeat=2):
            J = abs(j1 - j2)
            while J <= j1 + j2:
                for m1 in np.arange(-j1, j1 + 1):
                    for m2 in np.arange(-j2, j2 + 1):
                        M = m1 + m2
                        if abs(M) > J:
                            continue
                        ours = am.cg_coefficient(j1, Fraction(m1), j2, Fraction(m2), J, Fraction(M))
                        ref = oracles.cg_sympy(j1, Fraction(m1), j2, Fraction(m2), J, Fraction(M))
                        assert ours == pytest.approx(ref, abs=1e-14)
                        checked += 1
                J += 1
        assert checked > 300

    def test_exact_square_is_rational(self):
        sign, square = am.cg_exact("3/2", "1/2", 1, 0, "3/2", "1/2")
        assert sign * np.sqrt(float(square)) == pytest.approx(am.cg_coefficient(1.5, 0.5, 1, 0, 1.5, 0.5))
        assert isinstance(square, Fraction)

    @pytest.mark.parametrize("args", [
        (0.5, 0.5, 0.5, 0.5, 0, 0),        # M mismatch
        (0.5, 0.5, 0.5, -0.5, 2, 0),       # triangle violated
        (1, 0, 1, 0, 1, 0),                # vanishing by symmetry
    ])
    def test_selection_rules_give_zero(self, args):
        assert am.cg_coefficient(*args) == 0.0

    @pytest.mark.parametrize("bad", [(0.3, 0, 0.5, 0, 0.5, 0), (1, 0.5, 0.5, 0, 0.5, 0.5),
                                     (-1, 0, 1, 0, 0, 0)])
    def test_invalid_arguments(self, bad):
        with pytest.raises(ValueError):
            am.cg_coefficient(*bad)

    def test_coupling_coefficient_puts_larger_momentum_first(self):
        # |1/2 m> x |1 m'> coupled to 1/2 picks up (-1)^(j1+j2-J) relative to plain CG
        plain = am.cg_coefficient(0.5, 0.5, 1, 0, 0.5, 0.5)
        assert am.coupling_coefficient(0.5, 0.5, 1, 0, 0.5, 0.5) == pytest.approx(-plain)
        assert am.coupling_coefficient(1, 0, 0.5, 0.5, 0.5, 0.5) == pytest.approx(
            am.cg_coefficient(1, 0, 0.5, 0.5, 0.5, 0.5))


class TestSingleQubit:
    @pytest.mark.parametrize("qubit", [0, 1, 2])
    def test_matches_printed_states(self, qubit):
        for k, state in enumerate(am.build_single_qubit_states(qubit), start=1):
            np.testing.assert_allclose(state.vector(), oracles.printed_single_qubit(k, qubit),
                                       atol=1e-15)

    def test_quantum_numbers(self):
        A = am.qubit_spins(0)
        for state, (s, m, s12) in zip(am.build_single_qubit_states(0), am.SINGLE_QUBIT_LABELS):
            v = state.vector()
            S2 = oracles.total_spin_squared(A)
            P2 = oracles.total_spin_squared(A[1:])
            assert v @ S2 @ v == pytest.approx(float(s * (s + 1)), abs=1e-13)
            assert v @ P2 @ v == pytest.approx(s12 * (s12 + 1), abs=1e-13)
            assert state.m == m

    def test_couple_rejects_overlapping_spins(self):
        d = am.spin_doublet(1)
        with pytest.raises(ValueError):
            am.couple(d, d, 1, 0)

    def test_couple_rejects_impossible_total(self):
        with pytest.raises(ValueError):
            am.couple(am.spin_doublet(1), am.spin_doublet(2), 2, 0)


class TestTwoQubit:
    def test_sixty_four_states(self):
        assert len(am.build_two_qubit_states()) == 64

    def test_matches_published_expansions(self, published_expansions):
        states = {s.name: s for s in am.build_two_qubit_states()}
        two = {k: v for k, v in published_expansions.items() if len(k) == 2}
        assert len(two) == 64
        for name, entry in two.items():
            np.testing.assert_allclose(states[name].vector(), oracles.printed_two_qubit(entry),
                                       atol=1e-12, err_msg=name)

    def test_labels_match_published(self, published_expansions):
        for k, label in enumerate(am.two_qubit_labels(), start=1):
            printed = published_expansions[f"{k:02d}"]["quantum_numbers"]
            assert tuple(Fraction(x) for x in printed) == tuple(Fraction(x) for x in label)


class TestThreeQubitBasis:
    def test_ninety_states_orthonormal(self, basis):
        assert basis.shape == (512, 90)
        gram = basis.T @ basis
        assert np.max(np.abs(gram - np.eye(90))) < 1e-12

    def test_sector_counts(self):
        assert am.sector_counts() == list(am.SECTOR_SIZES)
        assert sum(am.SECTOR_SIZES) == 90

    def test_matches_published_expansions(self, published_expansions):
        states = {s.name: s for s in am.build_three_qubit_basis()}
        three = {k: v for k, v in published_expansions.items() if len(k) == 3}
        assert len(three) == 90
        for name, entry in three.items():
            expected = oracles.printed_three_qubit(entry, published_expansions)
            assert np.max(np.abs(states[name].vector() - expected)) < 1e-12, name

    def test_labels_match_published(self, published_expansions):
        for state in am.build_three_qubit_basis():
            printed = published_expansions[state.name]["quantum_numbers"]
            assert tuple(Fraction(x) for x in printed) == state.label.as_tuple()

    def test_casimirs_from_pauli_oracle(self, basis):
        A, B, C = (am.qubit_spins(q) for q in range(3))
        ops = {
            "s_tot": oracles.total_spin_squared(A + B + C),
            "s_ab": oracles.total_spin_squared(A + B),
            "s_c": oracles.total_spin_squared(C),
            "s_a12": oracles.total_spin_squared(A[1:]),
        }
        for state in am.build_three_qubit_basis():
            v = state.vector()
            for name, op in ops.items():
                s = float(getattr(state.label, name))
                np.testing.assert_allclose(op @ v, s * (s + 1) * v, atol=1e-12)

    def test_internal_oracle_agrees_up_to_sign(self):
        for state in am.build_three_qubit_basis()[::7]:
            ref = am.oracle_state(state.label)
            overlap = ref @ state.vector()
            assert abs(abs(overlap) - 1) < 1e-12

    def test_label_validation(self):
        with pytest.raises(ValueError):
            am.CoupledLabel(am.HALF, am.HALF, 3, am.HALF, am.HALF, am.HALF, 0, 0, 0)
        with pytest.raises(ValueError):
            am.CoupledLabel(am.HALF, am.HALF, 0, am.HALF, am.HALF, am.HALF, 0, 0, 2)

    def test_dump_csv(self, tmp_path):
        path = tmp_path / "basis.csv"
        am.dump_basis_csv(path)
        lines = path.read_text().splitlines()
        assert len(lines) == 91
        assert lines[1].startswith("001,")
