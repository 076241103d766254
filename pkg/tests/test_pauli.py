"""Testing module for pauli.py"""

import itertools

import numpy as np
import pytest

from qeeqcc.gates import Hadamard, Rx
from qeeqcc.pauli import (
    PauliOperator,
    PauliString,
    commutator_half,
    group_commuting,
    matrix_to_pauli,
    multiply,
    parse_pauli_operator,
    pauli_to_matrix,
    string_expectation,
)
from tests.oracles import operator_matrix, pauli_matrix, random_hermitian


def labels(n: int) -> list[str]:
    return ["".join(t) for t in itertools.product("IXYZ", repeat=n)]


class TestPauliString:
    """Tests for the symplectic Pauli string."""

    def test_label_round_trip(self) -> None:
        string = PauliString.from_label("IXYZ")
        assert string.x_mask == 0b0110
        assert string.z_mask == 0b1100
        assert string.label == "IXYZ"
        assert str(string) == "IXYZ"

    def test_properties(self) -> None:
        string = PauliString.from_label("YIXZ")
        assert string.weight == 3
        assert string.y_count == 1
        assert string.support_qubits() == [0, 2, 3]
        assert not string.is_diagonal
        assert PauliString.from_label("ZIZ").is_diagonal
        assert PauliString.identity(3).label == "III"

    @pytest.mark.parametrize("label", ["IXA", "xq"])
    def test_invalid_letter(self, label: str) -> None:
        with pytest.raises(ValueError):
            PauliString.from_label(label)

    def test_masks_must_fit(self) -> None:
        with pytest.raises(ValueError):
            PauliString(2, x_mask=4)

    def test_commutes(self) -> None:
        for a, b in itertools.product(labels(2), repeat=2):
            pa, pb = pauli_matrix(a), pauli_matrix(b)
            expected = np.allclose(pa @ pb, pb @ pa)
            assert (
                PauliString.from_label(a).commutes(PauliString.from_label(b))
                == expected
            )

    @pytest.mark.parametrize(
        "a,b,expected",
        [
            ("XZ", "XI", True),
            ("XZ", "IZ", True),
            ("XZ", "ZZ", False),
            ("XX", "YY", False),
            ("II", "YZ", True),
        ],
    )
    def test_qubitwise_commutes(self, a: str, b: str, expected: bool) -> None:
        pa, pb = PauliString.from_label(a), PauliString.from_label(b)
        assert pa.qubitwise_commutes(pb) == expected

    def test_register_mismatch(self) -> None:
        with pytest.raises(ValueError):
            PauliString.from_label("X").commutes(PauliString.from_label("XX"))

    def test_multiply_matches_matrices(self) -> None:
        for a, b in itertools.product(labels(2), repeat=2):
            phase, string = multiply(
                PauliString.from_label(a), PauliString.from_label(b)
            )
            assert np.allclose(
                pauli_matrix(a) @ pauli_matrix(b),
                phase * pauli_matrix(string.label),
            )

    @pytest.mark.parametrize(
        "a,b,phase,product",
        [("X", "Y", 1j, "Z"), ("Y", "X", -1j, "Z"), ("Z", "Z", 1, "I")],
    )
    def test_multiply_examples(
        self, a: str, b: str, phase: complex, product: str
    ) -> None:
        result = multiply(PauliString.from_label(a), PauliString.from_label(b))
        assert result == (phase, PauliString.from_label(product))


class TestPauliOperator:
    """Tests for weighted sums of Pauli strings."""

    def test_terms_are_pruned_and_sorted(self) -> None:
        op = PauliOperator.from_labels({"ZI": 1.0, "IX": 1e-16, "XI": 0.5})
        assert len(op) == 2
        assert [s.label for s in op.strings()] == ["XI", "ZI"]
        assert op.coefficient("IX") == 0
        assert op.coefficient(PauliString.from_label("ZI")) == 1.0

    def test_terms_are_read_only(self) -> None:
        op = PauliOperator.identity(1)
        with pytest.raises(TypeError):
            op.terms[PauliString.from_label("X")] = 1.0  # type: ignore

    def test_arithmetic(self) -> None:
        a = PauliOperator.from_labels({"XI": 1.0, "ZZ": 2.0})
        b = PauliOperator.from_labels({"XI": -1.0, "IY": 0.5})
        assert (a + b).allclose(
            PauliOperator.from_labels({"ZZ": 2.0, "IY": 0.5})
        )
        assert (a - a).allclose(PauliOperator.zero(2))
        assert len(a - a) == 0
        assert (2 * a).coefficient("ZZ") == 4.0
        assert (a * 2).coefficient("XI") == 2.0
        assert (-a).coefficient("XI") == -1.0

    def test_product_matches_matrices(self, instance_count: int) -> None:
        rng = np.random.default_rng(3)
        for _ in range(instance_count):
            chosen = rng.choice(labels(2), size=4, replace=False)
            a = PauliOperator.from_labels(
                {str(lab): rng.normal() for lab in chosen[:2]}
            )
            b = PauliOperator.from_labels(
                {str(lab): rng.normal() + 1j for lab in chosen[2:]}
            )
            assert np.allclose(
                (a @ b).to_matrix(), a.to_matrix() @ b.to_matrix()
            )

    def test_adjoint_and_hermiticity(self) -> None:
        op = PauliOperator.from_labels({"X": 1 + 2j, "Z": 1.0})
        assert not op.is_hermitian()
        assert op.adjoint().coefficient("X") == 1 - 2j
        assert op.real().is_hermitian()
        assert np.allclose(
            op.adjoint().to_matrix(), op.to_matrix().conj().T
        )

    def test_register_mismatch(self) -> None:
        with pytest.raises(ValueError):
            PauliOperator.identity(1) + PauliOperator.identity(2)
        with pytest.raises(ValueError):
            PauliOperator(1, {PauliString.from_label("XX"): 1.0})

    def test_to_matrix_matches_kronecker(self) -> None:
        terms = {"IXY": 0.3, "ZZI": -1.2, "YIX": 0.7j}
        op = PauliOperator.from_labels(terms)
        assert np.allclose(op.to_matrix(), operator_matrix(terms))
        assert np.allclose(pauli_to_matrix(op), operator_matrix(terms))

    def test_apply_matches_matrix(self) -> None:
        rng = np.random.default_rng(0)
        op = PauliOperator.from_labels({"XY": 0.4, "ZI": 1.0, "YY": -0.2})
        vector = rng.normal(size=4) + 1j * rng.normal(size=4)
        assert np.allclose(op.apply(vector), op.to_matrix() @ vector)

    def test_text_round_trip(self) -> None:
        op = PauliOperator.from_labels({"XY": 0.1, "ZI": -2.0, "YY": 0.5j})
        again = parse_pauli_operator(op.to_text())
        assert again.allclose(op, atol=0.0)

    def test_parse_accumulates_and_skips_comments(self) -> None:
        op = parse_pauli_operator("# comment\n0.5 XZ\n\n0.25 XZ\n1 II\n")
        assert op.coefficient("XZ") == 0.75
        assert op.coefficient("II") == 1.0

    def test_parse_rejects_bad_lines(self) -> None:
        with pytest.raises(ValueError, match="line 2"):
            parse_pauli_operator("0.5 XZ\nXZ\n")


class TestDenseConversion:
    """Tests for the Walsh-Hadamard expansion of matrices."""

    def test_recovers_every_string(self) -> None:
        for label in labels(2):
            op = matrix_to_pauli(pauli_matrix(label))
            assert op.allclose(PauliOperator.from_labels({label: 1.0}))

    def test_random_hermitian(self, instance_count: int) -> None:
        for seed in range(instance_count):
            matrix = random_hermitian(8, seed)
            op = matrix_to_pauli(matrix)
            assert op.is_hermitian()
            assert np.allclose(op.to_matrix(), matrix)

    @pytest.mark.parametrize("shape", [(3, 3), (2, 4), (4,)])
    def test_rejects_bad_shapes(self, shape: tuple[int, ...]) -> None:
        with pytest.raises(ValueError):
            matrix_to_pauli(np.zeros(shape))


class TestCommutator:
    """Tests for -(i/2)[H, P]."""

    def test_matches_matrices(self) -> None:
        h = PauliOperator.from_labels(
            {"XX": 0.5, "ZI": -1.0, "IY": 0.3, "YZ": 0.2}
        )
        for label in labels(2)[1:]:
            p = PauliString.from_label(label)
            hm, pm = h.to_matrix(), pauli_matrix(label)
            expected = -0.5j * (hm @ pm - pm @ hm)
            assert np.allclose(commutator_half(h, p).to_matrix(), expected)

    def test_commuting_terms_drop_out(self) -> None:
        h = PauliOperator.from_labels({"ZZ": 1.0})
        assert len(commutator_half(h, PauliString.from_label("XX"))) == 0

    def test_x_with_y_gives_z(self) -> None:
        h = PauliOperator.from_labels({"X": 1.0})
        result = commutator_half(h, PauliString.from_label("Y"))
        assert result.allclose(PauliOperator.from_labels({"Z": 1.0}))


class TestExpectation:
    """Tests for single-string expectation values."""

    def test_statevector_and_density_matrix(self) -> None:
        rng = np.random.default_rng(5)
        psi = rng.normal(size=4) + 1j * rng.normal(size=4)
        psi /= np.linalg.norm(psi)
        rho = np.outer(psi, psi.conj())
        for label in labels(2):
            expected = psi.conj() @ pauli_matrix(label) @ psi
            string = PauliString.from_label(label)
            assert string_expectation(string, psi) == pytest.approx(expected)
            assert string_expectation(string, rho) == pytest.approx(expected)


class TestGrouping:
    """Tests for qubit-wise commuting measurement groups."""

    def test_groups_partition_the_terms(self) -> None:
        op = PauliOperator.from_labels(
            {
                "ZZI": 1.0,
                "ZIZ": 0.9,
                "XXI": 0.5,
                "IXX": 0.4,
                "YYI": 0.3,
                "IIZ": 0.2,
                "XIY": 0.1,
            }
        )
        groups = group_commuting(op)
        collected = PauliOperator.zero(3)
        for group in groups:
            collected = collected + group.terms
            strings = group.terms.strings()
            for a, b in itertools.combinations(strings, 2):
                assert a.qubitwise_commutes(b)
            for string in strings:
                for qubit in string.support_qubits():
                    assert group.basis[qubit] == string.letter(qubit)
        assert collected.allclose(op)

    def test_largest_term_is_in_first_group(self) -> None:
        op = PauliOperator.from_labels({"XX": 0.1, "ZZ": 2.0, "ZI": 0.5})
        groups = group_commuting(op)
        assert groups[0].basis == "ZZ"
        assert groups[0].is_computational
        assert len(groups) == 2

    def test_rotation_gates(self) -> None:
        op = PauliOperator.from_labels({"XYZ": 1.0})
        (group,) = group_commuting(op)
        assert group.basis == "XYZ"
        assert group.rotation_gates() == [Hadamard(0), Rx(1, np.pi / 2)]
