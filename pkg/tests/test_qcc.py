"""Testing module for qcc.py"""

import itertools
import math

import numpy as np
import pytest
import scipy.linalg

from qeeqcc.gates import Circuit, Ry
from qeeqcc.pauli import PauliOperator, PauliString
from qeeqcc.qcc import (
    EntanglerBlock,
    build_circuit,
    candidate_entanglers,
    screen,
    select_blocks,
    similarity_transform,
    with_angles,
    with_replicas,
)
from qeeqcc.simulator import StatevectorEvaluator, run_statevector
from tests.oracles import pauli_matrix


def block(
    label: str, theta: float = 0.0, replicas: int = 1
) -> EntanglerBlock:
    return EntanglerBlock(PauliString.from_label(label), theta, replicas)


def unitary(circuit: Circuit) -> np.ndarray:
    dimension = 1 << circuit.n_qubits
    columns = [run_statevector(circuit, i) for i in range(dimension)]
    return np.stack(columns, axis=1)


def finite_difference(
    h: PauliOperator, pauli: PauliString, reference: int, step: float = 1e-5
) -> float:
    """Central difference of the dressed reference energy at zero angle."""
    energies = [
        similarity_transform(h, EntanglerBlock(pauli, sign * step))
        .to_matrix()[reference, reference]
        .real
        for sign in (1, -1)
    ]
    return (energies[0] - energies[1]) / (2 * step)


SCREENED = PauliOperator.from_labels(
    {"ZZ": -1.0, "XX": 0.5, "XI": 0.5, "IX": 0.2}
)


class TestEntanglerBlock:
    """Tests for a single ansatz factor."""

    @pytest.mark.parametrize(
        "labels,expected",
        [
            (["IIXY", "XIYZ", "XXIY", "XIXY"], 14),
            (["IXYII", "IIIYI", "IIIIY", "IIIXY"], 4),
        ],
    )
    def test_cnot_counts(self, labels: list[str], expected: int) -> None:
        blocks = [block(label) for label in labels]
        assert sum(b.cnot_count() for b in blocks) == expected
        n = len(labels[0])
        assert build_circuit(blocks, n).cnot_count() == expected

    @pytest.mark.parametrize("replicas", [1, 2, 3, 5])
    def test_replicas_multiply_cnots(self, replicas: int) -> None:
        blocks = [block("XXXY", 0.4, replicas)]
        assert blocks[0].cnot_count() == 6 * replicas
        assert build_circuit(blocks, 4).cnot_count() == 6 * replicas

    def test_invalid(self) -> None:
        with pytest.raises(ValueError):
            block("II")
        with pytest.raises(ValueError):
            block("XY", replicas=0)
        with pytest.raises(ValueError):
            block("XY", theta=math.inf)


class TestCircuit:
    """Tests for ladder-circuit synthesis."""

    @pytest.mark.parametrize("label", ["XY", "YZX", "ZIZ", "YYIX", "IXII"])
    @pytest.mark.parametrize("theta", [0.3, -1.1, math.pi / 2])
    def test_block_is_pauli_exponential(
        self, label: str, theta: float
    ) -> None:
        circuit = build_circuit([block(label, theta)], len(label))
        expected = scipy.linalg.expm(-0.5j * theta * pauli_matrix(label))
        assert np.allclose(unitary(circuit), expected)

    def test_replicas_keep_the_unitary(self) -> None:
        once = build_circuit([block("XZY", 0.9)], 3)
        split = build_circuit([block("XZY", 0.9, 4)], 3)
        assert np.allclose(unitary(once), unitary(split))
        assert len(split) == 4 * len(once)

    def test_blocks_apply_in_order(self) -> None:
        blocks = [block("XY", 0.4), block("ZX", -0.7)]
        first = scipy.linalg.expm(-0.2j * pauli_matrix("XY"))
        second = scipy.linalg.expm(0.35j * pauli_matrix("ZX"))
        circuit = build_circuit(blocks, 2)
        assert np.allclose(unitary(circuit), second @ first)

    def test_weight_one_block_is_a_rotation(self) -> None:
        circuit = build_circuit([block("Y", 0.3)], 1)
        assert circuit.gates == (Ry(0, 0.3),)

    def test_register_mismatch(self) -> None:
        with pytest.raises(ValueError):
            build_circuit([block("XY")], 3)

    def test_with_angles_and_replicas(self) -> None:
        blocks = [block("XY"), block("YI")]
        angled = with_angles(blocks, [0.1, 0.2])
        assert [b.theta for b in angled] == [0.1, 0.2]
        assert [b.replicas for b in with_replicas(angled, 3)] == [3, 3]
        with pytest.raises(ValueError):
            with_angles(blocks, [0.1])


class TestSimilarityTransform:
    """Tests for the closed-form U^+ H U."""

    @pytest.mark.parametrize("theta", [0.0, 0.4, -2.0])
    def test_z_under_x(self, theta: float) -> None:
        h = PauliOperator.from_labels({"Z": 1.0})
        result = similarity_transform(h, block("X", theta))
        expected = PauliOperator.from_labels(
            {"Z": math.cos(theta), "Y": math.sin(theta)}
        )
        assert result.allclose(expected)

    def test_matches_matrices(self) -> None:
        h = PauliOperator.from_labels(
            {"ZZI": 0.7, "XIX": -0.3, "IYY": 0.25, "ZII": 1.0}
        )
        b = block("XYZ", 0.8)
        u = scipy.linalg.expm(-0.4j * pauli_matrix("XYZ"))
        expected = u.conj().T @ h.to_matrix() @ u
        result = similarity_transform(h, b)
        assert result.is_hermitian()
        assert np.allclose(result.to_matrix(), expected)

    def test_dressed_energy_matches_circuit(self) -> None:
        h = PauliOperator.from_labels({"ZZ": 0.5, "XY": -0.4, "IZ": 0.3})
        b = block("YX", 1.3)
        psi = run_statevector(build_circuit([b], 2), 2)
        dressed = similarity_transform(h, b).to_matrix()[2, 2]
        assert dressed.real == pytest.approx(
            (psi.conj() @ h.to_matrix() @ psi).real
        )


class TestScreening:
    """Tests for gradient screening of entanglers."""

    def test_candidates_follow_flip_masks(self) -> None:
        labels = [p.label for p in candidate_entanglers(SCREENED)]
        assert labels == ["YI", "IY", "YX"]

    def test_single_gradient(self) -> None:
        h = PauliOperator.from_labels({"X": 1.0})
        report = screen(h, 0, candidate_entanglers(h))
        assert [p.label for p in report.top(1)] == ["Y"]
        assert report.entries[0][1] == pytest.approx(1.0)

    def test_ranking_breaks_ties_by_label(self) -> None:
        report = screen(SCREENED, 0, candidate_entanglers(SCREENED))
        assert [p.label for p, _ in report.entries] == ["YI", "YX", "IY"]
        gradients = [g for _, g in report.entries]
        assert gradients == pytest.approx([0.5, 0.5, 0.2])
        assert report.reference == 0

    def test_gradient_matches_finite_difference(self) -> None:
        h = PauliOperator.from_labels({"ZZ": 0.3, "XY": 0.6, "YX": -0.2})
        reference = 1
        report = screen(h, reference, candidate_entanglers(h), cutoff=0.0)
        for pauli, gradient in report.entries:
            finite = finite_difference(h, pauli, reference)
            assert gradient == pytest.approx(finite, abs=1e-6)

    def test_random_gradients_match_finite_differences(self) -> None:
        rng = np.random.default_rng(5)
        for _ in range(100):
            n = int(rng.integers(1, 5))
            labels = {"".join(rng.choice(list("IXYZ"), n)) for _ in range(6)}
            h = PauliOperator.from_labels({s: rng.normal() for s in labels})
            pauli = PauliString(n, 0, 0)
            while pauli.weight == 0:
                pauli = PauliString.from_label(
                    "".join(rng.choice(list("IXYZ"), n))
                )
            reference = int(rng.integers(0, 1 << n))
            report = screen(h, reference, [pauli], cutoff=0.0)
            ((_, gradient),) = report.entries
            finite = finite_difference(h, pauli, reference)
            assert gradient == pytest.approx(finite, abs=1e-6)

    def test_gradient_magnitude_depends_only_on_flip_mask(self) -> None:
        """On a real Hamiltonian, every odd-Y decoration of a flip mask has
        the same gradient magnitude and every even-Y one has none."""
        rng = np.random.default_rng(17)
        labels = [
            "".join(letters)
            for letters in itertools.product("IXYZ", repeat=3)
            if letters.count("Y") % 2 == 0
        ]
        h = PauliOperator.from_labels({s: rng.normal() for s in labels})
        for mask in range(1, 8):
            entanglers = [PauliString(3, mask, z) for z in range(8)]
            for reference in range(8):
                report = screen(h, reference, entanglers, cutoff=0.0)
                gradients = dict(report.entries)
                odd = [abs(gradients[p]) for p in entanglers if p.y_count % 2]
                even = [
                    abs(gradients[p]) for p in entanglers if not p.y_count % 2
                ]
                assert max(odd) - min(odd) <= 1e-10
                assert max(even) <= 1e-12

    def test_cutoff_drops_small_gradients(self) -> None:
        report = screen(
            SCREENED, 0, candidate_entanglers(SCREENED), cutoff=0.3
        )
        assert len(report) == 2
        assert report.cutoff == 0.3

    def test_evaluator_gradients_match_exact(self) -> None:
        exact = screen(SCREENED, 1, candidate_entanglers(SCREENED))
        measured = screen(
            SCREENED,
            1,
            candidate_entanglers(SCREENED),
            evaluator=StatevectorEvaluator(),
        )
        assert [p for p, _ in measured.entries] == [
            p for p, _ in exact.entries
        ]
        for (_, a), (_, b) in zip(exact.entries, measured.entries):
            assert a == pytest.approx(b)

    def test_select_blocks_and_text(self) -> None:
        report = screen(SCREENED, 0, candidate_entanglers(SCREENED))
        blocks = select_blocks(report, 2)
        assert [b.pauli.label for b in blocks] == ["YI", "YX"]
        assert all(b.theta == 0.0 for b in blocks)
        assert report.to_text().splitlines()[0] == "  1  YI  0.50000000"
