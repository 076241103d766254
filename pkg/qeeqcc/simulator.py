"""Module for gate-level simulation of circuits.

Two exact backends (statevector, density matrix with depolarizing noise)
and a shot-sampling layer with tensored readout error, confusion-matrix
mitigation and post-selection. The `Evaluator` classes wrap them behind one
interface used by the solvers.
"""


import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from qeeqcc.bits import bit_string, parity_array
from qeeqcc.errors import EmptyResultError, MitigationError, ResourceLimitError
from qeeqcc.gates import Circuit, Gate
from qeeqcc.pauli import (
    MeasurementGroup,
    PauliOperator,
    PauliString,
    group_commuting,
    string_expectation,
)


logger = logging.getLogger(__name__)


MAX_DENSITY_QUBITS = 8
"""Largest register the density-matrix backend accepts."""

DEFAULT_SHOTS = 8192
"""Default number of shots per measurement group."""

HERMITIAN_TOLERANCE = 1e-10
"""Largest imaginary part tolerated in an exact expectation value."""


@dataclass(frozen=True)
class NoiseModel:
    """Depolarizing gate noise plus tensored readout flips."""

    p2: float = 0.01
    """Two-qubit depolarizing probability applied after each CNOT."""
    p1: float = 0.001
    """Single-qubit depolarizing probability applied after each
    single-qubit gate."""
    e01: float = 0.0
    """Probability of reading 0 when the qubit is in |1>."""
    e10: float = 0.0
    """Probability of reading 1 when the qubit is in |0>."""
    per_qubit_readout: tuple[tuple[float, float], ...] = ()
    """Optional (e01, e10) per qubit, overriding the uniform values for the
    qubits it covers."""

    def __post_init__(self) -> None:
        values = [self.p2, self.p1, self.e01, self.e10]
        values.extend(e for pair in self.per_qubit_readout for e in pair)
        for value in values:
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"Probability {value} outside [0, 1].")

    @classmethod
    def noiseless(cls) -> "NoiseModel":
        """Returns the model without any error."""
        return cls(p2=0.0, p1=0.0)

    @property
    def has_gate_noise(self) -> bool:
        return self.p1 > 0 or self.p2 > 0

    def readout(self, n_qubits: int, /) -> list[tuple[float, float]]:
        """Returns (e01, e10) for each qubit of a register."""
        pairs = list(self.per_qubit_readout[:n_qubits])
        pairs += [(self.e01, self.e10)] * (n_qubits - len(pairs))
        return pairs

    def has_readout_error(self, n_qubits: int, /) -> bool:
        return any(a or b for a, b in self.readout(n_qubits))


#
# Exact backends
#


def _apply_unitary(
    tensor: np.ndarray, gate: Gate, n_qubits: int, offset: int = 0
) -> np.ndarray:
    """Contracts a gate matrix into the qubit axes of a state tensor.

    Qubit j lives on axis offset + n_qubits - 1 - j.
    """
    k = len(gate.qubits)
    matrix = gate.matrix().reshape((2,) * (2 * k))
    axes = [offset + n_qubits - 1 - q for q in gate.qubits]
    tensor = np.tensordot(matrix, tensor, axes=(list(range(k, 2 * k)), axes))
    return np.moveaxis(tensor, list(range(k)), axes)


def _basis_state(n_qubits: int, initial: int) -> np.ndarray:
    dimension = 1 << n_qubits
    if not 0 <= initial < dimension:
        raise ValueError(
            f"Initial index {initial} outside the range 0..{dimension - 1}."
        )
    state = np.zeros(dimension, dtype=complex)
    state[initial] = 1.0
    return state


def run_statevector(c: Circuit, /, initial: int = 0) -> np.ndarray:
    """Returns the statevector produced by `c` from basis state |initial>."""
    n = c.n_qubits
    tensor = _basis_state(n, initial).reshape((2,) * n)
    for gate in c.gates:
        tensor = _apply_unitary(tensor, gate, n)
    return tensor.reshape(-1)


def _fully_depolarize(
    rho: np.ndarray, qubit: int, n_qubits: int
) -> np.ndarray:
    """Replaces one qubit of a density tensor by the maximally mixed
    state."""
    row = n_qubits - 1 - qubit
    column = row + n_qubits
    reduced = np.trace(rho, axis1=row, axis2=column)
    mixed = reduced[..., None, None] * (np.eye(2) / 2)
    return np.moveaxis(mixed, [-2, -1], [row, column])


def _depolarize(
    rho: np.ndarray, qubits: Sequence[int], p: float, n_qubits: int
) -> np.ndarray:
    # replacing each qubit in turn replaces the whole set by I / 2^k
    if p == 0:
        return rho
    mixed = rho
    for qubit in qubits:
        mixed = _fully_depolarize(mixed, qubit, n_qubits)
    return (1 - p) * rho + p * mixed


def run_density_matrix(
    c: Circuit, /, initial: int = 0, noise: Optional[NoiseModel] = None
) -> np.ndarray:
    """Returns the density matrix produced by `c` under depolarizing noise.

    After each CNOT the pair is depolarized with probability `noise.p2`,
    after each single-qubit gate its qubit with probability `noise.p1`.
    Readout errors are not part of the state.

    Raises `ResourceLimitError` above `MAX_DENSITY_QUBITS` qubits.
    """
    n = c.n_qubits
    if n > MAX_DENSITY_QUBITS:
        raise ResourceLimitError(
            f"Density-matrix simulation of {n} qubits exceeds the limit of "
            f"{MAX_DENSITY_QUBITS}."
        )
    if noise is None:
        noise = NoiseModel.noiseless()
    state = _basis_state(n, initial)
    rho = np.outer(state, state.conj()).reshape((2,) * (2 * n))
    for gate in c.gates:
        rho = _apply_unitary(rho, gate, n)
        rho = np.conj(_apply_unitary(np.conj(rho), gate, n, offset=n))
        p = noise.p2 if gate.is_two_qubit() else noise.p1
        rho = _depolarize(rho, gate.qubits, p, n)
    dimension = 1 << n
    return rho.reshape(dimension, dimension)


def basis_probabilities(state: np.ndarray, /) -> np.ndarray:
    """Returns the computational-basis distribution of a statevector or a
    density matrix."""
    state = np.asarray(state)
    if state.ndim == 1:
        probabilities = np.abs(state) ** 2
    else:
        probabilities = np.real(np.diagonal(state)).copy()
    probabilities = np.clip(probabilities, 0.0, None)
    return probabilities / probabilities.sum()


def expectation(op: PauliOperator, state: np.ndarray, /) -> float:
    """Returns the exact <op> in a statevector or density matrix.

    Raises `ValueError` if the operator is not Hermitian.
    """
    if not op.is_hermitian():
        raise ValueError("Expectation requires a Hermitian operator.")
    value = sum(
        (c * string_expectation(s, state) for s, c in op),
        start=0j,
    )
    if abs(value.imag) > HERMITIAN_TOLERANCE * max(1.0, abs(value)):
        raise ValueError(f"Expectation {value} is not real.")
    return value.real


#
# Readout error
#


def _confusion(e01: float, e10: float) -> np.ndarray:
    # column = true bit, row = read bit
    return np.array([[1 - e10, e01], [e10, 1 - e01]])


def _apply_per_qubit(
    probabilities: np.ndarray, matrices: Sequence[np.ndarray]
) -> np.ndarray:
    n = len(matrices)
    tensor = np.asarray(probabilities, dtype=float).reshape((2,) * n)
    for qubit, matrix in enumerate(matrices):
        axis = n - 1 - qubit
        tensor = np.moveaxis(
            np.tensordot(matrix, tensor, axes=([1], [axis])), 0, axis
        )
    return tensor.reshape(-1)


def apply_readout_confusion(
    probabilities: np.ndarray, readout: Sequence[tuple[float, float]], /
) -> np.ndarray:
    """Returns the distribution read out through tensored confusion
    matrices; `readout` lists (e01, e10) per qubit."""
    return _apply_per_qubit(
        probabilities, [_confusion(e01, e10) for e01, e10 in readout]
    )


def mitigate_distribution(
    probabilities: np.ndarray, readout: Sequence[tuple[float, float]], /
) -> np.ndarray:
    """Inverts tensored confusion matrices on a distribution, clamps
    negative quasi-probabilities to 0 and renormalizes.

    Raises `MitigationError` if a confusion matrix is singular.
    """
    inverses = []
    for qubit, (e01, e10) in enumerate(readout):
        if abs(1 - e01 - e10) < 1e-12:
            raise MitigationError(
                f"Readout confusion of qubit {qubit} is singular "
                f"(e01={e01}, e10={e10})."
            )
        inverses.append(np.linalg.inv(_confusion(e01, e10)))
    quasi = _apply_per_qubit(probabilities, inverses)
    clamped = np.clip(quasi, 0.0, None)
    total = clamped.sum()
    if total <= 0:
        raise MitigationError("Mitigated distribution has no weight.")
    return clamped / total


@dataclass(frozen=True)
class MeasurementResult:
    """Outcome counts of repeated computational-basis measurements."""

    n_qubits: int
    """Register size."""
    counts: Mapping[int, int]
    """Occurrences of each basis index."""
    shots: int
    """Total number of retained shots."""
    post_selected: bool = False
    """Whether unphysical outcomes were removed."""

    def __post_init__(self) -> None:
        if sum(self.counts.values()) != self.shots:
            raise ValueError("Counts do not add up to the shot count.")

    def distribution(self) -> np.ndarray:
        """Returns the empirical distribution over all basis indices."""
        probabilities = np.zeros(1 << self.n_qubits)
        for index, count in self.counts.items():
            probabilities[index] = count
        return probabilities / self.shots

    def to_text(self) -> str:
        """Returns `bitstring count` lines, qubit 0 leftmost."""
        return "".join(
            f"{bit_string(index, self.n_qubits)} {count}\n"
            for index, count in sorted(self.counts.items())
        )


def sample_counts(
    probabilities: np.ndarray, shots: int, rng: np.random.Generator, /
) -> MeasurementResult:
    """Draws `shots` outcomes from a distribution."""
    if shots < 1:
        raise ValueError(f"Invalid shot count {shots}.")
    probabilities = np.clip(np.asarray(probabilities, dtype=float), 0, None)
    draws = rng.multinomial(shots, probabilities / probabilities.sum())
    n_qubits = (len(probabilities) - 1).bit_length()
    counts = {int(i): int(draws[i]) for i in np.nonzero(draws)[0]}
    return MeasurementResult(n_qubits, counts, shots)


def post_select(
    r: MeasurementResult, physical: Iterable[int], /
) -> MeasurementResult:
    """Keeps only the counts of physical basis indices.

    Raises `EmptyResultError` if no count survives.
    """
    allowed = set(physical)
    counts = {i: c for i, c in r.counts.items() if i in allowed}
    shots = sum(counts.values())
    if shots == 0:
        raise EmptyResultError("Post-selection removed every measurement.")
    return MeasurementResult(r.n_qubits, counts, shots, post_selected=True)


def mitigate_readout(
    r: MeasurementResult, readout: Sequence[tuple[float, float]], /
) -> np.ndarray:
    """Returns the mitigated distribution of a measurement result (see
    `mitigate_distribution`)."""
    if len(readout) != r.n_qubits:
        raise ValueError(
            f"Expected {r.n_qubits} readout pairs, got {len(readout)}."
        )
    return mitigate_distribution(r.distribution(), readout)


def _restrict(probabilities: np.ndarray, physical_count: int) -> np.ndarray:
    restricted = probabilities.copy()
    restricted[physical_count:] = 0.0
    total = restricted.sum()
    if total <= 0:
        raise EmptyResultError("Post-selection removed every measurement.")
    return restricted / total


#
# Evaluators
#


@dataclass(frozen=True)
class Evaluation:
    """Per-string expectation values and the resulting energy."""

    energy: float
    """Weighted sum of the expectation values (hartree)."""
    stderr: float
    """Standard error of `energy` (0 for exact backends)."""
    expectations: Mapping[PauliString, float] = field(default_factory=dict)
    """Expectation value of every string of the operator."""
    errors: Mapping[PauliString, float] = field(default_factory=dict)
    """Standard error of each expectation value."""


class Evaluator(ABC):
    """Estimates expectation values of Pauli operators in the state a
    circuit prepares from a basis state."""

    @property
    @abstractmethod
    def is_exact(self) -> bool:
        """Whether results are free of noise and sampling error."""

    @abstractmethod
    def evaluate(
        self, op: PauliOperator, circuit: Circuit, initial: int = 0, /
    ) -> Evaluation:
        """Returns expectation values of every term of `op`."""

    def energy(
        self, op: PauliOperator, circuit: Circuit, initial: int = 0, /
    ) -> tuple[float, float]:
        """Returns (energy, standard error)."""
        result = self.evaluate(op, circuit, initial)
        return result.energy, result.stderr


def _exact_evaluation(op: PauliOperator, state: np.ndarray) -> Evaluation:
    if not op.is_hermitian():
        raise ValueError("Expectation requires a Hermitian operator.")
    expectations = {s: string_expectation(s, state).real for s, _ in op}
    energy = sum(c.real * expectations[s] for s, c in op)
    return Evaluation(
        float(energy), 0.0, expectations, {s: 0.0 for s in expectations}
    )


@dataclass(frozen=True)
class StatevectorEvaluator(Evaluator):
    """Exact, noiseless expectation values."""

    @property
    def is_exact(self) -> bool:
        return True

    def evaluate(
        self, op: PauliOperator, circuit: Circuit, initial: int = 0, /
    ) -> Evaluation:
        return _exact_evaluation(op, run_statevector(circuit, initial))


@dataclass(frozen=True)
class _GroupedEvaluator(Evaluator):
    """Measures each qubit-wise commuting group in its rotated basis."""

    noise: NoiseModel = field(default_factory=NoiseModel)
    """Gate and readout noise."""
    mitigate_readout: bool = False
    """Whether to invert the readout confusion."""
    physical_count: Optional[int] = None
    """If set, computational-basis groups keep only outcomes below this
    index."""

    def _rotated_distribution(
        self, group: MeasurementGroup, circuit: Circuit, initial: int
    ) -> np.ndarray:
        rotated = circuit.then(*group.rotation_gates())
        if self.noise.has_gate_noise:
            state = run_density_matrix(rotated, initial, self.noise)
        else:
            state = run_statevector(rotated, initial)
        probabilities = basis_probabilities(state)
        return apply_readout_confusion(
            probabilities, self.noise.readout(circuit.n_qubits)
        )

    def _finish(
        self, group: MeasurementGroup, measured: np.ndarray, n_qubits: int
    ) -> np.ndarray:
        if self.mitigate_readout and self.noise.has_readout_error(n_qubits):
            measured = mitigate_distribution(
                measured, self.noise.readout(n_qubits)
            )
        if self.physical_count is not None and group.is_computational:
            measured = _restrict(measured, self.physical_count)
        return measured

    @abstractmethod
    def _group_distribution(
        self,
        group: MeasurementGroup,
        circuit: Circuit,
        initial: int,
        seed: Optional[np.random.SeedSequence],
    ) -> tuple[np.ndarray, int]:
        """Returns the estimated outcome distribution of a group and the
        number of shots behind it (0 for exact)."""

    def _seeds(self, count: int) -> list[Optional[np.random.SeedSequence]]:
        return [None] * count

    def evaluate(
        self, op: PauliOperator, circuit: Circuit, initial: int = 0, /
    ) -> Evaluation:
        if not op.is_hermitian():
            raise ValueError("Expectation requires a Hermitian operator.")
        if op.n_qubits != circuit.n_qubits:
            raise ValueError(
                f"Operator acts on {op.n_qubits} qubits, circuit on "
                f"{circuit.n_qubits}."
            )
        n = op.n_qubits
        identity = PauliString.identity(n)
        expectations: dict[PauliString, float] = {}
        errors: dict[PauliString, float] = {}
        energy = op.coefficient(identity).real
        variance = 0.0
        if identity in op.terms:
            expectations[identity], errors[identity] = 1.0, 0.0

        rest = PauliOperator(
            n, {s: c for s, c in op if s != identity}
        )
        groups = group_commuting(rest)
        outcomes = np.arange(1 << n)
        for group, seed in zip(groups, self._seeds(len(groups))):
            distribution, shots = self._group_distribution(
                group, circuit, initial, seed
            )
            # signs[k, b] = eigenvalue of string k on outcome b
            strings = group.terms.strings()
            signs = np.array(
                [1 - 2 * parity_array(outcomes & s.support) for s in strings]
            )
            coefficients = np.array(
                [group.terms.terms[s].real for s in strings]
            )
            means = signs @ distribution
            values = coefficients @ signs
            group_mean = float(values @ distribution)
            energy += group_mean
            for s, mean in zip(strings, means):
                expectations[s] = float(mean)
                errors[s] = (
                    float(np.sqrt(max(0.0, 1 - mean**2) / shots))
                    if shots
                    else 0.0
                )
            if shots:
                spread = float(((values - group_mean) ** 2) @ distribution)
                variance += spread / shots
            logger.debug(
                "Group %s: %d terms, mean %.10f",
                group.basis,
                len(strings),
                group_mean,
            )
        return Evaluation(
            float(energy), float(np.sqrt(variance)), expectations, errors
        )


@dataclass(frozen=True)
class DensityMatrixEvaluator(_GroupedEvaluator):
    """Exact expectation values under gate and readout noise, without
    sampling."""

    @property
    def is_exact(self) -> bool:
        return False

    def _group_distribution(
        self,
        group: MeasurementGroup,
        circuit: Circuit,
        initial: int,
        seed: Optional[np.random.SeedSequence],
    ) -> tuple[np.ndarray, int]:
        measured = self._rotated_distribution(group, circuit, initial)
        return self._finish(group, measured, circuit.n_qubits), 0

    def evaluate(
        self, op: PauliOperator, circuit: Circuit, initial: int = 0, /
    ) -> Evaluation:
        n = circuit.n_qubits
        if self.noise.has_readout_error(n) or self.physical_count is not None:
            return super().evaluate(op, circuit, initial)
        return _exact_evaluation(
            op, run_density_matrix(circuit, initial, self.noise)
        )


@dataclass(frozen=True)
class SampledEvaluator(_GroupedEvaluator):
    """Shot-sampled expectation values, one circuit per measurement
    group."""

    shots: int = DEFAULT_SHOTS
    """Shots per measurement group."""
    seed: int = 0
    """Seed of the per-group random streams."""

    def __post_init__(self) -> None:
        if self.shots < 1:
            raise ValueError(f"Invalid shot count {self.shots}.")

    @property
    def is_exact(self) -> bool:
        return False

    def _seeds(self, count: int) -> list[Optional[np.random.SeedSequence]]:
        return list(np.random.SeedSequence(self.seed).spawn(count))

    def _group_distribution(
        self,
        group: MeasurementGroup,
        circuit: Circuit,
        initial: int,
        seed: Optional[np.random.SeedSequence],
    ) -> tuple[np.ndarray, int]:
        measured = self._rotated_distribution(group, circuit, initial)
        result = sample_counts(
            measured, self.shots, np.random.default_rng(seed)
        )
        n = circuit.n_qubits
        mitigating = (
            self.mitigate_readout and self.noise.has_readout_error(n)
        )
        selecting = self.physical_count is not None and group.is_computational
        if selecting and not mitigating:
            result = post_select(result, range(self.physical_count or 0))
            return result.distribution(), result.shots

        measured = result.distribution()
        if mitigating:
            measured = mitigate_distribution(measured, self.noise.readout(n))
        kept = self.shots
        if selecting:
            physical = self.physical_count or 0
            kept = max(1, round(self.shots * measured[:physical].sum()))
            measured = _restrict(measured, physical)
        return measured, kept


def sample_grouped(
    op: PauliOperator,
    c: Circuit,
    noise: NoiseModel,
    shots_per_group: int,
    seed: int,
    /,
    initial: int = 0,
    mitigate: bool = False,
    physical_count: Optional[int] = None,
) -> tuple[float, float]:
    """Returns (energy estimate, standard error) from grouped shot
    sampling; deterministic for a given seed.

    Raises `ValueError` for a non-positive shot count.
    """
    evaluator = SampledEvaluator(
        noise, mitigate, physical_count, shots_per_group, seed
    )
    return evaluator.energy(op, c, initial)
