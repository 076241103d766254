"""Module for gate and circuit objects.

Rotations follow R_A(theta) = exp(-i theta A / 2).
"""


import math
from abc import abstractmethod
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Gate:
    """Base class for all gate objects."""

    @property
    @abstractmethod
    def qubits(self) -> tuple[int, ...]:
        """Qubits acted on; for two-qubit gates, (control, target)."""

    @abstractmethod
    def matrix(self) -> np.ndarray:
        """Returns the unitary on `qubits`, the first qubit being the most
        significant index of the matrix."""

    @abstractmethod
    def display_str(self) -> str:
        """Returns a string representation of this gate for display."""

    def is_two_qubit(self) -> bool:
        """Returns whether the gate acts on two qubits."""
        return len(self.qubits) == 2


@dataclass(frozen=True)
class _SingleQubitGate(Gate):
    """Represents a gate acting on one qubit."""

    qubit: int

    def __post_init__(self) -> None:
        if self.qubit < 0:
            raise ValueError(f"Invalid qubit index {self.qubit}.")

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.qubit,)


@dataclass(frozen=True)
class _Rotation(_SingleQubitGate):
    """Represents a single-qubit rotation by an angle in radians."""

    theta: float

    def __post_init__(self) -> None:
        super().__post_init__()
        if not math.isfinite(self.theta):
            raise ValueError(f"Rotation angle {self.theta} is not finite.")

    def display_str(self) -> str:
        name = type(self).__name__.lower()
        return f"{name}({self.theta:.6g}) q{self.qubit}"


@dataclass(frozen=True)
class Rx(_Rotation):
    """Represents exp(-i theta X / 2)."""

    def matrix(self) -> np.ndarray:
        c, s = math.cos(self.theta / 2), math.sin(self.theta / 2)
        return np.array([[c, -1j * s], [-1j * s, c]])


@dataclass(frozen=True)
class Ry(_Rotation):
    """Represents exp(-i theta Y / 2)."""

    def matrix(self) -> np.ndarray:
        c, s = math.cos(self.theta / 2), math.sin(self.theta / 2)
        return np.array([[c, -s], [s, c]], dtype=complex)


@dataclass(frozen=True)
class Rz(_Rotation):
    """Represents exp(-i theta Z / 2)."""

    def matrix(self) -> np.ndarray:
        phase = np.exp(-0.5j * self.theta)
        return np.array([[phase, 0], [0, phase.conjugate()]])


@dataclass(frozen=True)
class Hadamard(_SingleQubitGate):
    """Represents the Hadamard gate."""

    def matrix(self) -> np.ndarray:
        return np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)

    def display_str(self) -> str:
        return f"h q{self.qubit}"


@dataclass(frozen=True)
class CNOT(Gate):
    """Represents a controlled NOT."""

    control: int
    target: int

    def __post_init__(self) -> None:
        if self.control < 0 or self.target < 0:
            raise ValueError("Invalid qubit index.")
        if self.control == self.target:
            raise ValueError("CNOT control and target must differ.")

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.control, self.target)

    def matrix(self) -> np.ndarray:
        return np.array(
            [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]],
            dtype=complex,
        )

    def display_str(self) -> str:
        return f"cx q{self.control}, q{self.target}"


@dataclass(frozen=True)
class Circuit:
    """Ordered gate sequence on a fixed register."""

    n_qubits: int
    """Number of qubits in the register."""
    gates: tuple[Gate, ...] = field(default_factory=tuple)
    """Gates in application order."""

    def __post_init__(self) -> None:
        if self.n_qubits < 1:
            raise ValueError(f"Invalid register size {self.n_qubits}.")
        gates = tuple(self.gates)
        for gate in gates:
            if max(gate.qubits) >= self.n_qubits:
                raise ValueError(
                    f"Gate {gate.display_str()} does not fit in "
                    f"{self.n_qubits} qubits."
                )
        object.__setattr__(self, "gates", gates)

    def __len__(self) -> int:
        return len(self.gates)

    def then(self, *gates: Gate) -> "Circuit":
        """Returns a new circuit with `gates` appended."""
        return Circuit(self.n_qubits, self.gates + gates)

    def cnot_count(self) -> int:
        """Returns the number of two-qubit gates."""
        return sum(1 for gate in self.gates if gate.is_two_qubit())

    def display_str(self) -> str:
        """Returns one gate per line."""
        return "\n".join(gate.display_str() for gate in self.gates)
