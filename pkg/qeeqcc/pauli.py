"""Module for Pauli-string algebra over a register of qubits.

A Pauli string is stored in symplectic form as two bit masks. Qubit j is
bit j of each mask, bit j of a computational-basis index, and character j
of the text form (qubit 0 leftmost, e.g. `IIXY`).
"""


import logging
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterator, Mapping, Union

import networkx as nx
import numpy as np
import scipy.linalg

from qeeqcc.bits import parity_array, popcount, popcount_array
from qeeqcc.gates import Gate, Hadamard, Rx


logger = logging.getLogger(__name__)


PRUNE_TOLERANCE = 1e-14
"""Terms whose coefficient magnitude is below this are dropped."""

HERMITIAN_TOLERANCE = 1e-12
"""Largest imaginary part tolerated in the coefficients of a Hermitian
operator."""

_PHASES = (1, 1j, -1, -1j)

_Number = Union[int, float, complex]


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-qubit Pauli operators, without phase."""

    n_qubits: int
    """Number of qubits in the register."""
    x_mask: int = 0
    """Qubits carrying X or Y."""
    z_mask: int = 0
    """Qubits carrying Z or Y."""

    def __post_init__(self) -> None:
        if self.n_qubits < 0:
            raise ValueError(f"Invalid register size {self.n_qubits}.")
        limit = 1 << self.n_qubits
        if not (0 <= self.x_mask < limit and 0 <= self.z_mask < limit):
            raise ValueError(
                f"Masks do not fit in {self.n_qubits} qubits: "
                f"x={self.x_mask:#x}, z={self.z_mask:#x}."
            )

    @classmethod
    def from_label(cls, label: str, /) -> "PauliString":
        """Creates a Pauli string from text such as `IXYZ`.

        Raises `ValueError` on characters other than I, X, Y, Z.
        """
        x_mask = z_mask = 0
        for j, letter in enumerate(label.upper()):
            if letter in "XY":
                x_mask |= 1 << j
            if letter in "ZY":
                z_mask |= 1 << j
            if letter not in "IXYZ":
                raise ValueError(f"Invalid Pauli letter {letter!r}.")
        return cls(len(label), x_mask, z_mask)

    @classmethod
    def identity(cls, n_qubits: int, /) -> "PauliString":
        """Returns the identity string on `n_qubits` qubits."""
        return cls(n_qubits)

    @property
    def label(self) -> str:
        """Text form, qubit 0 leftmost."""
        return "".join(self.letter(j) for j in range(self.n_qubits))

    def __str__(self) -> str:
        return self.label

    def letter(self, qubit: int, /) -> str:
        """Returns the Pauli letter acting on a qubit."""
        x = (self.x_mask >> qubit) & 1
        z = (self.z_mask >> qubit) & 1
        return "IZXY"[2 * x + z]

    @property
    def support(self) -> int:
        """Mask of the qubits acted on non-trivially."""
        return self.x_mask | self.z_mask

    @property
    def weight(self) -> int:
        """Number of non-identity factors."""
        return popcount(self.support)

    @property
    def y_count(self) -> int:
        """Number of Y factors."""
        return popcount(self.x_mask & self.z_mask)

    @property
    def is_diagonal(self) -> bool:
        """Whether the string is a product of I and Z only."""
        return self.x_mask == 0

    def support_qubits(self) -> list[int]:
        """Returns the qubits acted on non-trivially, ascending."""
        return [j for j in range(self.n_qubits) if (self.support >> j) & 1]

    def commutes(self, other: "PauliString", /) -> bool:
        """Returns whether the two strings commute as operators."""
        _check_same_register(self, other)
        return not (
            popcount(self.x_mask & other.z_mask)
            + popcount(self.z_mask & other.x_mask)
        ) % 2

    def qubitwise_commutes(self, other: "PauliString", /) -> bool:
        """Returns whether, on every qubit, the factors are equal or one of
        them is the identity."""
        _check_same_register(self, other)
        overlap = self.support & other.support
        differ = (self.x_mask ^ other.x_mask) | (self.z_mask ^ other.z_mask)
        return not (differ & overlap)

    def basis_phases(self, indices: np.ndarray, /) -> np.ndarray:
        """Returns the phases c_b with P|b> = c_b |b XOR x_mask>."""
        signs = 1 - 2 * parity_array(indices & self.z_mask)
        return _PHASES[self.y_count % 4] * signs


def _check_same_register(a: PauliString, b: PauliString, /) -> None:
    if a.n_qubits != b.n_qubits:
        raise ValueError(
            f"Register sizes differ: {a.n_qubits} vs {b.n_qubits}."
        )


def multiply(a: PauliString, b: PauliString, /) -> tuple[complex, PauliString]:
    """Returns (phase, string) with a * b = phase * string.

    Raises `ValueError` if the register sizes differ.
    """
    _check_same_register(a, b)
    product = PauliString(
        a.n_qubits, a.x_mask ^ b.x_mask, a.z_mask ^ b.z_mask
    )
    # P = i^{#Y} X^x Z^z; moving Z^{z_a} past X^{x_b} costs (-1)^{|z_a & x_b|}
    exponent = (
        a.y_count
        + b.y_count
        - product.y_count
        + 2 * popcount(a.z_mask & b.x_mask)
    )
    return _PHASES[exponent % 4], product


@dataclass(frozen=True, eq=False)
class PauliOperator:
    """Weighted sum of Pauli strings over a fixed register."""

    n_qubits: int
    """Number of qubits in the register."""
    terms: Mapping[PauliString, complex] = field(
        default_factory=lambda: MappingProxyType({})
    )
    """Map from Pauli string to coefficient. Read-only."""

    def __post_init__(self) -> None:
        cleaned: dict[PauliString, complex] = {}
        for string, coefficient in self.terms.items():
            if string.n_qubits != self.n_qubits:
                raise ValueError(
                    f"String {string} does not act on {self.n_qubits} qubits."
                )
            coefficient = complex(coefficient)
            if abs(coefficient) >= PRUNE_TOLERANCE:
                cleaned[string] = coefficient
        ordered = dict(sorted(cleaned.items(), key=lambda kv: kv[0].label))
        object.__setattr__(self, "terms", MappingProxyType(ordered))

    @classmethod
    def from_labels(
        cls, labels: Mapping[str, _Number], /
    ) -> "PauliOperator":
        """Creates an operator from `{label: coefficient}`."""
        if not labels:
            raise ValueError("Cannot infer a register size from no terms.")
        accumulated: dict[PauliString, complex] = {}
        for label, coefficient in labels.items():
            string = PauliString.from_label(label)
            accumulated[string] = accumulated.get(string, 0) + coefficient
        n_qubits = len(next(iter(labels)))
        return cls(n_qubits, accumulated)

    @classmethod
    def from_string(
        cls, string: PauliString, coefficient: _Number = 1.0, /
    ) -> "PauliOperator":
        """Creates a single-term operator."""
        return cls(string.n_qubits, {string: coefficient})

    @classmethod
    def identity(
        cls, n_qubits: int, coefficient: _Number = 1.0, /
    ) -> "PauliOperator":
        """Returns `coefficient` times the identity."""
        return cls(n_qubits, {PauliString.identity(n_qubits): coefficient})

    @classmethod
    def zero(cls, n_qubits: int, /) -> "PauliOperator":
        """Returns the zero operator."""
        return cls(n_qubits)

    #
    # Container protocol
    #

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[tuple[PauliString, complex]]:
        return iter(self.terms.items())

    def coefficient(self, string: Union[PauliString, str], /) -> complex:
        """Returns the coefficient of a string (0 if absent)."""
        if isinstance(string, str):
            string = PauliString.from_label(string)
        return self.terms.get(string, 0j)

    def strings(self) -> list[PauliString]:
        """Returns the strings with non-zero coefficient, sorted by text."""
        return list(self.terms)

    #
    # Arithmetic
    #

    def _check(self, other: "PauliOperator") -> None:
        if self.n_qubits != other.n_qubits:
            raise ValueError(
                f"Register sizes differ: {self.n_qubits} vs "
                f"{other.n_qubits}."
            )

    def __add__(self, other: "PauliOperator") -> "PauliOperator":
        self._check(other)
        result = dict(self.terms)
        for string, coefficient in other.terms.items():
            result[string] = result.get(string, 0) + coefficient
        return PauliOperator(self.n_qubits, result)

    def __neg__(self) -> "PauliOperator":
        return self * -1

    def __sub__(self, other: "PauliOperator") -> "PauliOperator":
        return self + (-other)

    def __mul__(self, scalar: _Number) -> "PauliOperator":
        return PauliOperator(
            self.n_qubits,
            {s: c * scalar for s, c in self.terms.items()},
        )

    __rmul__ = __mul__

    def __matmul__(self, other: "PauliOperator") -> "PauliOperator":
        """Operator product self * other."""
        self._check(other)
        result: dict[PauliString, complex] = {}
        for a, ca in self.terms.items():
            for b, cb in other.terms.items():
                phase, string = multiply(a, b)
                result[string] = result.get(string, 0) + phase * ca * cb
        return PauliOperator(self.n_qubits, result)

    def adjoint(self) -> "PauliOperator":
        """Returns the Hermitian conjugate."""
        return PauliOperator(
            self.n_qubits,
            {s: c.conjugate() for s, c in self.terms.items()},
        )

    def is_hermitian(self, tolerance: float = HERMITIAN_TOLERANCE) -> bool:
        """Returns whether every coefficient is real within `tolerance`."""
        return all(abs(c.imag) <= tolerance for c in self.terms.values())

    def real(self) -> "PauliOperator":
        """Returns the operator with imaginary coefficient parts removed."""
        return PauliOperator(
            self.n_qubits, {s: c.real for s, c in self.terms.items()}
        )

    def allclose(self, other: "PauliOperator", atol: float = 1e-12) -> bool:
        """Returns whether every coefficient agrees within `atol`."""
        self._check(other)
        keys = set(self.terms) | set(other.terms)
        return all(
            abs(self.coefficient(k) - other.coefficient(k)) <= atol
            for k in keys
        )

    #
    # Dense representations
    #

    def to_matrix(self) -> np.ndarray:
        """Returns the dense 2^n x 2^n matrix."""
        return pauli_to_matrix(self)

    def apply(self, vector: np.ndarray, /) -> np.ndarray:
        """Returns the operator applied to a statevector."""
        vector = np.asarray(vector, dtype=complex)
        indices = np.arange(1 << self.n_qubits)
        result = np.zeros_like(vector)
        for string, coefficient in self.terms.items():
            shifted = indices ^ string.x_mask
            # (P psi)[k] = c_{k^x} psi[k^x]
            result += (
                coefficient
                * string.basis_phases(shifted)
                * vector[shifted]
            )
        return result

    #
    # Text form
    #

    def to_text(self) -> str:
        """Returns one `coefficient string` line per term."""
        lines = []
        for string, coefficient in self.terms.items():
            if coefficient.imag == 0:
                value = f"{coefficient.real:.17g}"
            else:
                value = f"{coefficient!r}".strip("()")
            lines.append(f"{value} {string.label}")
        return "\n".join(lines) + ("\n" if lines else "")

    def __str__(self) -> str:
        return self.to_text()


def parse_pauli_operator(text: str, /) -> PauliOperator:
    """Parses `coefficient string` lines written by `to_text()`."""
    labels: dict[str, complex] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            value, label = line.split()
            coefficient = complex(value)
        except ValueError:
            raise ValueError(f"line {number}: expected 'coefficient string'")
        labels[label] = labels.get(label, 0) + coefficient
    return PauliOperator.from_labels(labels)


def commutator_half(h: PauliOperator, p: PauliString, /) -> PauliOperator:
    """Returns -(i/2)[h, p].

    Terms commuting with `p` drop out; an anticommuting term c*T gives
    -i*c*(T p).
    """
    if h.n_qubits != p.n_qubits:
        raise ValueError(
            f"Register sizes differ: {h.n_qubits} vs {p.n_qubits}."
        )
    result: dict[PauliString, complex] = {}
    for string, coefficient in h.terms.items():
        if string.commutes(p):
            continue
        phase, product = multiply(string, p)
        result[product] = result.get(product, 0) - 1j * coefficient * phase
    return PauliOperator(h.n_qubits, result)


def pauli_to_matrix(op: PauliOperator, /) -> np.ndarray:
    """Returns the dense matrix of an operator."""
    dimension = 1 << op.n_qubits
    columns = np.arange(dimension)
    matrix = np.zeros((dimension, dimension), dtype=complex)
    for string, coefficient in op.terms.items():
        rows = columns ^ string.x_mask
        matrix[rows, columns] += coefficient * string.basis_phases(columns)
    return matrix


def matrix_to_pauli(m: np.ndarray, /) -> PauliOperator:
    """Expands a dense 2^n x 2^n matrix in Pauli strings.

    The coefficient of P is Tr(P m) / 2^n. Each x_mask selects the band
    m[c, c XOR x]; a Walsh-Hadamard transform over c then yields all the
    z_mask coefficients of that band at once.

    Raises `ValueError` if the matrix is not square with a power-of-two
    size.
    """
    matrix = np.asarray(m, dtype=complex)
    dimension = matrix.shape[0] if matrix.ndim == 2 else 0
    if (
        matrix.ndim != 2
        or matrix.shape != (dimension, dimension)
        or dimension == 0
        or dimension & (dimension - 1)
    ):
        raise ValueError(
            f"Expected a square matrix of size 2^n, got {matrix.shape}."
        )
    n_qubits = dimension.bit_length() - 1
    index = np.arange(dimension)
    bands = matrix[index[:, None], index[:, None] ^ index[None, :]]
    transformed = scipy.linalg.hadamard(dimension) @ bands  # [z, x]
    y_counts = popcount_array(index[None, :] & index[:, None]) % 4
    coefficients = transformed * np.array(_PHASES)[y_counts] / dimension

    terms: dict[PauliString, complex] = {}
    for z_mask, x_mask in zip(
        *np.nonzero(np.abs(coefficients) >= PRUNE_TOLERANCE)
    ):
        terms[PauliString(n_qubits, int(x_mask), int(z_mask))] = complex(
            coefficients[z_mask, x_mask]
        )
    return PauliOperator(n_qubits, terms)


def string_expectation(p: PauliString, state: np.ndarray, /) -> complex:
    """Returns <P> in a statevector or a density matrix."""
    state = np.asarray(state)
    indices = np.arange(state.shape[0])
    shifted = indices ^ p.x_mask
    if state.ndim == 1:
        # <psi|P|psi> = sum_k conj(psi[k]) c_{k^x} psi[k^x]
        return complex(
            np.sum(state.conj() * p.basis_phases(shifted) * state[shifted])
        )
    # Tr(rho P) = sum_c c_c rho[c, c^x]
    return complex(np.sum(p.basis_phases(indices) * state[indices, shifted]))


#
# Measurement grouping
#


@dataclass(frozen=True)
class MeasurementGroup:
    """Qubit-wise commuting terms measured with one circuit."""

    terms: PauliOperator
    """The group's terms with their coefficients."""
    basis: str
    """Measurement basis per qubit (X, Y or Z), qubit 0 leftmost."""

    def rotation_gates(self) -> list[Gate]:
        """Returns the single-qubit gates that rotate the basis onto Z."""
        gates: list[Gate] = []
        for qubit, letter in enumerate(self.basis):
            if letter == "X":
                gates.append(Hadamard(qubit))
            elif letter == "Y":
                gates.append(Rx(qubit, np.pi / 2))
        return gates

    @property
    def is_computational(self) -> bool:
        """Whether the group is measured in the computational basis."""
        return set(self.basis) <= {"Z"}


def group_commuting(op: PauliOperator, /) -> list[MeasurementGroup]:
    """Partitions the terms into qubit-wise commuting groups.

    Greedy colouring of the non-commutation graph, visiting terms by
    descending coefficient magnitude (ties by text).
    """
    ordered = sorted(op.terms, key=lambda s: (-abs(op.terms[s]), s.label))
    graph = nx.Graph()
    graph.add_nodes_from(ordered)
    for position, a in enumerate(ordered):
        for b in ordered[position + 1:]:
            if not a.qubitwise_commutes(b):
                graph.add_edge(a, b)
    coloring = nx.coloring.greedy_color(
        graph, strategy=lambda g, colors: iter(ordered)
    )

    members: dict[int, list[PauliString]] = {}
    for string in ordered:
        members.setdefault(coloring[string], []).append(string)

    groups = []
    for color in sorted(members):
        strings = members[color]
        basis = []
        for qubit in range(op.n_qubits):
            letters = {s.letter(qubit) for s in strings} - {"I"}
            basis.append(letters.pop() if letters else "Z")
        groups.append(
            MeasurementGroup(
                PauliOperator(
                    op.n_qubits, {s: op.terms[s] for s in strings}
                ),
                "".join(basis),
            )
        )
    logger.debug("Grouped %d terms into %d groups", len(op), len(groups))
    return groups
