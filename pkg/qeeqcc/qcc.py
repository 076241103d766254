"""Module for the qubit coupled-cluster ansatz without a mean-field layer.

Entanglers are screened by the energy gradient at zero angle,
dE/dtheta = <ref| -(i/2)[H, P] |ref>, and compiled into ladder circuits
of exp(-i theta P / 2) blocks, each optionally split into n replicas of
angle theta / n for zero-noise extrapolation.
"""


import logging
import math
from dataclasses import dataclass, replace
from typing import Iterable, Optional, Sequence

from qeeqcc.bits import popcount
from qeeqcc.gates import CNOT, Circuit, Gate, Hadamard, Rx, Ry, Rz
from qeeqcc.pauli import PauliOperator, PauliString, commutator_half
from qeeqcc.simulator import Evaluator


logger = logging.getLogger(__name__)


DEFAULT_CUTOFF = 1e-8
"""Gradient magnitudes below this (hartree/radian) are not reported."""

DEFAULT_TOP_K = 4
"""Default number of entanglers kept for the ansatz."""


@dataclass(frozen=True)
class EntanglerBlock:
    """One ansatz factor exp(-i theta P / 2), split into `replicas` equal
    parts."""

    pauli: PauliString
    """Generator P."""
    theta: float = 0.0
    """Angle in radians."""
    replicas: int = 1
    """Number n of factors exp(-i (theta / n) P / 2)."""

    def __post_init__(self) -> None:
        if self.pauli.weight < 1:
            raise ValueError("An entangler cannot be the identity.")
        if self.replicas < 1:
            raise ValueError(f"Invalid replica count {self.replicas}.")
        if not math.isfinite(self.theta):
            raise ValueError(f"Angle {self.theta} is not finite.")

    def cnot_count(self) -> int:
        """Returns 2 (weight - 1) replicas."""
        return 2 * (self.pauli.weight - 1) * self.replicas


@dataclass(frozen=True)
class ScreeningReport:
    """Entanglers ranked by descending gradient magnitude."""

    entries: tuple[tuple[PauliString, float], ...]
    """(entangler, signed gradient in hartree/radian), ranked."""
    reference: int
    """Basis index of the reference state."""
    cutoff: float = DEFAULT_CUTOFF
    """Magnitude below which entanglers were dropped."""

    def __len__(self) -> int:
        return len(self.entries)

    def top(self, k: int, /) -> list[PauliString]:
        """Returns the `k` highest-ranked entanglers."""
        return [pauli for pauli, _ in self.entries[:k]]

    def to_text(self) -> str:
        """Returns `rank string |gradient|` lines."""
        return "".join(
            f"{rank:>3}  {pauli.label}  {abs(gradient):.8f}\n"
            for rank, (pauli, gradient) in enumerate(self.entries, start=1)
        )


def candidate_entanglers(hq: PauliOperator, /) -> list[PauliString]:
    """Returns one entangler per distinct flip mask of the Hamiltonian.

    The representative carries Y on the lowest qubit of the mask and X on
    the others, ordered by mask value.
    """
    masks = sorted({s.x_mask for s, _ in hq if s.x_mask})
    candidates = []
    for mask in masks:
        lowest = mask & -mask
        candidates.append(PauliString(hq.n_qubits, mask, lowest))
    return candidates


def screen(
    hq: PauliOperator,
    reference: int,
    candidates: Iterable[PauliString],
    /,
    cutoff: float = DEFAULT_CUTOFF,
    evaluator: Optional[Evaluator] = None,
) -> ScreeningReport:
    """Ranks entanglers by |dE/dtheta| at theta = 0 in the reference basis
    state.

    Without an evaluator the gradients are exact; otherwise the
    computational-basis (diagonal) part of each commutator is measured on
    the empty circuit.
    """
    empty = Circuit(hq.n_qubits)
    entries = []
    for pauli in candidates:
        commutator = commutator_half(hq, pauli)
        diagonal = PauliOperator(
            hq.n_qubits, {s: c for s, c in commutator if s.is_diagonal}
        ).real()
        if evaluator is None:
            gradient = sum(
                c.real * (1 - 2 * (popcount(s.z_mask & reference) % 2))
                for s, c in diagonal
            )
        else:
            gradient, _ = evaluator.energy(diagonal, empty, reference)
        entries.append((pauli, float(gradient)))

    kept = [(p, g) for p, g in entries if abs(g) >= cutoff]
    kept.sort(key=lambda entry: (-abs(entry[1]), entry[0].label))
    logger.info(
        "Screened %d entanglers: %d above cutoff %g",
        len(entries),
        len(kept),
        cutoff,
    )
    return ScreeningReport(tuple(kept), reference, cutoff)


def select_blocks(
    report: ScreeningReport, k: int = DEFAULT_TOP_K, /
) -> list[EntanglerBlock]:
    """Returns zero-angle blocks for the `k` top-ranked entanglers."""
    return [EntanglerBlock(pauli) for pauli in report.top(k)]


def with_angles(
    blocks: Sequence[EntanglerBlock], thetas: Iterable[float], /
) -> list[EntanglerBlock]:
    """Returns copies of the blocks with new angles."""
    thetas = list(thetas)
    if len(thetas) != len(blocks):
        raise ValueError(
            f"Expected {len(blocks)} angles, got {len(thetas)}."
        )
    return [replace(b, theta=float(t)) for b, t in zip(blocks, thetas)]


def with_replicas(
    blocks: Sequence[EntanglerBlock], replicas: int, /
) -> list[EntanglerBlock]:
    """Returns copies of the blocks with a new replica count."""
    return [replace(b, replicas=replicas) for b in blocks]


def similarity_transform(
    hq: PauliOperator, block: EntanglerBlock, /
) -> PauliOperator:
    """Returns U^+ H U for U = exp(-i theta P / 2) in closed form:

    H + sin(theta) C + i (1 - cos(theta)) P C, with C = -(i/2)[H, P].
    """
    p = PauliOperator.from_string(block.pauli)
    commutator = commutator_half(hq, block.pauli)
    theta = block.theta
    result = (
        hq
        + commutator * math.sin(theta)
        + (p @ commutator) * (1j * (1 - math.cos(theta)))
    )
    return result.real() if hq.is_hermitian() else result


#
# Circuit synthesis
#


def _exponential_gates(pauli: PauliString, angle: float) -> list[Gate]:
    """Returns the gates of exp(-i angle P / 2)."""
    support = pauli.support_qubits()
    if len(support) == 1:
        (qubit,) = support
        rotation = {"X": Rx, "Y": Ry, "Z": Rz}[pauli.letter(qubit)]
        return [rotation(qubit, angle)]

    before: list[Gate] = []
    after: list[Gate] = []
    for qubit in support:
        letter = pauli.letter(qubit)
        if letter == "X":
            before.append(Hadamard(qubit))
            after.append(Hadamard(qubit))
        elif letter == "Y":
            before.append(Rx(qubit, math.pi / 2))
            after.append(Rx(qubit, -math.pi / 2))
    ladder: list[Gate] = [
        CNOT(control, target) for control, target in zip(support, support[1:])
    ]
    return (
        before
        + ladder
        + [Rz(support[-1], angle)]
        + ladder[::-1]
        + after
    )


def build_circuit(
    blocks: Sequence[EntanglerBlock], n_qubits: int, /
) -> Circuit:
    """Compiles the blocks, in order, into a ladder circuit.

    Raises `ValueError` if a block does not act on `n_qubits` qubits.
    """
    gates: list[Gate] = []
    for block in blocks:
        if block.pauli.n_qubits != n_qubits:
            raise ValueError(
                f"Entangler {block.pauli} does not act on {n_qubits} qubits."
            )
        angle = block.theta / block.replicas
        replica = _exponential_gates(block.pauli, angle)
        gates.extend(replica * block.replicas)
    return Circuit(n_qubits, tuple(gates))
