"""Module for excited states by quantum subspace expansion.

The subspace is spanned by excitation operators O_k applied to the prepared
state. Its matrices H_kl = <O_k^+ H O_l> and S_kl = <O_k^+ O_l> are
obtained from measured Pauli-string expectation values: those values
determine the prepared state's density matrix on the entries the operator
products touch, and the matrices follow by contraction.
"""


import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from qeeqcc.bits import popcount_array
from qeeqcc.errors import DegenerateSubspaceError
from qeeqcc.gates import Circuit
from qeeqcc.hamiltonian import SpinOrbitalHamiltonian
from qeeqcc.pauli import PauliOperator, PauliString
from qeeqcc.qcc import EntanglerBlock, build_circuit, with_replicas
from qeeqcc.qee import (
    QeeEncoding,
    reference_excitations,
    sector_hamiltonian_matrix,
)
from qeeqcc.simulator import Evaluator
from qeeqcc.zne import DEFAULT_REPLICAS, extrapolate_arrays


logger = logging.getLogger(__name__)


EXACT_THRESHOLD = 1e-8
"""Overlap eigenvalue cutoff for exact evaluators."""

NOISY_THRESHOLD = 1e-3
"""Overlap eigenvalue cutoff for noisy or sampled evaluators."""

OPERATOR_MODES = ("singles-doubles", "full-sector")
"""Supported operator sets."""

_PHASES = np.array([1, 1j, -1, -1j])


@dataclass(frozen=True)
class QseResult:
    """Solution of the subspace generalized eigenproblem."""

    hamiltonian: np.ndarray
    """H^QSE in hartree."""
    overlap: np.ndarray
    """S^QSE."""
    retained: int
    """Dimension kept by canonical orthogonalization."""
    eigenvalues: np.ndarray
    """Hartree, ascending."""
    eigenvectors: np.ndarray
    """Coefficients over the operators, one column per eigenvalue."""
    labels: tuple[str, ...] = ()
    """Name of each expansion operator."""

    def excitation_energies(
        self, ground_energy: Optional[float] = None, /
    ) -> np.ndarray:
        """Returns eigenvalues minus the ground energy (the lowest
        eigenvalue by default), excluding the lowest eigenvalue."""
        if ground_energy is None:
            ground_energy = float(self.eigenvalues[0])
        return self.eigenvalues[1:] - ground_energy


def qse_operators(
    enc: QeeEncoding, mode: str = "singles-doubles", /
) -> list[tuple[str, np.ndarray]]:
    """Returns the (label, Q x Q matrix) expansion operators.

    `singles-doubles` keeps the identity and the single and double
    excitations of the reference determinant; `full-sector` keeps every
    excitation rank, which spans the sector.
    """
    if mode == "singles-doubles":
        return reference_excitations(enc, max_rank=2)
    if mode == "full-sector":
        return reference_excitations(enc)
    raise ValueError(f"Unknown QSE operator mode {mode!r}.")


def _flip_masks(patterns: Sequence[np.ndarray]) -> list[int]:
    masks: set[int] = set()
    for pattern in patterns:
        rows, columns = np.nonzero(pattern)
        masks.update((rows ^ columns).tolist())
    return sorted(masks)


def measured_density_matrix(
    enc: QeeEncoding,
    circuit: Circuit,
    evaluator: Evaluator,
    x_masks: Sequence[int],
    /,
    initial: int = 0,
) -> np.ndarray:
    """Returns the physical block of the prepared density matrix, rebuilt
    from the expectation values of all strings with the given flip masks.

    rho = sum_P <P> P / 2^n; entries whose row and column differ by a mask
    outside `x_masks` are left at zero.
    """
    n = enc.n_qubits
    dimension = enc.dimension
    strings = [
        PauliString(n, x, z) for x in x_masks for z in range(dimension)
    ]
    strings_sum = PauliOperator(n, {s: 1.0 for s in strings})
    evaluation = evaluator.evaluate(strings_sum, circuit, initial)

    walsh = scipy.linalg.hadamard(dimension)
    z_masks = np.arange(dimension)
    columns = np.arange(dimension)
    rho = np.zeros((dimension, dimension), dtype=complex)
    for x in x_masks:
        values = np.array(
            [
                evaluation.expectations.get(PauliString(n, x, int(z)), 0.0)
                for z in z_masks
            ]
        )
        # P[c ^ x, c] = i^{|x & z|} (-1)^{|z & c|}
        phased = values * _PHASES[popcount_array(z_masks & x) % 4]
        rho[columns ^ x, columns] = walsh @ phased / dimension
    q = enc.q_physical
    return rho[:q, :q]


def qse_matrices(
    h: SpinOrbitalHamiltonian,
    enc: QeeEncoding,
    ground_circuit: Circuit,
    evaluator: Evaluator,
    operators: Sequence[np.ndarray],
    /,
    initial: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """Returns (H^QSE, S^QSE) for the given Q x Q expansion operators."""
    if not operators:
        raise ValueError("At least one expansion operator is required.")
    sector_h = sector_hamiltonian_matrix(h, enc.determinants)
    stacked = np.array(operators, dtype=float)
    reach = np.abs(stacked).sum(axis=0)
    touched = [reach.T @ np.abs(sector_h) @ reach, reach.T @ reach]
    rho = measured_density_matrix(
        enc, ground_circuit, evaluator, _flip_masks(touched), initial=initial
    )
    # Tr(O_k^T M O_l rho) for M = H and M = 1
    h_ops = np.einsum("ab,lbc->lac", sector_h, stacked)
    h_qse = np.einsum("kca,lcb,ba->kl", stacked, h_ops, rho, optimize=True)
    s_qse = np.einsum("kca,lcb,ba->kl", stacked, stacked, rho, optimize=True)
    return h_qse, s_qse


def solve_qse(
    h_qse: np.ndarray, s_qse: np.ndarray, threshold: float, /
) -> QseResult:
    """Solves H c = e S c by canonical orthogonalization.

    Overlap eigenvectors with eigenvalue at or below `threshold` are
    discarded. Raises `DegenerateSubspaceError` if none remains.
    """
    h_sym = 0.5 * (h_qse + h_qse.conj().T)
    s_sym = 0.5 * (s_qse + s_qse.conj().T)
    overlaps, vectors = scipy.linalg.eigh(s_sym)
    keep = overlaps > threshold
    if not np.any(keep):
        raise DegenerateSubspaceError(
            f"No overlap eigenvalue above {threshold:g} "
            f"(largest {overlaps.max():.3g})."
        )
    transform = vectors[:, keep] / np.sqrt(overlaps[keep])
    reduced = transform.conj().T @ h_sym @ transform
    eigenvalues, reduced_vectors = scipy.linalg.eigh(reduced)
    logger.debug(
        "QSE kept %d of %d overlap directions", keep.sum(), len(overlaps)
    )
    return QseResult(
        h_qse,
        s_qse,
        int(keep.sum()),
        eigenvalues,
        transform @ reduced_vectors,
    )


def _default_threshold(evaluator: Evaluator) -> float:
    return EXACT_THRESHOLD if evaluator.is_exact else NOISY_THRESHOLD


def qse(
    h: SpinOrbitalHamiltonian,
    enc: QeeEncoding,
    ground_circuit: Circuit,
    evaluator: Evaluator,
    /,
    mode: str = "singles-doubles",
    threshold: Optional[float] = None,
    operators: Optional[Sequence[tuple[str, np.ndarray]]] = None,
    initial: int = 0,
) -> QseResult:
    """Runs quantum subspace expansion on the state `ground_circuit`
    prepares from basis state `initial`.

    `operators` overrides the set chosen by `mode`.
    """
    if operators is None:
        operators = qse_operators(enc, mode)
    if threshold is None:
        threshold = _default_threshold(evaluator)
    labels = tuple(label for label, _ in operators)
    h_qse, s_qse = qse_matrices(
        h,
        enc,
        ground_circuit,
        evaluator,
        [m for _, m in operators],
        initial=initial,
    )
    result = solve_qse(h_qse, s_qse, threshold)
    logger.info(
        "QSE over %d operators (%d retained): lowest %.10f Eh",
        len(labels),
        result.retained,
        result.eigenvalues[0],
    )
    return QseResult(
        result.hamiltonian,
        result.overlap,
        result.retained,
        result.eigenvalues,
        result.eigenvectors,
        labels,
    )


def zne_qse(
    h: SpinOrbitalHamiltonian,
    enc: QeeEncoding,
    blocks: Sequence[EntanglerBlock],
    evaluator: Evaluator,
    /,
    replicas: Sequence[int] = DEFAULT_REPLICAS,
    degree_diagonal: int = 2,
    degree_off_diagonal: int = 1,
    mode: str = "singles-doubles",
    threshold: Optional[float] = None,
    initial: int = 0,
) -> QseResult:
    """Runs QSE at each replica count, extrapolates every matrix element
    to zero noise and solves the extrapolated problem.

    Diagonal elements use `degree_diagonal`, off-diagonal elements
    `degree_off_diagonal`.
    """
    operators = qse_operators(enc, mode)
    matrices = [m for _, m in operators]
    h_points, s_points = [], []
    for n in replicas:
        circuit = build_circuit(with_replicas(blocks, n), enc.n_qubits)
        h_n, s_n = qse_matrices(
            h, enc, circuit, evaluator, matrices, initial=initial
        )
        h_points.append(h_n)
        s_points.append(s_n)

    scales = [float(n) for n in replicas]
    diagonal = np.eye(len(matrices), dtype=bool)
    extrapolated = []
    for points in (h_points, s_points):
        full = extrapolate_arrays(scales, points, degree_diagonal)
        off = extrapolate_arrays(scales, points, degree_off_diagonal)
        extrapolated.append(np.where(diagonal, full, off))

    if threshold is None:
        threshold = _default_threshold(evaluator)
    result = solve_qse(extrapolated[0], extrapolated[1], threshold)
    logger.info(
        "Extrapolated QSE (degrees %d/%d): lowest %.10f Eh",
        degree_diagonal,
        degree_off_diagonal,
        result.eigenvalues[0],
    )
    return QseResult(
        result.hamiltonian,
        result.overlap,
        result.retained,
        result.eigenvalues,
        result.eigenvectors,
        tuple(label for label, _ in operators),
    )
