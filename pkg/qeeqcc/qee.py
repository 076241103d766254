"""Module for the qubit-efficient encoding of a fixed-spin determinant sector.

The Q determinants of a sector (m_up, m_down) are sorted by diagonal energy
and mapped onto the computational basis of ceil(log2 Q) qubits, index i
being the lowest-energy determinant when i = 0. Sector operators are
assembled as dense Q x Q matrices and expanded in Pauli strings.
"""


import itertools
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from qeeqcc.bits import (
    bit_string,
    bits_from_positions,
    popcount,
    popcount_array,
    set_bits,
)
from qeeqcc.hamiltonian import SectorSpec, SpinOrbitalHamiltonian
from qeeqcc.pauli import PauliOperator, matrix_to_pauli


logger = logging.getLogger(__name__)


SORT_DECIMALS = 10
"""Diagonal energies are rounded to this many decimals before sorting."""

PADDING_MARGIN = 1.0
"""Default padding penalty above the largest physical diagonal energy
(hartree)."""


@dataclass(frozen=True)
class SlaterDeterminant:
    """Occupation pattern of the two spin channels."""

    up_bits: int
    """Occupied spin-up orbitals; bit p is spatial orbital p."""
    down_bits: int
    """Occupied spin-down orbitals; bit p is spatial orbital p."""
    n_spatial_orbitals: int
    """Width of each half."""

    @classmethod
    def from_combined(
        cls, bits: int, n_spatial_orbitals: int, /
    ) -> "SlaterDeterminant":
        """Splits a blocked spin-orbital bit pattern into its halves."""
        mask = (1 << n_spatial_orbitals) - 1
        return cls(
            bits & mask, bits >> n_spatial_orbitals, n_spatial_orbitals
        )

    @property
    def combined(self) -> int:
        """Blocked spin-orbital bit pattern, spin-up in the low bits."""
        return self.up_bits | (self.down_bits << self.n_spatial_orbitals)

    @property
    def m_up(self) -> int:
        return popcount(self.up_bits)

    @property
    def m_down(self) -> int:
        return popcount(self.down_bits)

    def occupied(self) -> list[int]:
        """Returns the occupied spin-orbital indices, ascending."""
        return set_bits(self.combined)

    def is_occupied(self, p: int, /) -> bool:
        return bool((self.combined >> p) & 1)

    def display_str(self) -> str:
        """Returns `up|down` occupation strings, orbital 0 leftmost."""
        n = self.n_spatial_orbitals
        up, down = bit_string(self.up_bits, n), bit_string(self.down_bits, n)
        return f"{up}|{down}"


def enumerate_sector(
    n_spin_orbitals: int, sector: SectorSpec, /
) -> list[SlaterDeterminant]:
    """Returns every determinant of the sector, ascending by combined bit
    value.

    Raises `ValueError` if the sector counts are out of range.
    """
    if n_spin_orbitals <= 0 or n_spin_orbitals % 2:
        raise ValueError(f"Invalid spin-orbital count {n_spin_orbitals}.")
    sector.validate(n_spin_orbitals)
    n = n_spin_orbitals // 2
    ups = [
        bits_from_positions(c)
        for c in itertools.combinations(range(n), sector.m_up)
    ]
    downs = [
        bits_from_positions(c)
        for c in itertools.combinations(range(n), sector.m_down)
    ]
    determinants = [
        SlaterDeterminant(up, down, n) for down in downs for up in ups
    ]
    determinants.sort(key=lambda d: d.combined)
    return determinants


def sector_size(n_spin_orbitals: int, sector: SectorSpec, /) -> int:
    """Returns Q = C(N/2, m_up) * C(N/2, m_down)."""
    sector.validate(n_spin_orbitals)
    n = n_spin_orbitals // 2
    return math.comb(n, sector.m_up) * math.comb(n, sector.m_down)


def qubit_count(q_physical: int, /) -> int:
    """Returns ceil(log2 Q), promoted to 1 for a single determinant."""
    if q_physical < 1:
        raise ValueError(f"Invalid sector size {q_physical}.")
    return max(1, (q_physical - 1).bit_length())


#
# Second-quantized matrix elements
#


def apply_ladder(
    bits: int, operators: Sequence[tuple[int, bool]], /
) -> Optional[tuple[int, int]]:
    """Applies a product of ladder operators to a determinant.

    `operators` lists (spin orbital, is_creation) left to right as written
    in the product; the rightmost acts first. Returns (sign, new bits), or
    None if the product annihilates the determinant. The sign counts the
    occupied orbitals below each acted-on index.
    """
    sign = 1
    for p, creation in reversed(operators):
        occupied = (bits >> p) & 1
        if occupied == creation:
            return None
        if popcount(bits & ((1 << p) - 1)) % 2:
            sign = -sign
        bits ^= 1 << p
    return sign, bits


def _connecting_sign(ket: int, operators: Sequence[tuple[int, bool]]) -> int:
    result = apply_ladder(ket, operators)
    assert result is not None
    return result[0]


def diagonal_energy(
    h: SpinOrbitalHamiltonian, determinant: SlaterDeterminant, /
) -> float:
    """Returns <f|H|f>, core energy included."""
    occ = np.array(determinant.occupied(), dtype=int)
    if occ.size == 0:
        return h.core_energy
    t = h.one_body[occ, occ].sum()
    v = h.two_body[np.ix_(occ, occ, occ, occ)]
    return float(
        h.core_energy
        + t
        + 0.5 * np.einsum("pqpq->", v)
        - 0.5 * np.einsum("pqqp->", v)
    )


def sector_hamiltonian_matrix(
    h: SpinOrbitalHamiltonian, determinants: Sequence[SlaterDeterminant], /
) -> np.ndarray:
    """Returns the dense matrix <f_i|H|f_j> over the given determinants.

    Slater-Condon rules: pairs differing in one spin orbital take the
    one-body element plus the mean field of the shared occupations, pairs
    differing in two take the antisymmetrized two-body element, all others
    vanish.
    """
    t, v = h.one_body, h.two_body
    size = len(determinants)
    bits = np.array([d.combined for d in determinants], dtype=np.int64)
    matrix = np.zeros((size, size))
    for i, determinant in enumerate(determinants):
        matrix[i, i] = diagonal_energy(h, determinant)

    for j in range(size):
        distances = popcount_array(bits ^ bits[j])
        for i in np.nonzero((distances == 2) | (distances == 4))[0]:
            if i >= j:
                continue
            bra, ket = int(bits[i]), int(bits[j])
            created = set_bits(bra & ~ket)
            removed = set_bits(ket & ~bra)
            if len(created) == 1:
                (p,), (q,) = created, removed
                sign = _connecting_sign(ket, [(p, True), (q, False)])
                shared = [k for k in set_bits(ket) if k != q]
                value = t[p, q] + sum(
                    v[p, k, q, k] - v[p, k, k, q] for k in shared
                )
            else:
                (p, q), (r, s) = created, removed
                sign = _connecting_sign(
                    ket, [(p, True), (q, True), (s, False), (r, False)]
                )
                value = v[p, q, r, s] - v[p, q, s, r]
            matrix[i, j] = matrix[j, i] = sign * value
    return matrix


#
# Encoding
#


@dataclass(frozen=True)
class QeeEncoding:
    """Energy-ordered bijection between sector determinants and qubit basis
    indices."""

    sector: SectorSpec
    """Electron counts of the encoded sector."""
    n_spin_orbitals: int
    """Number of spin orbitals N of the source Hamiltonian."""
    determinants: tuple[SlaterDeterminant, ...]
    """Determinant encoded by each basis index, ascending in energy."""
    diagonal_energies: tuple[float, ...]
    """Diagonal energy of each determinant (hartree, core included)."""
    padding_penalty: float
    """Diagonal value given to unphysical padding indices (hartree)."""

    def __post_init__(self) -> None:
        combined = [d.combined for d in self.determinants]
        if len(set(combined)) != len(combined):
            raise ValueError("Encoded determinants are not distinct.")
        if len(self.diagonal_energies) != len(self.determinants):
            raise ValueError("One diagonal energy per determinant expected.")

    @property
    def q_physical(self) -> int:
        """Number of determinants Q."""
        return len(self.determinants)

    @property
    def n_qubits(self) -> int:
        """Register size ceil(log2 Q) (at least 1)."""
        return qubit_count(self.q_physical)

    @property
    def dimension(self) -> int:
        """Size 2^n_qubits of the qubit space."""
        return 1 << self.n_qubits

    @property
    def n_padding(self) -> int:
        """Number of unphysical basis indices Q..2^n_qubits-1."""
        return self.dimension - self.q_physical

    @property
    def reference_index(self) -> int:
        """Basis index of the lowest-energy determinant."""
        return 0

    def physical_indices(self) -> range:
        return range(self.q_physical)

    def hole_counts(self) -> tuple[int, int]:
        """Returns the unoccupied orbital counts (c_up, c_down)."""
        n = self.n_spin_orbitals // 2
        return n - self.sector.m_up, n - self.sector.m_down

    def index_of(self, determinant: SlaterDeterminant, /) -> int:
        """Returns the basis index of a determinant."""
        return self._index_by_bits()[determinant.combined]

    def _index_by_bits(self) -> dict[int, int]:
        cached = self.__dict__.get("_index_cache")
        if cached is None:
            cached = {d.combined: i for i, d in enumerate(self.determinants)}
            object.__setattr__(self, "_index_cache", cached)
        return cached

    def to_text(self) -> str:
        """Returns the table `i  up_bits  down_bits  E_diag`, one line per
        index."""
        n = self.n_spin_orbitals // 2
        width = len(str(self.q_physical - 1))
        lines = [
            f"{i:>{width}}  {bit_string(d.up_bits, n)}  "
            f"{bit_string(d.down_bits, n)}  {e:.10f}"
            for i, (d, e) in enumerate(
                zip(self.determinants, self.diagonal_energies)
            )
        ]
        return "\n".join(lines) + "\n"


def build_encoding(
    h: SpinOrbitalHamiltonian,
    sector: SectorSpec,
    /,
    padding_penalty: Optional[float] = None,
) -> QeeEncoding:
    """Builds the energy-sorted encoding of a sector.

    Determinants are ordered by diagonal energy (rounded to `SORT_DECIMALS`
    decimals), ties by combined bit value. The padding penalty defaults to
    the largest diagonal energy plus `PADDING_MARGIN`.
    """
    determinants = enumerate_sector(h.n_spin_orbitals, sector)
    energies = [diagonal_energy(h, d) for d in determinants]
    order = sorted(
        range(len(determinants)),
        key=lambda k: (
            round(energies[k], SORT_DECIMALS),
            determinants[k].combined,
        ),
    )
    if padding_penalty is None:
        padding_penalty = max(energies) + PADDING_MARGIN
    encoding = QeeEncoding(
        sector,
        h.n_spin_orbitals,
        tuple(determinants[k] for k in order),
        tuple(energies[k] for k in order),
        float(padding_penalty),
    )
    logger.info(
        "Encoded sector (%d, %d): Q=%d determinants on %d qubits, "
        "%d padding states",
        sector.m_up,
        sector.m_down,
        encoding.q_physical,
        encoding.n_qubits,
        encoding.n_padding,
    )
    return encoding


def embed_sector_matrix(
    enc: QeeEncoding,
    sector_matrix: np.ndarray,
    /,
    padding_value: Optional[float] = None,
) -> np.ndarray:
    """Embeds a Q x Q matrix into the 2^n_qubits space.

    Padded rows and columns are zero except their diagonal, which is
    `padding_value` (the encoding's penalty by default).
    """
    matrix = np.asarray(sector_matrix)
    q = enc.q_physical
    if matrix.shape != (q, q):
        raise ValueError(
            f"Expected a {q} x {q} sector matrix, got {matrix.shape}."
        )
    if padding_value is None:
        padding_value = enc.padding_penalty
    embedded = np.zeros((enc.dimension, enc.dimension), dtype=complex)
    embedded[:q, :q] = matrix
    padding = np.arange(q, enc.dimension)
    embedded[padding, padding] = padding_value
    return embedded


def encode_sector_operator(
    enc: QeeEncoding,
    sector_matrix: np.ndarray,
    /,
    padding_value: Optional[float] = None,
) -> PauliOperator:
    """Returns the Pauli expansion of a sector operator.

    Raises `ValueError` if the matrix is not Q x Q.
    """
    return matrix_to_pauli(
        embed_sector_matrix(enc, sector_matrix, padding_value=padding_value)
    )


def build_qubit_hamiltonian(
    h: SpinOrbitalHamiltonian, enc: QeeEncoding, /
) -> PauliOperator:
    """Returns the encoded Hamiltonian H_q = sum_i g_i P_i."""
    if h.n_spin_orbitals != enc.n_spin_orbitals:
        raise ValueError(
            f"Hamiltonian has {h.n_spin_orbitals} spin orbitals, encoding "
            f"has {enc.n_spin_orbitals}."
        )
    matrix = sector_hamiltonian_matrix(h, enc.determinants)
    hq = encode_sector_operator(enc, matrix)
    if not hq.is_hermitian():
        raise ValueError("Encoded Hamiltonian is not Hermitian.")
    hq = hq.real()
    logger.info("Qubit Hamiltonian has %d Pauli terms", len(hq))
    return hq


#
# Excitation operators
#


def _check_orbital(enc: QeeEncoding, p: int) -> None:
    if not 0 <= p < enc.n_spin_orbitals:
        raise ValueError(
            f"Spin orbital {p} is outside the range "
            f"0..{enc.n_spin_orbitals - 1}."
        )


def ladder_matrix(
    enc: QeeEncoding, operators: Sequence[tuple[int, bool]], /
) -> np.ndarray:
    """Returns the Q x Q matrix of a ladder-operator product within the
    sector (see `apply_ladder` for the `operators` format).

    Raises `ValueError` if the product changes either spin count.
    """
    n = enc.n_spin_orbitals // 2
    balance = [0, 0]
    for p, creation in operators:
        _check_orbital(enc, p)
        balance[p // n] += 1 if creation else -1
    if balance != [0, 0]:
        raise ValueError(
            f"Ladder product {list(operators)} does not conserve the "
            "electron count of each spin."
        )
    index = enc._index_by_bits()
    matrix = np.zeros((enc.q_physical, enc.q_physical))
    for j, determinant in enumerate(enc.determinants):
        result = apply_ladder(determinant.combined, operators)
        if result is not None:
            sign, bits = result
            matrix[index[bits], j] = sign
    return matrix


def excitation_matrix(enc: QeeEncoding, p: int, q: int, /) -> np.ndarray:
    """Returns the sector matrix of E_pq = a+_p a_q.

    Raises `ValueError` if p and q have different spins.
    """
    return ladder_matrix(enc, [(p, True), (q, False)])


def double_excitation_matrix(
    enc: QeeEncoding, a: int, b: int, j: int, i: int, /
) -> np.ndarray:
    """Returns the sector matrix of a+_a a+_b a_j a_i."""
    return ladder_matrix(enc, [(a, True), (b, True), (j, False), (i, False)])


def reference_excitations(
    enc: QeeEncoding, /, max_rank: Optional[int] = None
) -> list[tuple[str, np.ndarray]]:
    """Returns the excitation operators out of the reference determinant.

    For each determinant whose excitation rank relative to the reference
    is at most `max_rank` (every rank if None), the operator creates the
    newly occupied and annihilates the vacated spin orbitals, both in
    ascending order. Rank 0 is the identity. Labels read `a,b<-i,j`.
    """
    reference = enc.determinants[enc.reference_index].combined
    operators: list[tuple[int, str, np.ndarray]] = []
    for determinant in enc.determinants:
        created = set_bits(determinant.combined & ~reference)
        removed = set_bits(reference & ~determinant.combined)
        if max_rank is not None and len(created) > max_rank:
            continue
        if not created:
            operators.append((0, "1", np.eye(enc.q_physical)))
            continue
        product = [(p, True) for p in created] + [
            (q, False) for q in reversed(removed)
        ]
        label = (
            ",".join(map(str, created)) + "<-" + ",".join(map(str, removed))
        )
        operators.append((len(created), label, ladder_matrix(enc, product)))
    operators.sort(key=lambda item: item[:2])
    return [(label, matrix) for _, label, matrix in operators]
