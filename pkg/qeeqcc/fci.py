"""Module for exact diagonalization of a determinant sector."""


import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from qeeqcc.errors import ResourceLimitError
from qeeqcc.hamiltonian import SectorSpec, SpinOrbitalHamiltonian
from qeeqcc.qee import (
    SlaterDeterminant,
    enumerate_sector,
    sector_hamiltonian_matrix,
    sector_size,
)


logger = logging.getLogger(__name__)


DENSE_LIMIT = 4096
"""Largest sector diagonalized densely."""


@dataclass(frozen=True)
class FciResult:
    """Lowest eigenpairs of a sector Hamiltonian."""

    energies: np.ndarray
    """Eigenvalues in hartree, ascending."""
    vectors: np.ndarray
    """Q x k eigenvectors, one column per energy, in determinant order."""
    determinants: tuple[SlaterDeterminant, ...]
    """Basis of the eigenvectors (ascending combined bit value)."""


def fci_solve(
    h: SpinOrbitalHamiltonian,
    sector: SectorSpec,
    k: int = 1,
    /,
    dense_limit: int = DENSE_LIMIT,
) -> FciResult:
    """Returns the `k` lowest eigenpairs of the sector Hamiltonian (all of
    them if the sector is smaller).

    Raises `ResourceLimitError` if the sector has more than `dense_limit`
    determinants.
    """
    if k < 1:
        raise ValueError(f"Invalid number of states {k}.")
    q = sector_size(h.n_spin_orbitals, sector)
    if q > dense_limit:
        raise ResourceLimitError(
            f"Sector of {q} determinants exceeds the dense limit "
            f"{dense_limit}."
        )
    determinants = enumerate_sector(h.n_spin_orbitals, sector)
    matrix = sector_hamiltonian_matrix(h, determinants)
    k = min(k, q)
    energies, vectors = scipy.linalg.eigh(matrix, subset_by_index=[0, k - 1])
    logger.info(
        "FCI sector (%d, %d): Q=%d, ground energy %.10f Eh",
        sector.m_up,
        sector.m_down,
        q,
        energies[0],
    )
    return FciResult(energies, vectors, tuple(determinants))
