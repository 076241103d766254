"""Testing module for fci.py"""

import numpy as np
import pytest

from qeeqcc.errors import ResourceLimitError
from qeeqcc.fci import fci_solve
from qeeqcc.hamiltonian import SectorSpec
from qeeqcc.qee import sector_hamiltonian_matrix
from tests.oracles import random_hamiltonian, sector_spectrum


H2_SPECTRUM = [-1.13727, -0.53232, -0.16974, 0.47984]


def test_h2_spectrum(h2, h2_sector):
    result = fci_solve(h2, h2_sector, 4)
    assert np.allclose(result.energies, H2_SPECTRUM, atol=1e-4)
    assert result.vectors.shape == (4, 4)
    assert len(result.determinants) == 4


def test_number_of_states_is_clamped(h2, h2_sector):
    result = fci_solve(h2, h2_sector, 10)
    assert len(result.energies) == 4
    assert fci_solve(h2, h2_sector).energies.shape == (1,)


def test_matches_fock_space(instance_count: int):
    for seed in range(instance_count):
        h = random_hamiltonian(3, seed)
        sector = SectorSpec(2, 1)
        result = fci_solve(h, sector, 9)
        assert np.allclose(
            result.energies, sector_spectrum(h, sector), atol=1e-10
        )


def test_vectors_are_eigenvectors(h2, h2_sector):
    result = fci_solve(h2, h2_sector, 2)
    matrix = sector_hamiltonian_matrix(h2, list(result.determinants))
    assert np.allclose(
        matrix @ result.vectors, result.vectors * result.energies
    )


def test_dense_limit(h2, h2_sector):
    with pytest.raises(ResourceLimitError):
        fci_solve(h2, h2_sector, 1, dense_limit=3)


def test_invalid_state_count(h2, h2_sector):
    with pytest.raises(ValueError):
        fci_solve(h2, h2_sector, 0)
