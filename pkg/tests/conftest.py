"""Pytest config file for tests."""

import pytest

from qeeqcc.hamiltonian import SectorSpec, SpinOrbitalHamiltonian
from qeeqcc.parsing import parse_fcidump, read_hamiltonian_source


def pytest_addoption(parser: pytest.Parser):
    parser.addoption(
        "-F",
        "--fast",
        dest="fast",
        action="store_true",
        help="Shrink randomized and statistical tests.",
    )


@pytest.fixture(scope="session")
def instance_count(pytestconfig) -> int:
    """Number of random instances a property test checks."""
    return 3 if pytestconfig.getoption("fast") else 12


@pytest.fixture(scope="session")
def seed_count(pytestconfig) -> int:
    """Number of seeds a statistical test repeats over."""
    return 20 if pytestconfig.getoption("fast") else 50


@pytest.fixture(scope="session")
def h2() -> SpinOrbitalHamiltonian:
    """Bundled minimal-basis H2 Hamiltonian (4 spin orbitals)."""
    return parse_fcidump(read_hamiltonian_source("bundled:h2_sto3g"))


@pytest.fixture(scope="session")
def h2_sector() -> SectorSpec:
    return SectorSpec(1, 1)
