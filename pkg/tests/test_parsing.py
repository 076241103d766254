"""Testing module for parsing.py"""

import json

import numpy as np
import pytest

from qeeqcc.errors import ParseError
from qeeqcc.hamiltonian import SectorSpec, SpinOrbitalHamiltonian
from qeeqcc.parsing import (
    FcidumpHeader,
    dump_fcidump,
    dump_tensor_json,
    load_hamiltonian_text,
    parse_fcidump,
    parse_fcidump_with_header,
    parse_tensor_json,
    read_hamiltonian_source,
)
from tests.oracles import random_hamiltonian


ONE_ORBITAL = """\
 &FCI NORB=1,NELEC=2,MS2=0,
  ORBSYM=1,
  ISYM=1,
 &END
  0.5    1    1    1    1
 -1.0    1    1    0    0
  0.25   0    0    0    0
"""


class TestFcidump:
    """Tests for reading and writing FCIDUMP text."""

    def test_bundled_h2(self) -> None:
        h, header = parse_fcidump_with_header(
            read_hamiltonian_source("bundled:h2_sto3g")
        )
        assert header == FcidumpHeader(2, 2, 0, (1, 1))
        assert header.default_sector() == SectorSpec(1, 1)
        assert h.n_spin_orbitals == 4
        assert h.core_energy == pytest.approx(0.7137539936876182)
        assert h.one_body[1, 1] == pytest.approx(-0.4759487152209648)
        assert h.one_body[3, 3] == pytest.approx(-0.4759487152209648)
        h.check_invariants()

    def test_one_orbital(self) -> None:
        h = parse_fcidump(ONE_ORBITAL)
        assert h.core_energy == 0.25
        assert h.one_body[0, 0] == -1.0
        assert h.one_body[1, 1] == -1.0
        # <0 up, 0 down | 0 up, 0 down> = (00|00)
        assert h.two_body[0, 1, 0, 1] == 0.5
        assert h.two_body[0, 0, 0, 0] == 0.5

    def test_fortran_exponents_and_flags(self) -> None:
        text = (
            "&fci norb=1, nelec=1, ms2=1, uhf=.FALSE. /\n"
            "-0.5D+00 1 1 0 0\n"
            "1.5d-1 0 0 0 0\n"
        )
        h, header = parse_fcidump_with_header(text)
        assert h.one_body[0, 0] == -0.5
        assert h.core_energy == 0.15
        assert header.default_sector() == SectorSpec(1, 0)

    def test_orbital_energies_are_ignored(self) -> None:
        h = parse_fcidump(ONE_ORBITAL + "  -0.7   1   0   0   0\n")
        assert h.one_body[0, 0] == -1.0

    def test_symmetry_images_are_filled(self) -> None:
        text = (
            "&FCI NORB=2 &END\n"
            "0.1 2 1 1 1\n"
        )
        h = parse_fcidump(text)
        # (21|11) = (12|11) = (11|21) = (11|12)
        for p, q, r, s in ((1, 0, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)):
            assert h.two_body[p, q, r, s] == 0.1
        h.check_invariants()

    def test_header_without_sector(self) -> None:
        _, header = parse_fcidump_with_header("&FCI NORB=1 &END\n")
        assert header.default_sector() is None

    @pytest.mark.parametrize(
        "text,line",
        [
            ("&FCI NELEC=2 &END\n", 1),
            ("&FCI NORB=1 &END\n1.0 2 1 0 0\n", 2),
            ("&FCI NORB=1 &END\n1.0 1 1 0 0\n1.5 1 1 0 0\n", 3),
            ("&FCI NORB=2 &END\n1.0 2 1 1 1\n1.1 1 1 1 2\n", 3),
            ("&FCI NORB=1 &END\n1.0 1 1 x 0\n", 2),
            ("&FCI NORB=1 &END\n1.0 1 1 0\n", None),
        ],
    )
    def test_malformed(self, text: str, line: int) -> None:
        with pytest.raises(ParseError) as info:
            parse_fcidump(text)
        if line is not None:
            assert info.value.line == line
            assert f"line {line}" in str(info.value)

    def test_parse_error_is_value_error(self) -> None:
        with pytest.raises(ValueError):
            parse_fcidump("not an fcidump")

    def test_round_trip(self, instance_count: int) -> None:
        for seed in range(instance_count):
            h = random_hamiltonian(3, seed)
            text = dump_fcidump(h, sector=SectorSpec(2, 1))
            again, header = parse_fcidump_with_header(text)
            assert again.same_tensors(h)
            assert header.default_sector() == SectorSpec(2, 1)

    def test_dump_needs_spin_restricted(
        self, h2: SpinOrbitalHamiltonian
    ) -> None:
        t = np.array(h2.one_body)
        t[0, 0] += 0.1
        h = SpinOrbitalHamiltonian(t, h2.two_body, h2.core_energy)
        with pytest.raises(ValueError):
            dump_fcidump(h)


class TestTensorJson:
    """Tests for the JSON tensor document."""

    def test_round_trip(self, instance_count: int) -> None:
        for seed in range(instance_count):
            h = random_hamiltonian(2, seed)
            again = parse_tensor_json(dump_tensor_json(h))
            assert again.same_tensors(h)

    def test_sparse_entries_are_completed(self) -> None:
        document = {
            "n_spin_orbitals": 2,
            "core_energy": 1.0,
            "one_body": [[-1.0, 0.0], [0.0, -1.0]],
            "two_body": [[0, 1, 0, 1, 0.5]],
        }
        h = parse_tensor_json(json.dumps(document))
        assert h.two_body[1, 0, 1, 0] == 0.5
        assert h.core_energy == 1.0

    @pytest.mark.parametrize(
        "document",
        [
            "[1, 2]",
            "{",
            json.dumps({"n_spin_orbitals": 2}),
            json.dumps(
                {
                    "n_spin_orbitals": 3,
                    "core_energy": 0,
                    "one_body": [],
                    "two_body": [],
                }
            ),
            json.dumps(
                {
                    "n_spin_orbitals": 2,
                    "core_energy": 0,
                    "one_body": [[0.0]],
                    "two_body": [],
                }
            ),
            json.dumps(
                {
                    "n_spin_orbitals": 2,
                    "core_energy": 0,
                    "one_body": [[0, 0], [0, 0]],
                    "two_body": [[0, 1, 0, 2, 0.5]],
                }
            ),
            json.dumps(
                {
                    "n_spin_orbitals": 2,
                    "core_energy": 0,
                    "one_body": [[0, 0], [0, 0]],
                    "two_body": [[0, 1, 0, 1, 0.5], [1, 0, 1, 0, 0.6]],
                }
            ),
        ],
    )
    def test_malformed(self, document: str) -> None:
        with pytest.raises(ParseError):
            parse_tensor_json(document)

    @pytest.mark.parametrize("value", ["abc", None, [0.5]])
    def test_non_numeric_two_body_value(self, value) -> None:
        document = {
            "n_spin_orbitals": 2,
            "core_energy": 0,
            "one_body": [[0, 0], [0, 0]],
            "two_body": [[0, 1, 0, 1, 0.5], [1, 1, 1, 1, value]],
        }
        with pytest.raises(ParseError, match="entry 1 has a non-numeric"):
            parse_tensor_json(json.dumps(document))


class TestLoading:
    """Tests for choosing the reader and the source."""

    def test_load_by_format(self) -> None:
        h, header = load_hamiltonian_text(ONE_ORBITAL, format="fcidump")
        assert header is not None
        again, none = load_hamiltonian_text(
            dump_tensor_json(h), format="tensor"
        )
        assert none is None
        assert again.same_tensors(h)

    def test_unknown_format(self) -> None:
        with pytest.raises(ValueError):
            load_hamiltonian_text(ONE_ORBITAL, format="xyz")

    def test_unknown_bundled(self) -> None:
        with pytest.raises(FileNotFoundError):
            read_hamiltonian_source("bundled:missing")

    def test_file_source(self, tmp_path) -> None:
        path = tmp_path / "h.fcidump"
        path.write_text(ONE_ORBITAL, encoding="utf8")
        assert read_hamiltonian_source(path) == ONE_ORBITAL
