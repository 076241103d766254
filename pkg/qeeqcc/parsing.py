"""Module for reading and writing Hamiltonian files.

Two formats are supported: the FCIDUMP integral-exchange format (spatial
orbitals, chemist notation, 1-based indices) and a JSON tensor document
holding spin-orbital integrals in physicist notation.
"""

import importlib.resources
import json
import logging
import os
from dataclasses import dataclass, field
from typing import Any, Optional, Union

import lark
import numpy as np
from lark.exceptions import VisitError

from qeeqcc.errors import ParseError
from qeeqcc.hamiltonian import SectorSpec, SpinOrbitalHamiltonian


logger = logging.getLogger(__name__)

_fcidump_parser = lark.Lark.open_from_package(
    __name__, "fcidump.lark", parser="lalr"
)

TENSOR_SCHEMA = "qeeqcc-tensor/1"
"""Schema tag written into tensor documents."""

CONFLICT_TOLERANCE = 1e-10
"""Largest tolerated difference between repeated integral entries."""

BUNDLED_PREFIX = "bundled:"
"""Prefix naming a Hamiltonian shipped in the package data directory."""


@dataclass(frozen=True)
class FcidumpHeader:
    """Namelist values of an FCIDUMP header."""

    norb: int
    """Number of spatial orbitals."""
    nelec: int = 0
    """Number of electrons (0 if absent)."""
    ms2: int = 0
    """Twice the spin projection (0 if absent)."""
    orbsym: tuple[int, ...] = field(default_factory=tuple)
    """Orbital symmetry labels (kept verbatim, not interpreted)."""

    def default_sector(self) -> Optional[SectorSpec]:
        """Returns the sector implied by NELEC and MS2, or `None` if the
        header does not define one."""
        if self.nelec <= 0 or (self.nelec + self.ms2) % 2:
            return None
        return SectorSpec(
            (self.nelec + self.ms2) // 2, (self.nelec - self.ms2) // 2
        )


@dataclass(frozen=True)
class _Integral:
    """One `value i j k l` record with the line it came from."""

    value: float
    indices: tuple[int, int, int, int]
    line: int


#
# FCIDUMP
#


def parse_fcidump(text: str, /) -> SpinOrbitalHamiltonian:
    """Parses FCIDUMP text and returns the spin-orbital Hamiltonian.

    Raises `ParseError` naming the offending line if the header is
    malformed, an index is out of range, or two entries for the same
    integral disagree.
    """
    hamiltonian, _ = parse_fcidump_with_header(text)
    return hamiltonian


def parse_fcidump_with_header(
    text: str, /
) -> tuple[SpinOrbitalHamiltonian, FcidumpHeader]:
    """Parses FCIDUMP text and returns the Hamiltonian and the header."""
    try:
        tree = _fcidump_parser.parse(text)
    except lark.UnexpectedInput as error:
        raise ParseError(
            f"unexpected input in FCIDUMP: {_first_line(error)}",
            line=error.line,
        ) from error
    try:
        header, integrals = _FcidumpTransformer().transform(tree)
    except VisitError as error:
        if isinstance(error.orig_exc, ParseError):
            raise error.orig_exc from None
        raise
    hamiltonian = _assemble_fcidump(header, integrals)
    logger.info(
        "Read FCIDUMP with %d spatial orbitals and %d integral lines",
        header.norb,
        len(integrals),
    )
    return hamiltonian, header


def _first_line(error: Exception) -> str:
    return str(error).strip().splitlines()[0] if str(error) else ""


@lark.v_args(inline=True)
class _FcidumpTransformer(lark.Transformer):
    """Transforms the parse tree into a header and integral records."""

    def start(self, header: FcidumpHeader, *integrals: _Integral):
        return header, list(integrals)

    def header(self, *items: tuple[str, str, int]) -> FcidumpHeader:
        values: dict[str, list[Any]] = {}
        current: Optional[str] = None
        line = 1
        for kind, item, item_line in items:
            line = item_line
            if kind == "key":
                current = item.upper()
                values[current] = []
            elif current is None:
                raise ParseError(f"value {item!r} has no key", line=line)
            else:
                values[current].append(item)

        def integer(key: str, default: Optional[int]) -> int:
            entries = values.get(key)
            if not entries:
                if default is None:
                    raise ParseError(f"header lacks {key}", line=line)
                return default
            if len(entries) != 1:
                raise ParseError(f"{key} must be a single value", line=line)
            return _to_int(entries[0], line)

        norb = integer("NORB", None)
        if norb <= 0:
            raise ParseError(f"NORB must be positive, got {norb}", line=line)
        orbsym = tuple(
            _to_int(value, line) for value in values.get("ORBSYM", [])
        )
        return FcidumpHeader(
            norb=norb,
            nelec=integer("NELEC", 0),
            ms2=integer("MS2", 0),
            orbsym=orbsym,
        )

    def key(self, name: lark.Token):
        return ("key", str(name), name.line)

    def number(self, token: lark.Token):
        return ("number", str(token), token.line)

    def flag(self, token: lark.Token):
        return ("flag", str(token).upper(), token.line)

    def integral(self, value: lark.Token, *indices: lark.Token) -> _Integral:
        line = value.line
        i, j, k, m = (_to_int(str(index), line) for index in indices)
        return _Integral(_to_float(str(value), line), (i, j, k, m), line)


def _to_int(text: str, line: Optional[int]) -> int:
    try:
        return int(text)
    except ValueError:
        raise ParseError(f"expected an integer, got {text!r}", line=line)


def _to_float(text: str, line: Optional[int]) -> float:
    try:
        return float(text.replace("D", "E").replace("d", "e"))
    except ValueError:
        raise ParseError(f"expected a number, got {text!r}", line=line)


def _assemble_fcidump(
    header: FcidumpHeader, integrals: list[_Integral]
) -> SpinOrbitalHamiltonian:
    """Fills spatial tensors from integral records, applying the 8-fold
    permutational symmetry of real integrals."""
    n = header.norb
    h1 = np.zeros((n, n))
    eri = np.zeros((n, n, n, n))
    core = 0.0
    seen: dict[tuple[int, ...], tuple[float, int]] = {}

    def record(key: tuple[int, ...], value: float, line: int) -> None:
        if key in seen:
            previous, previous_line = seen[key]
            if abs(previous - value) > CONFLICT_TOLERANCE:
                raise ParseError(
                    f"entry conflicts with line {previous_line} "
                    f"({value!r} vs {previous!r})",
                    line=line,
                )
        seen[key] = (value, line)

    for entry in integrals:
        i, j, k, m = entry.indices
        for index in entry.indices:
            if not 0 <= index <= n:
                raise ParseError(
                    f"index {index} is outside the range 0..{n}",
                    line=entry.line,
                )
        if i == j == k == m == 0:
            record((), entry.value, entry.line)
            core = entry.value
        elif k == m == 0 and i > 0 and j > 0:
            p, q = i - 1, j - 1
            record((max(p, q), min(p, q)), entry.value, entry.line)
            h1[p, q] = h1[q, p] = entry.value
        elif j == k == m == 0 and i > 0:
            logger.debug("Skipping orbital energy on line %d", entry.line)
        elif min(i, j, k, m) > 0:
            p, q, r, s = i - 1, j - 1, k - 1, m - 1
            pair1 = (max(p, q), min(p, q))
            pair2 = (max(r, s), min(r, s))
            key = max(pair1, pair2) + min(pair1, pair2)
            record(key, entry.value, entry.line)
            for a, b, c, d in (
                (p, q, r, s),
                (q, p, r, s),
                (p, q, s, r),
                (q, p, s, r),
                (r, s, p, q),
                (s, r, p, q),
                (r, s, q, p),
                (s, r, q, p),
            ):
                eri[a, b, c, d] = entry.value
        else:
            raise ParseError(
                f"unsupported index pattern {entry.indices}", line=entry.line
            )

    return SpinOrbitalHamiltonian.from_spatial(h1, eri, core)


def dump_fcidump(
    h: SpinOrbitalHamiltonian,
    /,
    sector: Optional[SectorSpec] = None,
) -> str:
    """Returns FCIDUMP text for a spin-restricted Hamiltonian.

    Only the unique entries under the 8-fold symmetry are written, each
    with 17 significant digits so that parsing the text back reproduces the
    tensors bit for bit.

    Raises `ValueError` if spin-up and spin-down integrals differ.
    """
    if not h.is_spin_restricted():
        raise ValueError("FCIDUMP needs a spin-restricted Hamiltonian.")
    n = h.n_spatial_orbitals
    t, v = h.one_body, h.two_body
    nelec = sector.n_electrons if sector is not None else 0
    ms2 = sector.m_up - sector.m_down if sector is not None else 0
    lines = [
        f" &FCI NORB={n},NELEC={nelec},MS2={ms2},",
        "  ORBSYM=" + "1," * n,
        "  ISYM=1,",
        " &END",
    ]
    for i in range(n):
        for j in range(i + 1):
            for k in range(i + 1):
                for m in range(k + 1):
                    if (i, j) < (k, m):
                        continue
                    # (ij|km) = <ik|v|jm>, taken from the up-down block
                    value = v[i, n + k, j, n + m]
                    if value != 0.0:
                        lines.append(
                            f"{value:.17g} {i + 1} {j + 1} {k + 1} {m + 1}"
                        )
    for i in range(n):
        for j in range(i + 1):
            if t[i, j] != 0.0:
                lines.append(f"{t[i, j]:.17g} {i + 1} {j + 1} 0 0")
    lines.append(f"{h.core_energy:.17g} 0 0 0 0")
    return "\n".join(lines) + "\n"


#
# Tensor documents
#


def parse_tensor_json(text: str, /) -> SpinOrbitalHamiltonian:
    """Parses a JSON tensor document and returns the Hamiltonian.

    The document holds `n_spin_orbitals`, `core_energy`, a dense
    `one_body` array and a sparse `two_body` list of `[p, q, r, s, value]`
    entries (physicist notation, spin-orbital indices). Entries are
    completed under v_pqrs = v_qpsr = v_rspq = v_srqp.

    Raises `ParseError` on malformed JSON, missing keys, inconsistent
    sizes, or conflicting entries, and `ValueError` if the completed
    tensors violate the Hamiltonian invariants.
    """
    try:
        document = json.loads(text)
    except json.JSONDecodeError as error:
        raise ParseError(f"invalid JSON: {error.msg}", line=error.lineno)
    if not isinstance(document, dict):
        raise ParseError("tensor document must be a JSON object")
    for key in ("n_spin_orbitals", "core_energy", "one_body", "two_body"):
        if key not in document:
            raise ParseError(f"tensor document lacks key {key!r}")

    n = document["n_spin_orbitals"]
    if not isinstance(n, int) or n <= 0 or n % 2:
        raise ParseError(f"n_spin_orbitals must be a positive even int: {n}")
    try:
        one_body = np.array(document["one_body"], dtype=float)
        core = float(document["core_energy"])
    except (TypeError, ValueError) as error:
        raise ParseError(f"non-numeric tensor data: {error}")
    if one_body.shape != (n, n):
        raise ParseError(
            f"one_body has shape {one_body.shape}, expected {(n, n)}"
        )

    two_body = np.zeros((n, n, n, n))
    seen: dict[tuple[int, int, int, int], float] = {}
    for position, entry in enumerate(document["two_body"]):
        if not isinstance(entry, (list, tuple)) or len(entry) != 5:
            raise ParseError(f"two_body entry {position} is not [p,q,r,s,v]")
        *indices, raw_value = entry
        if not all(isinstance(index, int) for index in indices):
            raise ParseError(f"two_body entry {position} has bad indices")
        p, q, r, s = indices
        if not all(0 <= index < n for index in indices):
            raise ParseError(
                f"two_body entry {position} has an index outside 0..{n - 1}"
            )
        try:
            value = float(raw_value)
        except (TypeError, ValueError):
            raise ParseError(
                f"two_body entry {position} has a non-numeric value "
                f"{raw_value!r}"
            ) from None
        for image in ((p, q, r, s), (q, p, s, r), (r, s, p, q), (s, r, q, p)):
            conflict = image in seen and (
                abs(seen[image] - value) > CONFLICT_TOLERANCE
            )
            if conflict:
                raise ParseError(
                    f"two_body entry {position} conflicts with an earlier "
                    f"entry for {image}"
                )
            seen[image] = value
            two_body[image] = value

    hamiltonian = SpinOrbitalHamiltonian(one_body, two_body, core)
    hamiltonian.check_invariants()
    return hamiltonian


def dump_tensor_json(h: SpinOrbitalHamiltonian, /) -> str:
    """Returns the JSON tensor document of a Hamiltonian."""
    entries = [
        [int(p), int(q), int(r), int(s), float(h.two_body[p, q, r, s])]
        for p, q, r, s in zip(*np.nonzero(h.two_body))
    ]
    document = {
        "schema": TENSOR_SCHEMA,
        "n_spin_orbitals": h.n_spin_orbitals,
        "core_energy": h.core_energy,
        "one_body": h.one_body.tolist(),
        "two_body": entries,
    }
    return json.dumps(document, indent=1)


#
# Loading
#


def load_hamiltonian_text(
    text: str, /, format: str
) -> tuple[SpinOrbitalHamiltonian, Optional[FcidumpHeader]]:
    """Parses text in the given format (`fcidump` or `tensor`)."""
    if format == "fcidump":
        return parse_fcidump_with_header(text)
    if format == "tensor":
        return parse_tensor_json(text), None
    raise ValueError(f"Unknown Hamiltonian format {format!r}.")


def read_hamiltonian_source(source: Union[str, os.PathLike], /) -> str:
    """Returns the text of a Hamiltonian file or of a bundled example.

    A source of the form `bundled:NAME` names `data/NAME.fcidump` inside
    the package.
    """
    text_source = str(source)
    if text_source.startswith(BUNDLED_PREFIX):
        name = text_source[len(BUNDLED_PREFIX):]
        resource = importlib.resources.files("qeeqcc").joinpath(
            f"data/{name}.fcidump"
        )
        if not resource.is_file():
            raise FileNotFoundError(f"No bundled Hamiltonian {name!r}.")
        return resource.read_text(encoding="utf8")
    with open(text_source, encoding="utf8") as file:
        return file.read()
