"""Module for the structured results document and its plot-ready tables."""


import csv
import io
import json
import logging
import os
import tempfile
from dataclasses import dataclass, field
from typing import Any, Mapping, Optional, Sequence

import numpy as np

from qeeqcc.errors import ConfigError
from qeeqcc.fci import FciResult
from qeeqcc.qcc import EntanglerBlock, ScreeningReport
from qeeqcc.qee import QeeEncoding
from qeeqcc.qse import QseResult
from qeeqcc.vqe import VqeTrace
from qeeqcc.zne import ZneFit


logger = logging.getLogger(__name__)


SCHEMA = "qeeqcc-results/1"
"""Schema tag of results documents."""

HARTREE_TO_EV = 27.211386245988

PLOT_SECTIONS = ("vqe", "zne", "qse")


@dataclass
class ResultsDocument:
    """Sections produced by one experiment run."""

    config: dict[str, Any]
    """Echo of the `ExperimentConfig`."""
    sections: dict[str, Any] = field(default_factory=dict)
    """Section name -> JSON-compatible content."""
    timings: dict[str, float] = field(default_factory=dict)
    """Wall-clock seconds per stage."""

    def to_json(self) -> str:
        document = {
            "schema": SCHEMA,
            "config": self.config,
            "timings": self.timings,
            **self.sections,
        }
        return json.dumps(document, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str, /) -> "ResultsDocument":
        """Reads a document written by `to_json()`.

        Raises `ConfigError` if the text is not such a document.
        """
        try:
            data = json.loads(text)
        except json.JSONDecodeError as error:
            raise ConfigError(f"Results document is not JSON: {error}")
        if not isinstance(data, dict) or data.get("schema") != SCHEMA:
            raise ConfigError(f"Results document lacks schema {SCHEMA!r}.")
        config = data.pop("config", {})
        timings = data.pop("timings", {})
        data.pop("schema")
        return cls(config, data, timings)

    @classmethod
    def load(cls, path: str, /) -> "ResultsDocument":
        try:
            with open(path, encoding="utf8") as file:
                return cls.from_json(file.read())
        except OSError as error:
            raise ConfigError(f"Cannot read results {path!r}: {error}")


def write_atomic(path: str, text: str, /) -> None:
    """Writes text through a temporary file in the same directory, then
    renames it over `path`."""
    directory = os.path.dirname(os.path.abspath(path))
    descriptor, temporary = tempfile.mkstemp(
        prefix=".qeeqcc-", suffix=".tmp", dir=directory
    )
    try:
        with os.fdopen(descriptor, "w", encoding="utf8") as file:
            file.write(text)
        os.replace(temporary, path)
    except BaseException:
        if os.path.exists(temporary):
            os.remove(temporary)
        raise


#
# Sections
#


def _floats(values: Any) -> list[float]:
    return [float(v) for v in np.ravel(values)]


def _matrix(values: np.ndarray) -> list[list[float]]:
    return [[float(v) for v in row] for row in np.real(values)]


def encoding_section(enc: QeeEncoding, n_terms: int, /) -> dict[str, Any]:
    return {
        "q_physical": enc.q_physical,
        "n_qubits": enc.n_qubits,
        "n_padding": enc.n_padding,
        "padding_penalty": enc.padding_penalty,
        "sector": [enc.sector.m_up, enc.sector.m_down],
        "n_spin_orbitals": enc.n_spin_orbitals,
        "hole_counts": list(enc.hole_counts()),
        "n_pauli_terms": n_terms,
        "table": enc.to_text().splitlines(),
    }


def fci_section(result: FciResult, /) -> dict[str, Any]:
    energies = _floats(result.energies)
    return {
        "energies_hartree": energies,
        "ground_energy_hartree": energies[0],
        "excitations_ev": [
            (e - energies[0]) * HARTREE_TO_EV for e in energies[1:]
        ],
    }


def screening_section(report: ScreeningReport, /) -> dict[str, Any]:
    return {
        "reference": report.reference,
        "cutoff": report.cutoff,
        "entanglers": [
            {"rank": rank, "string": pauli.label, "gradient": gradient}
            for rank, (pauli, gradient) in enumerate(report.entries, start=1)
        ],
    }


def vqe_section(
    trace: VqeTrace, blocks: Sequence[EntanglerBlock], /
) -> dict[str, Any]:
    return {
        "blocks": [b.pauli.label for b in blocks],
        "cnot_count": sum(b.cnot_count() for b in blocks),
        "final_energy": trace.final_energy,
        "final_stderr": trace.final_stderr,
        "final_thetas": list(trace.final_thetas),
        "converged": trace.converged,
        "trace": [
            {
                "iteration": r.iteration,
                "thetas": list(r.thetas),
                "energy": r.energy,
                "stderr": r.stderr,
            }
            for r in trace.records
        ],
    }


def zne_section(
    fit: ZneFit, cnots_per_replica: int, /
) -> dict[str, Any]:
    return {
        "degree": fit.degree,
        "abscissa": fit.abscissa,
        "cnots_per_replica": cnots_per_replica,
        "scales": list(fit.scales),
        "values": list(fit.values),
        "extrapolated": fit.value,
        "stderr": fit.stderr,
        "residual": fit.residual,
    }


def qse_section(
    result: QseResult,
    ground: str,
    ground_energy: float,
    fci_energies: Sequence[float],
    /,
) -> dict[str, Any]:
    """Returns the QSE spectrum with excitation energies relative to
    `ground_energy` next to the FCI excitations of the same sector."""
    eigenvalues = _floats(result.eigenvalues)
    fci = [float(e) for e in fci_energies]
    excitations = [e - ground_energy for e in eigenvalues[1:]]
    fci_excitations = [e - fci[0] for e in fci[1 : len(eigenvalues)]]
    return {
        "operators": list(result.labels),
        "retained": result.retained,
        "hamiltonian": _matrix(result.hamiltonian),
        "overlap": _matrix(result.overlap),
        "eigenvalues_hartree": eigenvalues,
        "ground": ground,
        "ground_energy_hartree": ground_energy,
        "excitations_hartree": excitations,
        "excitations_ev": [e * HARTREE_TO_EV for e in excitations],
        "fci_energies_hartree": fci,
        "fci_excitations_ev": [e * HARTREE_TO_EV for e in fci_excitations],
    }


#
# Plot data
#


def _table(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def _zne_rows(zne: Mapping[str, Any]) -> list[list[Any]]:
    factor = 1
    if zne["abscissa"] == "replicas":
        if zne.get("cnots_per_replica"):
            factor = zne["cnots_per_replica"]
        else:
            logger.warning(
                "zne section has no CNOT count; plotting replica scales"
            )
    return [
        [scale * factor, value]
        for scale, value in zip(zne["scales"], zne["values"])
    ]


def emit_plot_data(
    doc: ResultsDocument, /, sections: Optional[Sequence[str]] = None
) -> dict[str, str]:
    """Returns comma-separated tables keyed by section.

    `vqe`: iteration, energy, stderr. `zne`: CNOT count, energy. `qse`:
    transition, error of the excitation energy against FCI (eV). Missing
    sections yield an empty table and a warning.
    """
    if sections is None:
        sections = PLOT_SECTIONS
    tables = {}
    for name in sections:
        if name not in PLOT_SECTIONS:
            raise ValueError(f"Unknown plot section {name!r}.")
        content = doc.sections.get(name)
        if content is None:
            logger.warning("Results document has no %r section", name)
            tables[name] = ""
        elif name == "vqe":
            tables[name] = _table(
                ["iteration", "energy_hartree", "stderr_hartree"],
                [
                    [r["iteration"], r["energy"], r["stderr"]]
                    for r in content["trace"]
                ],
            )
        elif name == "zne":
            tables[name] = _table(
                ["cnot_count", "energy_hartree"], _zne_rows(content)
            )
        else:
            tables[name] = _table(
                ["transition", "error_ev"],
                [
                    [f"0->{i}", qse - fci]
                    for i, (qse, fci) in enumerate(
                        zip(
                            content["excitations_ev"],
                            content["fci_excitations_ev"],
                        ),
                        start=1,
                    )
                ],
            )
    return tables
