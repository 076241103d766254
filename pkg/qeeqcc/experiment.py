"""Module containing the Experiment class, which runs the stages of a
workflow for one configuration and collects their results."""


import logging
import time
from typing import Any, Callable, Optional, TypeVar

from qeeqcc.config import ExperimentConfig
from qeeqcc.errors import ConfigError
from qeeqcc.fci import FciResult, fci_solve
from qeeqcc.hamiltonian import SectorSpec, SpinOrbitalHamiltonian, freeze_core
from qeeqcc.parsing import load_hamiltonian_text, read_hamiltonian_source
from qeeqcc.pauli import PauliOperator, PauliString
from qeeqcc.qcc import (
    EntanglerBlock,
    ScreeningReport,
    build_circuit,
    candidate_entanglers,
    screen,
    select_blocks,
)
from qeeqcc.qee import QeeEncoding, build_encoding, build_qubit_hamiltonian
from qeeqcc.qse import QseResult, qse, zne_qse
from qeeqcc.results import (
    ResultsDocument,
    encoding_section,
    fci_section,
    qse_section,
    screening_section,
    vqe_section,
    zne_section,
)
from qeeqcc.simulator import Evaluator
from qeeqcc.vqe import VqeTrace, vqe
from qeeqcc.zne import ZneFit, zne_pipeline


logger = logging.getLogger(__name__)


SUBCOMMANDS = ("fci", "encode", "screen", "vqe", "qse", "zne")

_T = TypeVar("_T")


class Experiment:
    """Represents one run of the workflow.

    Stages are computed on first use and cached, so a subcommand asks for
    the result it needs and the upstream stages run once.
    """

    def __init__(
        self,
        config: ExperimentConfig,
        /,
        upstream: Optional[ResultsDocument] = None,
    ) -> None:
        """Creates an experiment, validating `config` first.

        `upstream` is a results document whose VQE section is reused
        instead of optimizing again.
        """
        config.validate()
        self.config = config
        self.upstream = upstream
        self.document = ResultsDocument(config.to_dict())
        self._cache: dict[str, Any] = {}

    def _stage(self, name: str, compute: Callable[[], _T]) -> _T:
        if name not in self._cache:
            start = time.perf_counter()
            self._cache[name] = compute()
            elapsed = time.perf_counter() - start
            self.document.timings[name] = elapsed
            logger.debug("Stage %s took %.3f s", name, elapsed)
        return self._cache[name]

    #
    # Stages
    #

    def problem(self) -> tuple[SpinOrbitalHamiltonian, SectorSpec]:
        """Returns the (frozen-core reduced) Hamiltonian and sector."""
        return self._stage("hamiltonian", self._load_problem)

    def _load_problem(self) -> tuple[SpinOrbitalHamiltonian, SectorSpec]:
        config = self.config
        text = read_hamiltonian_source(config.hamiltonian)
        h, header = load_hamiltonian_text(text, format=config.format)
        sector = header.default_sector() if header is not None else None
        if config.sector is not None:
            sector = SectorSpec(*config.sector)
        if sector is None:
            raise ConfigError(
                "No sector given and the Hamiltonian file defines none."
            )
        sector.validate(h.n_spin_orbitals)
        if config.frozen:
            h, sector = freeze_core(h, sector, config.frozen)
        logger.info(
            "Loaded %d spin orbitals, sector (%d, %d)",
            h.n_spin_orbitals,
            sector.m_up,
            sector.m_down,
        )
        return h, sector

    def encoding(self) -> tuple[QeeEncoding, PauliOperator]:
        """Returns the encoding and the qubit Hamiltonian."""
        return self._stage("encoding", self._encode)

    def _encode(self) -> tuple[QeeEncoding, PauliOperator]:
        h, sector = self.problem()
        enc = build_encoding(h, sector)
        hq = build_qubit_hamiltonian(h, enc)
        self.document.sections["encoding"] = encoding_section(enc, len(hq))
        return enc, hq

    def evaluator(self) -> Evaluator:
        enc, _ = self.encoding()
        return self.config.make_evaluator(enc.q_physical)

    def fci(self, states: Optional[int] = None, /) -> FciResult:
        """Returns the FCI spectrum; `states` overrides the configured
        count, and the whole sector is solved when neither is set."""

        def solve() -> FciResult:
            h, sector = self.problem()
            enc, _ = self.encoding()
            k = states or self.config.states or enc.q_physical
            result = fci_solve(h, sector, k)
            self.document.sections["fci"] = fci_section(result)
            return result

        return self._stage("fci", solve)

    def screening(self) -> ScreeningReport:
        def run() -> ScreeningReport:
            enc, hq = self.encoding()
            noisy = None
            if self.config.evaluator != "exact":
                noisy = self.evaluator()
            report = screen(
                hq,
                enc.reference_index,
                candidate_entanglers(hq),
                cutoff=self.config.cutoff,
                evaluator=noisy,
            )
            self.document.sections["screening"] = screening_section(report)
            return report

        return self._stage("screening", run)

    def optimized_blocks(self) -> list[EntanglerBlock]:
        """Returns the ansatz blocks at their optimized angles, taken from
        the upstream document when one was given."""
        if self.upstream is not None:
            return self._stage("upstream", self._reuse_vqe)
        self.vqe()
        return self._cache["blocks"]

    def vqe(self) -> VqeTrace:
        return self._stage("vqe", self._optimize)

    def _optimize(self) -> VqeTrace:
        enc, hq = self.encoding()
        blocks = select_blocks(self.screening(), self.config.top_k)
        trace = vqe(
            hq,
            blocks,
            enc.reference_index,
            evaluator=self.evaluator(),
            config=self.config.optimizer_config(),
        )
        optimized = [
            EntanglerBlock(b.pauli, theta)
            for b, theta in zip(blocks, trace.final_thetas)
        ]
        self._cache["blocks"] = optimized
        self.document.sections["vqe"] = vqe_section(trace, blocks)
        return trace

    def _reuse_vqe(self) -> list[EntanglerBlock]:
        assert self.upstream is not None
        section = self.upstream.sections.get("vqe")
        if section is None:
            raise ConfigError("Upstream results have no VQE section.")
        enc, _ = self.encoding()
        blocks = []
        for label, theta in zip(section["blocks"], section["final_thetas"]):
            if len(label) != enc.n_qubits:
                raise ConfigError(
                    f"Upstream entangler {label} does not act on "
                    f"{enc.n_qubits} qubits."
                )
            blocks.append(EntanglerBlock(PauliString.from_label(label), theta))
        self.document.sections["vqe"] = section
        logger.info("Reusing %d optimized blocks", len(blocks))
        return blocks

    def qse(self) -> QseResult:
        def run() -> QseResult:
            h, _ = self.problem()
            enc, _ = self.encoding()
            circuit = build_circuit(self.optimized_blocks(), enc.n_qubits)
            result = qse(
                h, enc, circuit, self.evaluator(), mode=self.config.qse_ops
            )
            self._report_qse(result)
            return result

        return self._stage("qse", run)

    def zne(self) -> tuple[ZneFit, QseResult]:
        """Returns the extrapolated energy fit and the extrapolated
        subspace expansion."""
        return self._stage("zne", self._extrapolate)

    def _extrapolate(self) -> tuple[ZneFit, QseResult]:
        config = self.config
        h, _ = self.problem()
        enc, hq = self.encoding()
        blocks = self.optimized_blocks()
        fit = zne_pipeline(
            hq,
            blocks,
            enc.reference_index,
            self.evaluator(),
            replicas=config.replicas,
            degree=config.zne_degree_diag,
            abscissa=config.zne_abscissa,
        )
        per_replica = sum(b.cnot_count() for b in blocks)
        self.document.sections["zne"] = zne_section(fit, per_replica)
        result = zne_qse(
            h,
            enc,
            blocks,
            self.evaluator(),
            replicas=config.replicas,
            degree_diagonal=config.zne_degree_diag,
            degree_off_diagonal=config.zne_degree_offdiag,
            mode=config.qse_ops,
        )
        self._report_qse(result)
        return fit, result

    def _report_qse(self, result: QseResult) -> None:
        reference = self.fci()
        ground = self.config.resolved_qse_ground()
        if ground == "qse":
            ground_energy = float(result.eigenvalues[0])
        else:
            ground_energy = float(reference.energies[0])
        self.document.sections["qse"] = qse_section(
            result, ground, ground_energy, reference.energies
        )

    #
    # Subcommands
    #

    def run(self, subcommand: str, /) -> ResultsDocument:
        """Runs a subcommand and returns the document of its results.

        Raises `ValueError` for an unknown subcommand.
        """
        if subcommand not in SUBCOMMANDS:
            raise ValueError(f"Unknown subcommand {subcommand!r}.")
        if subcommand == "fci":
            self.fci()
        elif subcommand == "encode":
            self.encoding()
        elif subcommand == "screen":
            self.screening()
        elif subcommand == "vqe":
            self.vqe()
        elif subcommand == "qse":
            self.qse()
        else:
            self.zne()
        return self.document


def run_subcommand(
    subcommand: str,
    config: ExperimentConfig,
    /,
    upstream: Optional[ResultsDocument] = None,
) -> ResultsDocument:
    """Runs one subcommand of a fresh experiment."""
    return Experiment(config, upstream=upstream).run(subcommand)
