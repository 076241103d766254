"""Module for the variational quantum eigensolver loop."""


import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.optimize

from qeeqcc.errors import OptimizerDivergedError
from qeeqcc.pauli import PauliOperator
from qeeqcc.qcc import EntanglerBlock, build_circuit, with_angles
from qeeqcc.simulator import Evaluator, StatevectorEvaluator


logger = logging.getLogger(__name__)


METHODS = ("cobyla", "parameter-shift")
"""Supported optimizers."""


@dataclass(frozen=True)
class OptimizerConfig:
    """Settings of the VQE optimizer and its stopping rule."""

    method: str = "cobyla"
    """`cobyla` (derivative-free) or `parameter-shift` (gradient
    descent)."""
    tol: float = 1e-6
    """Energy window (hartree) for convergence; noisy runs use at least
    three standard errors."""
    patience: int = 5
    """Number of evaluations the window must hold for, beyond the first."""
    max_iterations: int = 200
    """Cap on recorded evaluations."""
    rhobeg: float = 0.5
    """Initial COBYLA step (radians)."""
    learning_rate: float = 0.5
    """Gradient-descent step size (radian^2 / hartree)."""

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ValueError(f"Unknown optimizer {self.method!r}.")
        if self.tol <= 0 or self.patience < 1 or self.max_iterations < 1:
            raise ValueError("Invalid optimizer stopping parameters.")


@dataclass(frozen=True)
class VqeRecord:
    """One energy evaluation."""

    iteration: int
    thetas: tuple[float, ...]
    """Block angles in radians."""
    energy: float
    """Hartree."""
    stderr: float
    """Hartree."""


@dataclass
class VqeTrace:
    """Every energy evaluation of an optimization, in order."""

    records: list[VqeRecord] = field(default_factory=list)
    converged: bool = False
    """Whether the patience window was met before the iteration cap."""

    @property
    def final_energy(self) -> float:
        """Energy of the last record."""
        return self.records[-1].energy

    @property
    def final_thetas(self) -> tuple[float, ...]:
        return self.records[-1].thetas

    @property
    def final_stderr(self) -> float:
        return self.records[-1].stderr

    def best(self) -> VqeRecord:
        """Returns the lowest-energy record."""
        return min(self.records, key=lambda r: r.energy)

    def to_text(self) -> str:
        """Returns `iteration energy stderr` lines."""
        return "".join(
            f"{r.iteration} {r.energy:.12f} {r.stderr:.3e}\n"
            for r in self.records
        )


class _Objective:
    """Energy of the ansatz as a function of its angles, recording every
    evaluation and watching the patience window."""

    def __init__(
        self,
        hq: PauliOperator,
        blocks: Sequence[EntanglerBlock],
        reference: int,
        evaluator: Evaluator,
        config: OptimizerConfig,
    ) -> None:
        self.hq = hq
        self.blocks = list(blocks)
        self.reference = reference
        self.evaluator = evaluator
        self.config = config
        self.trace = VqeTrace()
        # once set, record() returns the last energy without evaluating
        self.stopped = False

    def energy(self, thetas: Sequence[float]) -> tuple[float, float]:
        circuit = build_circuit(
            with_angles(self.blocks, thetas), self.hq.n_qubits
        )
        return self.evaluator.energy(self.hq, circuit, self.reference)

    def record(self, thetas: Sequence[float]) -> float:
        if self.stopped:
            return self.trace.records[-1].energy
        energy, stderr = self.energy(thetas)
        record = VqeRecord(
            len(self.trace.records),
            tuple(float(t) for t in thetas),
            energy,
            stderr,
        )
        self.trace.records.append(record)
        logger.debug(
            "VQE evaluation %d: %.12f +- %.2g",
            record.iteration,
            energy,
            stderr,
        )
        if not math.isfinite(energy):
            raise OptimizerDivergedError(
                f"Energy is {energy} at evaluation {record.iteration}.",
                trace=self.trace,
            )
        if self.window_closed():
            self.trace.converged = True
            self.stopped = True
        elif len(self.trace.records) >= self.config.max_iterations:
            self.stopped = True
        return energy

    def window_closed(self) -> bool:
        window = self.trace.records[-(self.config.patience + 1):]
        if len(window) <= self.config.patience:
            return False
        energies = [r.energy for r in window]
        tolerance = max(self.config.tol, 3 * window[-1].stderr)
        return max(energies) - min(energies) < tolerance


def parameter_shift_gradient(
    hq: PauliOperator,
    blocks: Sequence[EntanglerBlock],
    reference: int,
    k: int,
    /,
    evaluator: Optional[Evaluator] = None,
) -> float:
    """Returns dE/dtheta_k = [E(theta_k + pi/2) - E(theta_k - pi/2)] / 2.

    Exact for generators with eigenvalues +-1, i.e. Pauli strings.
    """
    if evaluator is None:
        evaluator = StatevectorEvaluator()
    thetas = [b.theta for b in blocks]
    energies = []
    for shift in (math.pi / 2, -math.pi / 2):
        shifted = list(thetas)
        shifted[k] += shift
        circuit = build_circuit(with_angles(blocks, shifted), hq.n_qubits)
        energies.append(evaluator.energy(hq, circuit, reference)[0])
    return 0.5 * (energies[0] - energies[1])


def vqe(
    hq: PauliOperator,
    blocks: Sequence[EntanglerBlock],
    reference: int,
    /,
    evaluator: Optional[Evaluator] = None,
    config: Optional[OptimizerConfig] = None,
) -> VqeTrace:
    """Minimizes the ansatz energy starting from the blocks' angles.

    Every evaluation is recorded; the final record is a re-evaluation at
    the best angles found.

    Raises `OptimizerDivergedError` if an energy is not finite.
    """
    if evaluator is None:
        evaluator = StatevectorEvaluator()
    if config is None:
        config = OptimizerConfig()
    objective = _Objective(hq, blocks, reference, evaluator, config)
    start = np.array([b.theta for b in blocks], dtype=float)

    if not blocks:
        energy, stderr = objective.energy(start)
        objective.trace.records.append(VqeRecord(0, (), energy, stderr))
        objective.trace.converged = True
        return objective.trace

    if config.method == "cobyla":
        result = scipy.optimize.minimize(
            objective.record,
            start,
            method="COBYLA",
            tol=config.tol * 1e-2,
            options={
                "rhobeg": config.rhobeg,
                "maxiter": config.max_iterations,
            },
        )
        if not objective.stopped:
            objective.trace.converged = bool(result.success)
    else:
        _gradient_descent(objective, start)

    best = objective.trace.best()
    energy, stderr = objective.energy(best.thetas)
    objective.trace.records.append(
        VqeRecord(len(objective.trace.records), best.thetas, energy, stderr)
    )
    logger.info(
        "VQE %s after %d evaluations: %.12f Eh",
        "converged" if objective.trace.converged else "stopped",
        len(objective.trace.records),
        energy,
    )
    return objective.trace


def _gradient_descent(objective: _Objective, start: np.ndarray) -> None:
    thetas = start.copy()
    config = objective.config
    while True:
        objective.record(thetas)
        if objective.stopped:
            return
        blocks = with_angles(objective.blocks, thetas)
        gradient = np.array(
            [
                parameter_shift_gradient(
                    objective.hq,
                    blocks,
                    objective.reference,
                    k,
                    evaluator=objective.evaluator,
                )
                for k in range(len(blocks))
            ]
        )
        thetas = thetas - config.learning_rate * gradient
