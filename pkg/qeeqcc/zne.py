"""Module for zero-noise extrapolation over split-exponential replicas."""


import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from qeeqcc.pauli import PauliOperator
from qeeqcc.qcc import EntanglerBlock, build_circuit, with_replicas
from qeeqcc.simulator import Evaluator


logger = logging.getLogger(__name__)


DEFAULT_REPLICAS = (1, 2, 3, 4, 5)
"""Replica counts evaluated by default."""

ABSCISSAS = ("replicas", "cnots")
"""Supported noise-scale axes."""


@dataclass(frozen=True)
class ZneFit:
    """Polynomial fit of noisy values against a noise scale."""

    scales: tuple[float, ...]
    """Noise scale of each point (replica or CNOT count)."""
    values: tuple[float, ...]
    """Measured value at each scale."""
    degree: int
    """Polynomial degree, 1 or 2."""
    value: float
    """Fit evaluated at scale 0."""
    residual: float
    """Root-mean-square deviation of the points from the fit."""
    stderr: float = 0.0
    """Standard error of `value` propagated from the point errors."""
    abscissa: str = "replicas"
    """What the scales count."""


def _zero_weights(scales: np.ndarray, degree: int) -> np.ndarray:
    # least-squares extrapolation is linear in the values
    vandermonde = np.vander(scales, degree + 1, increasing=True)
    return np.linalg.pinv(vandermonde)[0]


def zne_extrapolate(
    points: Sequence[tuple[float, float]],
    degree: int = 2,
    /,
    stderrs: Optional[Sequence[float]] = None,
    abscissa: str = "replicas",
) -> ZneFit:
    """Fits a polynomial to (scale, value) points and evaluates it at 0.

    Raises `ValueError` if the degree is not 1 or 2 or if there are not
    more points than the degree.
    """
    if degree not in (1, 2):
        raise ValueError(f"Extrapolation degree must be 1 or 2, not {degree}.")
    if len(points) <= degree:
        raise ValueError(
            f"A degree-{degree} fit needs at least {degree + 1} points, got "
            f"{len(points)}."
        )
    if abscissa not in ABSCISSAS:
        raise ValueError(f"Unknown abscissa {abscissa!r}.")
    scales = np.array([x for x, _ in points], dtype=float)
    values = np.array([y for _, y in points], dtype=float)

    coefficients = np.polyfit(scales, values, degree)
    fitted = np.polyval(coefficients, scales)
    residual = float(np.sqrt(np.mean((fitted - values) ** 2)))
    stderr = 0.0
    if stderrs is not None:
        weights = _zero_weights(scales, degree)
        stderr = float(np.sqrt(np.sum((weights * np.asarray(stderrs)) ** 2)))
    return ZneFit(
        tuple(scales.tolist()),
        tuple(values.tolist()),
        degree,
        float(coefficients[-1]),
        residual,
        stderr,
        abscissa,
    )


def extrapolate_arrays(
    scales: Sequence[float], arrays: Sequence[np.ndarray], degree: int, /
) -> np.ndarray:
    """Extrapolates every element of equally shaped arrays to scale 0
    (real and imaginary parts separately)."""
    if len(scales) <= degree:
        raise ValueError(
            f"A degree-{degree} fit needs at least {degree + 1} points."
        )
    stacked = np.array(arrays)
    flat = stacked.reshape(len(scales), -1)
    x = np.asarray(scales, dtype=float)
    real = np.polyfit(x, flat.real, degree)[-1]
    result = real.astype(complex)
    if np.iscomplexobj(flat):
        result += 1j * np.polyfit(x, flat.imag, degree)[-1]
    return result.reshape(stacked.shape[1:])


def noise_scales(
    blocks: Sequence[EntanglerBlock],
    replicas: Sequence[int],
    /,
    abscissa: str = "replicas",
) -> list[float]:
    """Returns the noise scale of each replica count.

    Raises `ValueError` for the CNOT abscissa if the circuit has no CNOT.
    """
    if abscissa == "replicas":
        return [float(n) for n in replicas]
    if abscissa != "cnots":
        raise ValueError(f"Unknown abscissa {abscissa!r}.")
    per_replica = sum(b.cnot_count() for b in with_replicas(blocks, 1))
    if per_replica == 0:
        raise ValueError("The circuit has no CNOT to scale the noise with.")
    return [float(n * per_replica) for n in replicas]


def zne_pipeline(
    hq: PauliOperator,
    blocks: Sequence[EntanglerBlock],
    reference: int,
    evaluator: Evaluator,
    /,
    replicas: Sequence[int] = DEFAULT_REPLICAS,
    degree: int = 2,
    abscissa: str = "replicas",
) -> ZneFit:
    """Evaluates the energy with each replica count and extrapolates it to
    zero noise. The block angles stay fixed."""
    if not replicas or min(replicas) < 1:
        raise ValueError(f"Invalid replica list {list(replicas)}.")
    scales = noise_scales(blocks, replicas, abscissa)
    points = []
    stderrs = []
    for n, scale in zip(replicas, scales):
        circuit = build_circuit(with_replicas(blocks, n), hq.n_qubits)
        energy, stderr = evaluator.energy(hq, circuit, reference)
        logger.debug(
            "ZNE n=%d (%d CNOTs): %.10f +- %.2g",
            n,
            circuit.cnot_count(),
            energy,
            stderr,
        )
        points.append((scale, energy))
        stderrs.append(stderr)
    fit = zne_extrapolate(points, degree, stderrs=stderrs, abscissa=abscissa)
    logger.info(
        "ZNE degree %d over %s: %.10f Eh (residual %.2g)",
        degree,
        abscissa,
        fit.value,
        fit.residual,
    )
    return fit
