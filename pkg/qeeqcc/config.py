"""Module for the experiment configuration shared by all subcommands."""


import dataclasses
import json
import os
from dataclasses import dataclass
from typing import Any, Mapping, Optional

from qeeqcc.errors import ConfigError
from qeeqcc.parsing import BUNDLED_PREFIX
from qeeqcc.simulator import (
    DEFAULT_SHOTS,
    DensityMatrixEvaluator,
    Evaluator,
    NoiseModel,
    SampledEvaluator,
    StatevectorEvaluator,
)
from qeeqcc.vqe import METHODS, OptimizerConfig
from qeeqcc.zne import ABSCISSAS, DEFAULT_REPLICAS


FORMATS = ("fcidump", "tensor")
EVALUATORS = ("exact", "density", "sampled")
QSE_MODES = ("singles-doubles", "full-sector")
QSE_GROUNDS = ("qse", "exact")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to re-run an experiment."""

    hamiltonian: str = f"{BUNDLED_PREFIX}h2_sto3g"
    """Path of the Hamiltonian file, or `bundled:NAME`."""
    format: str = "fcidump"
    """`fcidump` or `tensor`."""
    sector: Optional[tuple[int, int]] = None
    """(m_up, m_down); taken from the FCIDUMP header if unset."""
    frozen: tuple[int, ...] = ()
    """Frozen spatial orbitals (0-based)."""
    top_k: int = 4
    cutoff: float = 1e-8
    evaluator: str = "exact"
    """`exact` (statevector), `density` (noisy, no sampling) or
    `sampled`."""
    shots: int = DEFAULT_SHOTS
    seed: Optional[int] = None
    p2: float = 0.01
    p1: float = 0.001
    e01: float = 0.0
    e10: float = 0.0
    mitigate_readout: bool = True
    post_select: bool = False
    replicas: tuple[int, ...] = DEFAULT_REPLICAS
    zne_degree_diag: int = 2
    """Degree of the energy and QSE-diagonal extrapolations."""
    zne_degree_offdiag: int = 1
    """Degree of the QSE off-diagonal extrapolation."""
    zne_abscissa: str = "replicas"
    qse_ops: str = "singles-doubles"
    qse_ground: Optional[str] = None
    """`qse` or `exact`; unset means `qse` for the exact evaluator and
    `exact` otherwise."""
    states: Optional[int] = None
    """Number of FCI states; unset means the whole sector."""
    optimizer: str = "cobyla"
    tol: float = 1e-6
    patience: int = 5
    max_iterations: int = 200
    output: Optional[str] = None
    """Results document path."""

    def validate(self) -> None:
        """Raises `ConfigError` describing the first invalid setting."""
        source = self.hamiltonian
        if not source.startswith(BUNDLED_PREFIX) and not os.path.isfile(
            source
        ):
            raise ConfigError(f"Hamiltonian file {source!r} does not exist.")
        choices = (
            ("format", self.format, FORMATS),
            ("evaluator", self.evaluator, EVALUATORS),
            ("qse_ops", self.qse_ops, QSE_MODES),
            ("zne_abscissa", self.zne_abscissa, ABSCISSAS),
            ("optimizer", self.optimizer, METHODS),
        )
        for name, value, allowed in choices:
            if value not in allowed:
                raise ConfigError(
                    f"{name} must be one of {', '.join(allowed)}, not "
                    f"{value!r}."
                )
        if self.qse_ground is not None and self.qse_ground not in QSE_GROUNDS:
            raise ConfigError(f"Invalid QSE ground {self.qse_ground!r}.")
        if self.sector is not None and (
            len(self.sector) != 2 or min(self.sector) < 0
        ):
            raise ConfigError(f"Invalid sector {self.sector}.")
        if any(not isinstance(f, int) or f < 0 for f in self.frozen):
            raise ConfigError(f"Invalid frozen orbitals {self.frozen}.")
        for name in ("p2", "p1", "e01", "e10"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name}={value} is outside [0, 1].")
        if self.shots < 1:
            raise ConfigError(f"shots must be positive, not {self.shots}.")
        if self.evaluator == "sampled" and self.seed is None:
            raise ConfigError("The sampled evaluator requires a seed.")
        if self.top_k < 1:
            raise ConfigError(f"top_k must be positive, not {self.top_k}.")
        if self.cutoff < 0:
            raise ConfigError("cutoff must not be negative.")
        if not self.replicas or min(self.replicas) < 1:
            raise ConfigError(f"Invalid replica list {self.replicas}.")
        for name in ("zne_degree_diag", "zne_degree_offdiag"):
            degree = getattr(self, name)
            if degree not in (1, 2):
                raise ConfigError(f"{name} must be 1 or 2, not {degree}.")
            if len(self.replicas) <= degree:
                raise ConfigError(
                    f"{len(self.replicas)} replica counts are too few for "
                    f"a degree-{degree} fit."
                )
        if self.states is not None and self.states < 1:
            raise ConfigError(f"states must be positive, not {self.states}.")
        if self.tol <= 0 or self.patience < 1 or self.max_iterations < 1:
            raise ConfigError("Invalid optimizer stopping parameters.")

    #
    # Echo
    #

    def to_dict(self) -> dict[str, Any]:
        """Returns a JSON-compatible echo of every setting."""
        echo = dataclasses.asdict(self)
        for key, value in echo.items():
            if isinstance(value, tuple):
                echo[key] = list(value)
        return echo

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], /) -> "ExperimentConfig":
        """Creates a config from an echo; a results document's `config`
        section is accepted as well.

        Raises `ConfigError` on unknown keys.
        """
        if "schema" in data and "config" in data:
            data = data["config"]
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(
                f"Unknown configuration keys: {', '.join(sorted(unknown))}."
            )
        values = {}
        for key, value in data.items():
            if isinstance(value, list):
                value = tuple(value)
            values[key] = value
        return cls(**values)

    @classmethod
    def load(cls, path: str, /) -> "ExperimentConfig":
        """Reads an echo from a JSON file.

        Raises `ConfigError` if it cannot be read.
        """
        try:
            with open(path, encoding="utf8") as file:
                data = json.load(file)
        except (OSError, json.JSONDecodeError) as error:
            raise ConfigError(f"Cannot read config {path!r}: {error}")
        if not isinstance(data, dict):
            raise ConfigError(f"Config {path!r} is not a JSON object.")
        return cls.from_dict(data)

    def with_overrides(self, **overrides: Any) -> "ExperimentConfig":
        """Returns a copy with the non-None overrides applied."""
        given = {k: v for k, v in overrides.items() if v is not None}
        return dataclasses.replace(self, **given)

    #
    # Derived objects
    #

    def noise_model(self) -> NoiseModel:
        return NoiseModel(self.p2, self.p1, self.e01, self.e10)

    def make_evaluator(
        self, physical_count: Optional[int] = None, /
    ) -> Evaluator:
        """Returns the configured evaluator; `physical_count` is used when
        post-selection is on."""
        if self.evaluator == "exact":
            return StatevectorEvaluator()
        selected = physical_count if self.post_select else None
        if self.evaluator == "density":
            return DensityMatrixEvaluator(
                self.noise_model(), self.mitigate_readout, selected
            )
        return SampledEvaluator(
            self.noise_model(),
            self.mitigate_readout,
            selected,
            self.shots,
            self.seed if self.seed is not None else 0,
        )

    def optimizer_config(self) -> OptimizerConfig:
        return OptimizerConfig(
            self.optimizer,
            tol=self.tol,
            patience=self.patience,
            max_iterations=self.max_iterations,
        )

    def resolved_qse_ground(self) -> str:
        if self.qse_ground is not None:
            return self.qse_ground
        return "qse" if self.evaluator == "exact" else "exact"
