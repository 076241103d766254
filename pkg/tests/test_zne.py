"""Testing module for zne.py"""

import math

import numpy as np
import pytest

from qeeqcc.pauli import PauliOperator, PauliString
from qeeqcc.qcc import EntanglerBlock, build_circuit, with_replicas
from qeeqcc.simulator import (
    DensityMatrixEvaluator,
    NoiseModel,
    StatevectorEvaluator,
    run_statevector,
)
from qeeqcc.zne import (
    extrapolate_arrays,
    noise_scales,
    zne_extrapolate,
    zne_pipeline,
)


LINEAR_POINTS = [(1.0, -1.9), (2.0, -1.8), (3.0, -1.7)]

HQ = PauliOperator.from_labels({"ZI": 1.0, "IZ": 0.5, "XY": 0.3})
BLOCKS = [EntanglerBlock(PauliString.from_label("XY"), 0.6)]


class TestExtrapolate:
    """Tests for polynomial extrapolation to zero noise."""

    @pytest.mark.parametrize("degree", [1, 2])
    def test_linear_points(self, degree: int) -> None:
        fit = zne_extrapolate(LINEAR_POINTS, degree)
        assert fit.value == pytest.approx(-2.0)
        assert fit.residual == pytest.approx(0.0, abs=1e-12)
        assert fit.degree == degree
        assert fit.scales == (1.0, 2.0, 3.0)

    def test_quadratic_points(self) -> None:
        points = [(x, 1.0 + 0.5 * x - 0.25 * x**2) for x in (1, 2, 3, 4)]
        assert zne_extrapolate(points, 2).value == pytest.approx(1.0)

    def test_stderr_propagation(self) -> None:
        fit = zne_extrapolate(LINEAR_POINTS, 1, stderrs=[0.01] * 3)
        # intercept weights of a line through x = 1, 2, 3
        assert fit.stderr == pytest.approx(0.01 * math.sqrt(21) / 3)
        assert zne_extrapolate(LINEAR_POINTS, 1).stderr == 0.0

    @pytest.mark.parametrize(
        "points,degree",
        [
            (LINEAR_POINTS, 3),
            (LINEAR_POINTS, 0),
            (LINEAR_POINTS[:2], 2),
            (LINEAR_POINTS[:1], 1),
        ],
    )
    def test_invalid(self, points, degree: int) -> None:
        with pytest.raises(ValueError):
            zne_extrapolate(points, degree)

    def test_unknown_abscissa(self) -> None:
        with pytest.raises(ValueError):
            zne_extrapolate(LINEAR_POINTS, 1, abscissa="depth")

    def test_arrays(self) -> None:
        base = np.array([[1.0, 2.0], [3.0, 4.0]])
        slope = np.array([[0.1, -0.2], [0.0, 0.5j]])
        scales = [1.0, 2.0, 3.0]
        arrays = [base + s * slope for s in scales]
        assert np.allclose(extrapolate_arrays(scales, arrays, 1), base)
        with pytest.raises(ValueError):
            extrapolate_arrays(scales[:2], arrays[:2], 2)


class TestNoiseScales:
    """Tests for the noise-scale axis."""

    def test_replicas(self) -> None:
        assert noise_scales(BLOCKS, [1, 2, 3]) == [1.0, 2.0, 3.0]

    def test_cnots(self) -> None:
        blocks = [EntanglerBlock(PauliString.from_label("XXXY"), 0.1, 4)]
        assert noise_scales(blocks, [1, 2, 3], "cnots") == [6.0, 12.0, 18.0]

    def test_cnots_without_cnot(self) -> None:
        blocks = [EntanglerBlock(PauliString.from_label("IY"), 0.1)]
        with pytest.raises(ValueError):
            noise_scales(blocks, [1, 2], "cnots")


class TestPipeline:
    """Tests for replica evaluation and extrapolation."""

    def test_exact_evaluator_returns_noiseless_energy(self) -> None:
        evaluator = StatevectorEvaluator()
        exact, _ = evaluator.energy(HQ, build_circuit(BLOCKS, 2))
        fit = zne_pipeline(HQ, BLOCKS, 0, evaluator)
        assert fit.value == pytest.approx(exact)
        assert fit.values == pytest.approx((exact,) * 5)
        assert fit.scales == (1.0, 2.0, 3.0, 4.0, 5.0)

    def test_noiseless_state_is_replica_independent(self) -> None:
        blocks = BLOCKS + [EntanglerBlock(PauliString.from_label("YZ"), -1.3)]
        single = run_statevector(build_circuit(blocks, 2))
        for replicas in range(2, 6):
            circuit = build_circuit(with_replicas(blocks, replicas), 2)
            difference = run_statevector(circuit) - single
            assert np.max(np.abs(difference)) <= 1e-12

    def test_quadratic_fit_removes_most_noise_bias(self) -> None:
        exact, _ = StatevectorEvaluator().energy(HQ, build_circuit(BLOCKS, 2))
        evaluator = DensityMatrixEvaluator(noise=NoiseModel(p2=0.01))
        fit = zne_pipeline(
            HQ, BLOCKS, 0, evaluator, replicas=(1, 2, 3, 4, 5), degree=2
        )
        unmitigated = abs(fit.values[0] - exact)
        assert unmitigated > 1e-3
        assert abs(fit.value - exact) <= 0.1 * unmitigated

    def test_cnot_abscissa(self) -> None:
        fit = zne_pipeline(
            HQ,
            BLOCKS,
            0,
            StatevectorEvaluator(),
            replicas=(1, 2, 3),
            degree=1,
            abscissa="cnots",
        )
        assert fit.scales == (2.0, 4.0, 6.0)
        assert fit.abscissa == "cnots"

    @pytest.mark.parametrize("replicas", [(), (0, 1, 2)])
    def test_invalid_replicas(self, replicas: tuple[int, ...]) -> None:
        with pytest.raises(ValueError):
            zne_pipeline(HQ, BLOCKS, 0, StatevectorEvaluator(), replicas)
