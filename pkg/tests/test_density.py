"""Density file parsing, validation and the position/volume transform."""

from __future__ import annotations

import math

import numpy as np
import pytest

from bubbleline.config import DEFAULT_CONFIG
from bubbleline.density import Coordinate, DensityModel
from bubbleline.errors import (
    CoordinateError,
    DensityFileError,
    ModelInvalidError,
    UsageError,
)

# Integral of exp(x^2) over [0, 1], from the imaginary error function at
# 40-digit precision.
BORELL_VOLUME_AT_ONE = 1.4626517459071816


class TestFromText:
    def test_minimal_file(self):
        model = DensityModel.from_text(
            "coordinate = volume\nf = V^2 + 1\n", name="t"
        )
        assert model.coordinate is Coordinate.VOLUME
        assert model.expr.formula() == "V^2 + 1"
        assert model.analytic_L is None and model.analytic_M is None

    def test_comments_and_blank_lines(self):
        text = "# header\n\ncoordinate = position # trailing\nf = exp(x^2)\n"
        model = DensityModel.from_text(text, name="t")
        assert model.coordinate is Coordinate.POSITION

    def test_overrides_parsed(self):
        text = "coordinate = volume\nf = V^2 + 1\nL = inf\nM = inf\n"
        model = DensityModel.from_text(text, name="t")
        assert model.analytic_L is not None and model.analytic_L.is_pos_inf
        assert model.analytic_M is not None and model.analytic_M.is_pos_inf

    def test_finite_override(self):
        text = "coordinate = volume\nf = sqrt(V^2 + 1) - 1/2\nM = 0.5\n"
        model = DensityModel.from_text(text, name="t")
        assert float(model.analytic_M) == 0.5

    @pytest.mark.parametrize(
        "text",
        [
            "f = V^2 + 1\n",  # missing coordinate
            "coordinate = volume\n",  # missing formula
            "coordinate = sideways\nf = V^2 + 1\n",
            "coordinate = volume\ncoordinate = volume\nf = V^2 + 1\n",
            "coordinate = volume\nf = V^2 + 1\nspin = up\n",
            "coordinate = volume\nf =\n",
            "coordinate = volume\nf = V^2 + 1\nL = -2\n",
            "coordinate = volume\nf = V^2 + 1\nM = -inf\n",
            "coordinate = volume\nf = V^2 + 1\nL = soon\n",
            "just words\n",
        ],
    )
    def test_rejects_malformed(self, text):
        with pytest.raises(DensityFileError):
            DensityModel.from_text(text, name="t")


class TestValidation:
    def test_corpus_passes(
        self,
        abs_model,
        sqrt_model,
        borell_model,
        atan_model,
        quadratic_model,
        gauss_volume_model,
        exp_cosh_model,
    ):
        for model in (
            abs_model,
            sqrt_model,
            borell_model,
            atan_model,
            quadratic_model,
            gauss_volume_model,
            exp_cosh_model,
        ):
            report = model.validate()
            assert report.passed, (model.name, report.failures)

    @pytest.mark.parametrize(
        "formula,expected_failures",
        [
            ("V", {"positive", "even_symmetry"}),
            ("V^2", {"positive"}),
            ("1 + abs(V)", {"centered_slope", "strict_convexity"}),
            ("exp(V)", {"even_symmetry"}),
            ("2 + atan(V)", {"even_symmetry"}),
            ("2 - V^2", {"positive"}),
        ],
    )
    def test_rejections(self, formula, expected_failures):
        model = DensityModel.from_formula(formula, "volume", name="bad")
        report = model.validate()
        assert not report.passed
        assert expected_failures <= {c.name for c in report.failures}

    def test_linear_positional_fails_strict_convexity(self):
        # In volume coordinate a non-log-convex density is not strictly
        # convex; 1 + x^2 has (log f)' decreasing eventually.
        model = DensityModel.from_formula("1 + x^2", "position", name="poly")
        report = model.validate()
        assert not report.passed
        assert "strict_convexity" in {c.name for c in report.failures}

    def test_require_valid_raises_with_check_names(self):
        model = DensityModel.from_formula("V", "volume", name="bad")
        with pytest.raises(ModelInvalidError) as info:
            model.require_valid()
        assert "positive" in str(info.value)

    def test_validation_is_cached(self, sqrt_model):
        assert sqrt_model.validate() is sqrt_model.validate()


class TestTransform:
    def test_volume_at_one_matches_independent_quadrature(self, borell_model):
        assert borell_model.volume_of_position(1.0) == pytest.approx(
            BORELL_VOLUME_AT_ONE, abs=1e-12
        )

    def test_round_trip(self, borell_model):
        for x in np.linspace(0.0, 3.0, 31):
            v = borell_model.volume_of_position(float(x))
            back = borell_model.position_of_volume(v)
            assert back == pytest.approx(float(x), rel=1e-10, abs=1e-10)

    def test_volume_is_odd(self, borell_model):
        for x in (0.3, 1.1, 2.4):
            assert borell_model.volume_of_position(-x) == pytest.approx(
                -borell_model.volume_of_position(x), rel=1e-14
            )

    def test_volume_is_increasing(self, borell_model):
        xs = np.linspace(-2.0, 2.0, 17)
        vs = [borell_model.volume_of_position(float(x)) for x in xs]
        assert all(a < b for a, b in zip(vs, vs[1:]))

    def test_density_in_volume_matches_position_evaluation(self, borell_model):
        for x in (0.0, 0.7, 1.8, 2.6):
            v = borell_model.volume_of_position(x)
            assert borell_model.density_in_volume(v) == pytest.approx(
                math.exp(x * x), rel=1e-9
            )

    def test_exp_cosh_transform(self, exp_cosh_model):
        v = exp_cosh_model.volume_of_position(1.5)
        assert exp_cosh_model.position_of_volume(v) == pytest.approx(
            1.5, rel=1e-10
        )

    def test_volume_model_has_no_transform(self, sqrt_model):
        with pytest.raises(CoordinateError):
            sqrt_model.volume_of_position(1.0)

    def test_non_finite_input_rejected(self, borell_model):
        with pytest.raises(UsageError):
            borell_model.volume_of_position(math.inf)
        with pytest.raises(UsageError):
            borell_model.position_of_volume(math.nan)


class TestVolumeEvaluation:
    def test_scalar_values(self, sqrt_model):
        for v in (-2.0, 0.0, 0.5, 3.0):
            assert sqrt_model.density_in_volume(v) == pytest.approx(
                math.sqrt(v * v + 1) - 0.5, rel=1e-15
            )

    def test_slope_matches_finite_difference(self, sqrt_model, borell_model):
        for model in (sqrt_model, borell_model):
            for v in (0.25, 1.0, 2.5):
                h = 1e-6
                numeric = (
                    model.density_in_volume(v + h) - model.density_in_volume(v - h)
                ) / (2 * h)
                assert model.density_slope_in_volume(v) == pytest.approx(
                    numeric, rel=1e-5
                )

    def test_slope_is_odd(self, sqrt_model):
        assert sqrt_model.density_slope_in_volume(-1.2) == pytest.approx(
            -sqrt_model.density_slope_in_volume(1.2), rel=1e-12
        )

    def test_vectorized_matches_scalar(self, sqrt_model, borell_model):
        # Positional models serve the batch path from an interpolant, so it
        # is a little looser than the scalar (exactly inverted) path.
        points = np.linspace(-3.0, 3.0, 23)
        for model in (sqrt_model, borell_model):
            batch = model.density_in_volume_many(points)
            for i, v in enumerate(points):
                assert batch[i] == pytest.approx(
                    model.density_in_volume(float(v)), rel=1e-7
                )

    def test_bound_fn_matches_method(self, borell_model):
        fn = borell_model.density_in_volume_fn()
        points = np.array([-1.5, 0.0, 0.9, 2.2])
        assert np.allclose(fn(points), borell_model.density_in_volume_many(points))


class TestConfigPlumbing:
    def test_custom_config_is_attached(self):
        config = DEFAULT_CONFIG.replace(grid_k_max=6)
        model = DensityModel.from_formula(
            "V^2 + 1", "volume", config=config, name="t"
        )
        assert model.config.grid_k_max == 6
        assert model.validate().passed
