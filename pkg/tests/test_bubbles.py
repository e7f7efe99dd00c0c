"""Perimeter comparison, the tie curve, and the blowup volume."""

from __future__ import annotations

import math

import pytest

from bubbleline.bubbles import (
    Regime,
    Verdict,
    blowup_time,
    classify,
    mu,
    mu_limit,
    perimeter_double,
    perimeter_triple,
    tie_curve,
    tie_volume,
)
from bubbleline.density import DensityModel
from bubbleline.errors import (
    InconclusiveLimitsError,
    NoTieError,
    UndefinedQuantityError,
    UsageError,
)
from bubbleline.limits import asymptotic_profile

# Frozen from a 60-digit recomputation of the same quantities.
SQRT_P2_07_19 = 2.8374712649616187
SQRT_P3_07_19 = 3.399205903413054
SQRT_MU_07_19 = 0.5617346384514356
# Root of the one-sided perimeter gap, certified by a sign change; the
# second value is what this package converges to (the gap comes from the
# doubling-defect ladder stopping within its own 1e-9 streak tolerance).
SQRT_V0_TRUE = 0.4315067345126581
SQRT_V0_PINNED = 0.4315067339630332
# Tie volume at v1 = 0.2: root of mu(0.2, v2) = 0 in v2.  The slope
# d(mu)/d(v2) there is about -0.0109, so 1e-6 on the root corresponds to
# roughly 1e-8 on mu, comfortably above the solver's mu tolerance.
SQRT_TIE_AT_02 = 11.108558624158803
DEEP_TRIPLE = (0.2157533669815166, 23.839091107494088)


@pytest.fixture(scope="module")
def sqrt_profile(sqrt_model):
    return asymptotic_profile(sqrt_model)


@pytest.fixture(scope="module")
def abs_profile(abs_model):
    return asymptotic_profile(abs_model)


class TestPerimeters:
    def test_sqrt_equal_volumes_closed_form(self, sqrt_model):
        # V1 = V2 = 1: the double sits on [-1, 1] and costs
        # f(-1) + f(0) + f(1) = 2 sqrt(2) - 1/2 - 1 + ... collected below.
        p2 = perimeter_double(sqrt_model, 1.0, 1.0)
        p3 = perimeter_triple(sqrt_model, 1.0, 1.0)
        assert p2 == pytest.approx(2 * math.sqrt(2) - 0.5, abs=1e-10)
        assert p3 == pytest.approx(2 * math.sqrt(1.25) + 2 * math.sqrt(2) - 2,
                                   abs=1e-12)

    def test_sqrt_frozen_point(self, sqrt_model):
        assert perimeter_double(sqrt_model, 0.7, 1.9) == pytest.approx(
            SQRT_P2_07_19, abs=1e-9
        )
        assert perimeter_triple(sqrt_model, 0.7, 1.9) == pytest.approx(
            SQRT_P3_07_19, abs=1e-12
        )
        assert mu(sqrt_model, 0.7, 1.9) == pytest.approx(
            SQRT_MU_07_19, abs=1e-9
        )

    def test_triple_is_four_boundary_sum(self, borell_model):
        # 2 f(v1/2) + 2 f((v1+v2)/2), no equilibrium solve involved.
        v1, v2 = 0.6, 1.4
        expected = 2 * borell_model.density_in_volume(v1 / 2) + \
            2 * borell_model.density_in_volume((v1 + v2) / 2)
        assert perimeter_triple(borell_model, v1, v2) == pytest.approx(
            expected, rel=1e-12
        )

    @pytest.mark.parametrize("v", [0.25, 0.8, 1.7, 3.0])
    def test_equal_volume_identity(self, sqrt_model, abs_model, borell_model, v):
        # At V1 = V2 = v the double is symmetric, so
        # mu(v, v) = 2 f(v/2) - f(0) exactly.
        for model in (sqrt_model, abs_model, borell_model):
            expected = 2 * model.density_in_volume(v / 2) - \
                model.density_in_volume(0.0)
            assert mu(model, v, v) == pytest.approx(expected, abs=1e-10)
            assert mu(model, v, v) > 0

    def test_rejects_disordered_volumes(self, sqrt_model):
        with pytest.raises(UsageError):
            mu(sqrt_model, 2.0, 1.0)


class TestClassify:
    def test_fields_are_consistent(self, sqrt_model):
        result = classify(sqrt_model, 0.7, 1.9)
        assert result.mu == pytest.approx(result.p3 - result.p2, abs=1e-14)
        assert result.tie_band == pytest.approx(1e-9 * (1 + result.p2))
        assert result.verdict is Verdict.DOUBLE
        assert result.v_tilde == pytest.approx(-0.8978809123945802, abs=1e-9)

    def test_triple_wins_far_out(self, sqrt_model):
        # Past the tie volume the triple is cheaper: mu = p3 - p2 < 0.
        result = classify(sqrt_model, 0.2, 20.0)
        assert result.verdict is Verdict.TRIPLE
        assert result.mu < 0

    def test_verdict_flips_across_tie(self, sqrt_model, sqrt_profile):
        blowup = blowup_time(sqrt_model, sqrt_profile)
        lam = tie_volume(sqrt_model, sqrt_profile, blowup, 0.2).tie_v2
        assert classify(sqrt_model, 0.2, lam * 0.9).verdict is Verdict.DOUBLE
        assert classify(sqrt_model, 0.2, lam * 1.1).verdict is Verdict.TRIPLE

    def test_tie_band_can_flag_ties(self, sqrt_model, sqrt_profile):
        blowup = blowup_time(sqrt_model, sqrt_profile)
        lam = tie_volume(sqrt_model, sqrt_profile, blowup, 0.2).tie_v2
        wide = DensityModel.from_formula(
            sqrt_model.expr.formula(),
            "volume",
            config=sqrt_model.config.replace(tie_band_scale=1.0),
            name="wide",
        )
        assert classify(wide, 0.2, lam).verdict is Verdict.TIE

    def test_abs_always_double(self, abs_model):
        for v1, v2 in [(0.1, 0.1), (0.5, 2.0), (1.0, 30.0)]:
            assert classify(abs_model, v1, v2).verdict is Verdict.DOUBLE

    def test_deep_triple_point(self, sqrt_model):
        result = classify(sqrt_model, *DEEP_TRIPLE)
        assert result.verdict is Verdict.TRIPLE
        assert result.mu == pytest.approx(-0.05848831306660429, abs=1e-9)


class TestMuLimit:
    def test_abs_limit_stays_positive(self, abs_model, abs_profile):
        # L = 1, M = 0: the limit gap stays positive for every v1, so the
        # double keeps winning no matter how large V2 grows.
        for v1 in (0.05, 0.5, 2.0, 8.0):
            value = mu_limit(abs_model, abs_profile, v1)
            assert value.is_finite and float(value) > 0

    def test_sqrt_limit_changes_sign(self, sqrt_model, sqrt_profile):
        # Below the blowup volume the limit gap is negative (a tie volume
        # exists); above it the double wins for every V2.
        below = mu_limit(sqrt_model, sqrt_profile, SQRT_V0_PINNED * 0.5)
        above = mu_limit(sqrt_model, sqrt_profile, SQRT_V0_PINNED * 1.5)
        assert float(below) < 0 < float(above)

    def test_increasing_in_v1(self, sqrt_model, sqrt_profile):
        values = [
            float(mu_limit(sqrt_model, sqrt_profile, v1))
            for v1 in (0.1, 0.3, 0.9, 2.7)
        ]
        assert all(a < b for a, b in zip(values, values[1:]))

    def test_infinite_defect_sends_limit_down(self, atan_model):
        profile = asymptotic_profile(atan_model)
        assert mu_limit(atan_model, profile, 1.0).is_neg_inf

    def test_infinite_slope_is_refused(self, quadratic_model):
        profile = asymptotic_profile(quadratic_model)
        with pytest.raises(UndefinedQuantityError):
            mu_limit(quadratic_model, profile, 1.0)

    def test_unsettled_profile_is_refused(self, atan_bare_model):
        profile = asymptotic_profile(atan_bare_model)
        with pytest.raises(InconclusiveLimitsError):
            mu_limit(atan_bare_model, profile, 1.0)


class TestBlowupTime:
    def test_abs_regime(self, abs_model, abs_profile):
        result = blowup_time(abs_model, abs_profile)
        assert result.regime is Regime.ALWAYS_DOUBLE
        assert float(result.v0) == 0.0
        assert result.gap_at_zero == pytest.approx(1 - math.log(2), abs=1e-8)

    def test_sqrt_regime_and_value(self, sqrt_model, sqrt_profile):
        result = blowup_time(sqrt_model, sqrt_profile)
        assert result.regime is Regime.FINITE_BLOWUP
        assert float(result.v0) == pytest.approx(SQRT_V0_TRUE, abs=1e-8)
        # Determinism pin: the bisection is reproducible to its bracket.
        assert float(result.v0) == pytest.approx(SQRT_V0_PINNED, abs=5e-10)
        lo, hi = result.bracket
        assert hi - lo < 1e-9
        assert lo <= float(result.v0) <= hi

    def test_sqrt_bracket_brackets_sign_change(
        self, sqrt_model, sqrt_profile
    ):
        result = blowup_time(sqrt_model, sqrt_profile)
        lo, hi = result.bracket
        pad = 1e-7
        assert float(mu_limit(sqrt_model, sqrt_profile, lo - pad)) < 0
        assert float(mu_limit(sqrt_model, sqrt_profile, hi + pad)) > 0

    def test_sqrt_gap_at_zero(self, sqrt_model, sqrt_profile):
        # 2 f(0) - 2 f(Vh) + Vh L - M with f'(Vh) = L/2 gives 3/2 - sqrt(3).
        result = blowup_time(sqrt_model, sqrt_profile)
        assert result.gap_at_zero == pytest.approx(
            1.5 - math.sqrt(3), abs=1e-8
        )

    def test_infinite_defect_means_no_blowup(self, atan_model):
        profile = asymptotic_profile(atan_model)
        result = blowup_time(atan_model, profile)
        assert result.regime is Regime.NO_BLOWUP
        assert result.v0.is_pos_inf
        assert result.bracket is None

    def test_infinite_slope_means_no_blowup(self, quadratic_model):
        profile = asymptotic_profile(quadratic_model)
        result = blowup_time(quadratic_model, profile)
        assert result.regime is Regime.NO_BLOWUP
        assert result.v0.is_pos_inf

    def test_unsettled_profile_is_refused(self, atan_bare_model):
        profile = asymptotic_profile(atan_bare_model)
        with pytest.raises(InconclusiveLimitsError):
            blowup_time(atan_bare_model, profile)


class TestTieVolume:
    def test_sqrt_frozen_value(self, sqrt_model, sqrt_profile):
        blowup = blowup_time(sqrt_model, sqrt_profile)
        sample = tie_volume(sqrt_model, sqrt_profile, blowup, 0.2)
        assert sample.v1 == 0.2
        assert sample.tie_v2 == pytest.approx(SQRT_TIE_AT_02, rel=1e-6)
        assert abs(sample.mu_at_tie) <= 1e-9

    def test_tie_really_ties(self, sqrt_model, sqrt_profile):
        blowup = blowup_time(sqrt_model, sqrt_profile)
        sample = tie_volume(sqrt_model, sqrt_profile, blowup, 0.3)
        assert abs(mu(sqrt_model, 0.3, sample.tie_v2)) < 1e-8

    def test_always_double_refuses(self, abs_model, abs_profile):
        blowup = blowup_time(abs_model, abs_profile)
        with pytest.raises(NoTieError):
            tie_volume(abs_model, abs_profile, blowup, 0.5)

    def test_past_blowup_refuses(self, sqrt_model, sqrt_profile):
        blowup = blowup_time(sqrt_model, sqrt_profile)
        with pytest.raises(NoTieError):
            tie_volume(sqrt_model, sqrt_profile, blowup, 0.6)

    def test_no_blowup_regime_always_has_tie(self, quadratic_model):
        profile = asymptotic_profile(quadratic_model)
        blowup = blowup_time(quadratic_model, profile)
        sample = tie_volume(quadratic_model, profile, blowup, 1.5)
        assert sample.tie_v2 >= 1.5
        assert abs(mu(quadratic_model, 1.5, sample.tie_v2)) < 1e-8


class TestTieCurve:
    def test_diverges_toward_blowup(self, sqrt_model, sqrt_profile):
        blowup = blowup_time(sqrt_model, sqrt_profile)
        v0 = float(blowup.v0)
        v1s = [(1 - 2.0**-j) * v0 for j in range(1, 11)]
        curve = [
            tie_volume(sqrt_model, sqrt_profile, blowup, v1).tie_v2
            for v1 in v1s
        ]
        assert all(a < b for a, b in zip(curve, curve[1:]))
        assert curve[-1] / curve[0] > 10

    def test_curve_object(self, sqrt_model, sqrt_profile):
        blowup = blowup_time(sqrt_model, sqrt_profile)
        curve = tie_curve(sqrt_model, sqrt_profile, blowup, 0.05, 0.4, 8)
        assert curve.regime is Regime.FINITE_BLOWUP
        assert len(curve.samples) == 8
        v1s = [s.v1 for s in curve.samples]
        assert v1s[0] == pytest.approx(0.05) and v1s[-1] == pytest.approx(0.4)
        assert all(a < b for a, b in zip(v1s, v1s[1:]))
        lams = [s.tie_v2 for s in curve.samples]
        assert all(a < b for a, b in zip(lams, lams[1:]))

    def test_curve_refuses_past_blowup(self, sqrt_model, sqrt_profile):
        blowup = blowup_time(sqrt_model, sqrt_profile)
        with pytest.raises(NoTieError):
            tie_curve(sqrt_model, sqrt_profile, blowup, 0.05, 0.99, 4)

    def test_no_blowup_curve(self, gauss_volume_model):
        profile = asymptotic_profile(gauss_volume_model)
        blowup = blowup_time(gauss_volume_model, profile)
        curve = tie_curve(gauss_volume_model, profile, blowup, 0.2, 2.0, 5)
        assert curve.regime is Regime.NO_BLOWUP
        for s in curve.samples:
            assert s.tie_v2 >= s.v1
            assert abs(s.mu_at_tie) <= 1e-8

    def test_always_double_curve_refuses(self, abs_model, abs_profile):
        blowup = blowup_time(abs_model, abs_profile)
        with pytest.raises(NoTieError) as info:
            tie_curve(abs_model, abs_profile, blowup, 0.1, 0.5, 4)
        assert "tie" in str(info.value).lower()
