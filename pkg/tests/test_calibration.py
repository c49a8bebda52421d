import math

import numpy as np
import pytest

from sasvkit import (
    BinaryScores,
    CalibrationModel,
    CostModel,
    DataError,
    ScoreScaling,
    SolverError,
    TrainConfig,
    ValidationError,
    apply_calibration,
    cllr,
    eer,
    fit_beta,
    fit_logreg,
    min_dcf,
    pav_llr,
    scale_to_unit,
)

EPS = 1e-6


def matched_llr_samples(rng, n):
    """Scores that already are calibrated LLRs: N(1, 2) vs N(-1, 2)."""
    return rng.normal(1.0, math.sqrt(2.0), n), rng.normal(-1.0, math.sqrt(2.0), n)


class TestScaling:
    def test_cosine_zero_maps_to_half(self):
        assert scale_to_unit(0.0, ScoreScaling("cosine_affine")) == 0.5

    def test_cosine_boundaries_clamped(self):
        scaling = ScoreScaling("cosine_affine")
        assert scale_to_unit(1.0, scaling) == 1.0 - EPS
        assert scale_to_unit(-1.0, scaling) == EPS
        assert scale_to_unit(3.0, scaling) == 1.0 - EPS

    def test_logistic(self):
        assert scale_to_unit(0.0, ScoreScaling("logistic")) == 0.5
        assert scale_to_unit(-100.0, ScoreScaling("logistic")) == EPS

    def test_identity_clamps_only(self):
        scaling = ScoreScaling("identity")
        assert scale_to_unit(0.25, scaling) == 0.25
        assert scale_to_unit(2.0, scaling) == 1.0 - EPS

    def test_validation(self):
        with pytest.raises(ValidationError):
            ScoreScaling("affine")
        with pytest.raises(ValidationError):
            ScoreScaling("identity", epsilon=0.7)


class TestFitLogreg:
    def test_recovers_identity_on_calibrated_scores(self):
        rng = np.random.default_rng(30)
        pos, neg = matched_llr_samples(rng, 100_000)
        model = fit_logreg(pos, neg)
        assert 0.9 <= model.slope <= 1.1
        assert abs(model.offset) < 0.1

    def test_separated_data_converges_with_large_slope(self):
        rng = np.random.default_rng(31)
        model = fit_logreg(rng.normal(20, 1, 200), rng.normal(-20, 1, 200))
        assert model.slope > 1.0

    def test_no_information_gives_flat_map(self):
        rng = np.random.default_rng(32)
        common = rng.normal(0.0, 1.0, 50_000)
        model = fit_logreg(common, rng.normal(0.0, 1.0, 50_000))
        assert abs(model.slope) < 0.05
        assert abs(model.offset) < 0.05

    def test_iteration_cap_raises_with_grad_norm(self):
        rng = np.random.default_rng(33)
        pos, neg = matched_llr_samples(rng, 500)
        with pytest.raises(SolverError) as err:
            fit_logreg(pos, neg, TrainConfig(max_iters=1))
        assert err.value.grad_norm is not None

    def test_single_valued_pool_degenerate(self):
        with pytest.raises(DataError, match="single value"):
            fit_logreg([1.0, 1.0], [1.0])

    def test_empty_class(self):
        with pytest.raises(DataError):
            fit_logreg([], [1.0])

    def test_separable_single_valued_classes_grow_slope(self):
        # fully separable constants: slope rises until the gradient drops
        # under tolerance (or the cap errors out)
        model = fit_logreg([0.9] * 4, [0.1] * 4)
        assert model.slope > 10.0

    def test_effective_prior_shifts_offset(self):
        rng = np.random.default_rng(34)
        pos, neg = matched_llr_samples(rng, 50_000)
        skewed = fit_logreg(pos, neg, TrainConfig(effective_prior=0.9))
        balanced = fit_logreg(pos, neg)
        # prior-weighted loss with the logit shift keeps the LLR map stable
        assert abs(skewed.offset - balanced.offset) < 0.2
        assert abs(skewed.slope - balanced.slope) < 0.2


class TestFitBeta:
    def test_equals_logreg_on_logit_feature(self):
        rng = np.random.default_rng(35)
        pos = rng.uniform(0.05, 0.95, 2000)
        neg = rng.uniform(0.02, 0.6, 2000)
        scaling = ScoreScaling("identity")
        beta = fit_beta(pos, neg, scaling)

        def logit(p):
            p = np.clip(p, EPS, 1 - EPS)
            return np.log(p) - np.log1p(-p)

        logreg = fit_logreg(logit(pos), logit(neg))
        assert beta.slope == logreg.slope
        assert beta.offset == logreg.offset

    def test_recovers_identity_on_sigmoid_scores(self):
        rng = np.random.default_rng(36)
        pos, neg = matched_llr_samples(rng, 100_000)
        sigmoid = lambda x: 1.0 / (1.0 + np.exp(-x))
        model = fit_beta(sigmoid(pos), sigmoid(neg), ScoreScaling("identity"))
        assert 0.9 <= model.slope <= 1.1
        assert abs(model.offset) < 0.1


class TestApply:
    def test_logreg_affine(self):
        model = CalibrationModel(kind="logreg", slope=2.0, offset=1.0)
        assert apply_calibration(model, [0.5]).tolist() == [2.0]

    def test_beta_identity_at_half(self):
        model = CalibrationModel(
            kind="beta", slope=1.0, offset=0.0, scaling=ScoreScaling("identity")
        )
        assert apply_calibration(model, [0.5]).tolist() == [0.0]

    def test_order_preserved(self):
        rng = np.random.default_rng(37)
        scores = np.sort(rng.normal(0, 1, 100))
        model = CalibrationModel(
            kind="beta", slope=0.7, offset=-0.3, scaling=ScoreScaling("logistic")
        )
        out = apply_calibration(model, scores)
        assert np.all(np.diff(out) >= 0)

    def test_negative_slope_rejected(self):
        with pytest.raises(ValidationError):
            CalibrationModel(kind="logreg", slope=-0.1, offset=0.0)


class TestSerialization:
    def test_round_trip_exact(self):
        model = CalibrationModel(
            kind="beta",
            slope=1.0 / 3.0,
            offset=-2.718281828459045,
            scaling=ScoreScaling("cosine_affine", 1e-6),
        )
        loaded = CalibrationModel.from_json(model.to_json())
        assert loaded == model
        assert loaded.to_json() == model.to_json()

    def test_logreg_scaling_null(self):
        model = CalibrationModel(kind="logreg", slope=1.5, offset=0.25)
        text = model.to_json()
        assert '"scaling": null' in text
        assert CalibrationModel.from_json(text) == model

    def test_invalid_json_rejected(self):
        with pytest.raises(ValidationError):
            CalibrationModel.from_json("{broken")
        with pytest.raises(ValidationError):
            CalibrationModel.from_json('"just a string"')


class TestPav:
    def test_two_point_structure(self):
        cal = pav_llr([2.0], [1.0])
        low, high = cal.apply([0.0, 1.5]).tolist(), cal.apply([2.0, 3.0]).tolist()
        expected_low = math.log(EPS) - math.log1p(-EPS)
        assert low == [expected_low, expected_low]
        assert high == [-expected_low, -expected_low]

    def test_interleaved_equal_scores_flat(self):
        cal = pav_llr([0.5, 0.5], [0.5, 0.5])
        assert cal.apply([0.0, 0.5, 1.0]).tolist() == [0.0, 0.0, 0.0]

    def test_output_monotone(self):
        rng = np.random.default_rng(38)
        cal = pav_llr(rng.normal(1, 1, 500), rng.normal(-1, 1, 500))
        grid = np.linspace(-5, 5, 200)
        assert np.all(np.diff(cal.apply(grid)) >= 0)

    def test_class_imbalance_reweighted(self):
        # 10x more negatives than positives; equal class weighting keeps the
        # pooled-block LLR at zero where the classes fully overlap
        cal = pav_llr([0.0] * 10, [0.0] * 100)
        assert cal.apply([0.0]).tolist() == [0.0]

    def test_beats_parametric_calibrators(self):
        rng = np.random.default_rng(39)
        for trial in range(20):
            n = int(rng.integers(200, 1200))
            pos = rng.normal(rng.uniform(0.2, 2.0), rng.uniform(0.5, 2.0), n)
            neg = rng.normal(-rng.uniform(0.2, 2.0), rng.uniform(0.5, 2.0), n)
            pav_scores = BinaryScores(
                pav_llr(pos, neg).apply(pos), pav_llr(pos, neg).apply(neg)
            )
            logreg = fit_logreg(pos, neg)
            logreg_scores = BinaryScores(
                apply_calibration(logreg, pos), apply_calibration(logreg, neg)
            )
            beta = fit_beta(pos, neg, ScoreScaling("logistic"))
            beta_scores = BinaryScores(
                apply_calibration(beta, pos), apply_calibration(beta, neg)
            )
            assert cllr(pav_scores) <= cllr(logreg_scores) + 1e-9
            assert cllr(pav_scores) <= cllr(beta_scores) + 1e-9


class TestMetricInvariance:
    def test_calibration_leaves_eer_and_min_dcf_bitwise(self):
        rng = np.random.default_rng(40)
        cost = CostModel()
        for _ in range(5):
            pos = rng.normal(1.0, 1.0, 300)
            neg = rng.normal(-1.0, 1.0, 300)
            raw = BinaryScores(pos, neg)
            for model in (
                fit_logreg(pos, neg),
                fit_beta(pos, neg, ScoreScaling("logistic")),
            ):
                assert model.slope > 0
                cal = BinaryScores(
                    apply_calibration(model, pos), apply_calibration(model, neg)
                )
                assert eer(cal) == eer(raw)
                assert min_dcf(cal, cost)[0] == min_dcf(raw, cost)[0]

    def test_calibration_reduces_cllr_of_distorted_llrs(self):
        rng = np.random.default_rng(41)
        pos, neg = matched_llr_samples(rng, 20_000)
        distorted = BinaryScores(3.0 * pos + 2.0, 3.0 * neg + 2.0)
        model = fit_logreg(distorted.pos, distorted.neg)
        calibrated = BinaryScores(
            apply_calibration(model, distorted.pos),
            apply_calibration(model, distorted.neg),
        )
        assert cllr(calibrated) < cllr(distorted)
        # the fit should roughly invert the distortion
        assert model.slope == pytest.approx(1.0 / 3.0, rel=0.15)
