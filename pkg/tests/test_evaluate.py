import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import allpairs_auc, iou_sweep_naive
from segconf.confmaps import ConfidenceMap, Method
from segconf.errors import ValidationError
from segconf.evaluate import (
    Confusion,
    ThresholdGrid,
    auc,
    calibration_table,
    confusion,
    iou_a,
    iou_gain_by_range,
    roc_curve,
    seg_metrics,
)
from segconf.grids import BinaryMask, ScoreMap


def score_map(values):
    return ScoreMap(np.asarray(values, dtype=np.float32))


def mask(values):
    return BinaryMask(np.asarray(values, dtype=np.uint8))


class TestConfusion:
    def test_all_ones_match(self):
        c = confusion(mask([[1, 1], [1, 1]]), mask([[1, 1], [1, 1]]))
        assert (c.tp, c.fp, c.tn, c.fn) == (4, 0, 0, 0)

    def test_all_false_positive(self):
        c = confusion(mask([[1, 1], [1, 1]]), mask([[0, 0], [0, 0]]))
        assert (c.tp, c.fp, c.tn, c.fn) == (0, 4, 0, 0)

    def test_mixed_enumeration(self):
        c = confusion(mask([[1, 0, 1, 0]]), mask([[1, 1, 0, 0]]))
        assert (c.tp, c.fn, c.fp, c.tn) == (1, 1, 1, 1)
        assert c.total == 4

    def test_dimension_mismatch(self):
        with pytest.raises(ValidationError):
            confusion(mask([[1]]), mask([[1, 0]]))


class TestSegMetrics:
    def test_perfect_prediction(self):
        m = seg_metrics(Confusion(tp=4, fp=0, tn=4, fn=0))
        assert m.iou == m.precision == m.recall == m.f1 == m.accuracy == 1.0

    def test_arithmetic_case(self):
        m = seg_metrics(Confusion(tp=1, fp=1, tn=0, fn=1))
        assert m.iou == pytest.approx(1 / 3)
        assert m.precision == 0.5 and m.recall == 0.5 and m.f1 == 0.5

    def test_degenerate_conventions(self):
        m = seg_metrics(Confusion(tp=0, fp=0, tn=4, fn=0))
        assert m.iou == 0.0 and m.precision == 0.0 and m.recall == 0.0 and m.f1 == 0.0
        assert m.accuracy == 1.0

    @given(st.integers(0, 50), st.integers(0, 50), st.integers(0, 50), st.integers(0, 50))
    def test_consistency_properties(self, tp, fp, tn, fn):
        if tp + fp + tn + fn == 0:
            return
        m = seg_metrics(Confusion(tp=tp, fp=fp, tn=tn, fn=fn))
        for value in (m.iou, m.precision, m.recall, m.f1, m.accuracy):
            assert 0.0 <= value <= 1.0
        assert m.accuracy >= tn / (tp + fp + tn + fn) - 1e-12
        assert m.iou <= m.f1 + 1e-12


class TestCalibration:
    def test_direct_counting_example(self):
        scores = np.full((10, 10), 0.85, dtype=np.float32)
        truth = np.zeros((10, 10), dtype=np.uint8)
        truth.reshape(-1)[:80] = 1
        table = calibration_table([score_map(scores)], [mask(truth)])
        bin8 = table.bins[8]
        assert (bin8.lower, bin8.upper) == (0.8, 0.9)
        assert bin8.pixel_count == 100 and bin8.positive_count == 80
        assert bin8.fraction == 0.8

    def test_exact_one_falls_in_last_bin(self):
        table = calibration_table([score_map([[1.0]])], [mask([[1]])])
        assert table.bins[9].pixel_count == 1
        assert table.bins[9].fraction == 1.0

    def test_empty_bin_fraction_undefined(self):
        table = calibration_table([score_map([[0.05]])], [mask([[0]])])
        assert table.bins[5].pixel_count == 0
        assert table.bins[5].fraction is None

    def test_boundary_values_use_half_open_bins(self):
        # exactly representable boundary 0.5 goes to [0.5, 0.6)
        table = calibration_table([score_map([[0.5, 0.25]])], [mask([[1, 0]])])
        assert table.bins[5].pixel_count == 1
        assert table.bins[2].pixel_count == 1

    @given(st.integers(0, 2 ** 32 - 1), st.integers(1, 3))
    @settings(max_examples=20)
    def test_partition_property(self, seed, images):
        rng = np.random.default_rng(seed)
        maps, truths = [], []
        for _ in range(images):
            maps.append(score_map(rng.random((9, 7)).astype(np.float32)))
            truths.append(mask((rng.random((9, 7)) < 0.3).astype(np.uint8)))
        table = calibration_table(maps, truths)
        assert table.total_pixels() == images * 63
        positives = sum(b.positive_count for b in table.bins)
        assert positives == sum(int(t.data.sum()) for t in truths)

    def test_misaligned_lists_rejected(self):
        with pytest.raises(ValidationError):
            calibration_table([score_map([[0.5]])], [])


class TestAuc:
    def test_scores_equal_labels_is_one(self):
        truth = mask([[1, 0, 1, 0]])
        assert auc([score_map([[1.0, 0.0, 1.0, 0.0]])], [truth]) == 1.0

    def test_all_tied_is_half(self):
        truth = mask([[1, 0, 1, 0]])
        assert auc([score_map([[0.5, 0.5, 0.5, 0.5]])], [truth]) == 0.5

    def test_hand_derived_three_quarters(self):
        # pairs: (0.4>0.2)=1, (0.4>0.6)=0, (0.8>0.2)=1, (0.8>0.6)=1 -> 3/4
        m = score_map([[0.2, 0.4, 0.6, 0.8]])
        t = mask([[0, 1, 0, 1]])
        assert auc([m], [t]) == 0.75
        assert allpairs_auc(np.array([0.2, 0.4, 0.6, 0.8]), np.array([0, 1, 0, 1])) == 0.75

    @given(st.integers(0, 2 ** 32 - 1), st.integers(2, 400))
    @settings(max_examples=40)
    def test_matches_allpairs_oracle(self, seed, n):
        rng = np.random.default_rng(seed)
        # quantized scores force plenty of ties
        scores = (rng.integers(0, 16, n) / 16.0).astype(np.float64)
        labels = (rng.random(n) < 0.4).astype(np.uint8)
        if labels.sum() in (0, n):
            labels[0] = 1 - labels[0]
        ours = auc([score_map(scores.reshape(1, -1).astype(np.float32))],
                   [mask(labels.reshape(1, -1))])
        assert abs(ours - allpairs_auc(scores.astype(np.float32), labels)) <= 1e-12

    @given(st.integers(0, 2 ** 32 - 1))
    @settings(max_examples=20)
    def test_invariant_under_monotone_transform(self, seed):
        rng = np.random.default_rng(seed)
        scores = rng.integers(0, 1025, 300) / 1024.0
        labels = (rng.random(300) < 0.3).astype(np.uint8)
        if labels.sum() in (0, 300):
            labels[0] = 1 - labels[0]
        plain = auc([score_map(scores.reshape(10, 30).astype(np.float32))],
                    [mask(labels.reshape(10, 30))])
        cubed = auc([ConfidenceMap((scores ** 3).reshape(10, 30), Method.TTA)],
                    [mask(labels.reshape(10, 30))])
        assert plain == pytest.approx(cubed, abs=1e-12)

    def test_degenerate_scope_errors_name_the_image(self):
        with pytest.raises(ValidationError, match="pooled"):
            auc([score_map([[0.5]])], [mask([[1]])])
        with pytest.raises(ValidationError, match="img7"):
            auc([score_map([[0.5, 0.5]])], [mask([[1, 1]])],
                pooling="per_image_mean", ids=["img7"])

    def test_per_image_mean_is_unweighted(self):
        perfect = (score_map([[1.0, 0.0]]), mask([[1, 0]]))      # AUC 1
        random_ = (score_map([[0.5, 0.5, 0.5, 0.5]]), mask([[1, 0, 1, 0]]))  # AUC .5
        value = auc([perfect[0], random_[0]], [perfect[1], random_[1]],
                    pooling="per_image_mean")
        assert value == 0.75


class TestIouA:
    def test_hand_swept_example(self):
        # t=0.1 -> pred all ones, IoU 2/3; t in {0.2..0.4} -> IoU 1
        result = iou_a([score_map([[0.4, 0.4, 0.1]])], [mask([[1, 1, 0]])])
        assert result.iou_a == 1.0
        assert result.per_image[0].best_threshold == pytest.approx(0.2)

    def test_constant_zero_map(self):
        result = iou_a([score_map([[0.0, 0.0]])], [mask([[1, 0]])])
        assert result.per_image[0].best_iou == 0.0

    def test_single_image_mean(self):
        result = iou_a([score_map([[0.9, 0.1]])], [mask([[1, 0]])])
        assert result.iou_a == result.per_image[0].best_iou == 1.0

    @given(st.integers(0, 2 ** 32 - 1))
    @settings(max_examples=10)
    def test_matches_double_loop_oracle(self, seed):
        rng = np.random.default_rng(seed)
        data = (rng.integers(0, 32, (8, 8)) / 31.0).astype(np.float32)
        truth = (rng.random((8, 8)) < 0.3).astype(np.uint8)
        result = iou_a([score_map(data)], [mask(truth)])
        oracle_t, oracle_iou = iou_sweep_naive(
            data.astype(np.float64), truth, ThresholdGrid().values
        )
        assert result.per_image[0].best_iou == oracle_iou
        assert result.per_image[0].best_threshold == oracle_t

    def test_best_dominates_default(self):
        rng = np.random.default_rng(3)
        data = rng.random((16, 16)).astype(np.float32)
        truth = (rng.random((16, 16)) < 0.2).astype(np.uint8)
        result = iou_a([score_map(data)], [mask(truth)])
        rec = result.per_image[0]
        assert rec.best_iou >= rec.default_iou


class TestGains:
    def test_already_optimal_map_gains_zero(self):
        m = score_map([[0.9, 0.9, 0.1, 0.1]])
        t = mask([[1, 1, 0, 0]])
        bins = iou_gain_by_range([m] * 3, [t] * 3, min_samples=3)
        assert len(bins) == 1
        assert bins[0].mean_gain == 0.0
        assert bins[0].sample_count == 3

    def test_small_buckets_omitted(self):
        m = score_map([[0.9, 0.1]])
        t = mask([[1, 0]])
        assert iou_gain_by_range([m], [t], min_samples=3) == ()
        bins = iou_gain_by_range([m], [t], min_samples=1)
        assert len(bins) == 1

    @given(st.integers(0, 2 ** 32 - 1))
    @settings(max_examples=10)
    def test_gains_nonnegative_when_tau_on_grid(self, seed):
        rng = np.random.default_rng(seed)
        maps = [score_map(rng.random((8, 8)).astype(np.float32)) for _ in range(4)]
        truths = [mask((rng.random((8, 8)) < 0.3).astype(np.uint8)) for _ in range(4)]
        for g in iou_gain_by_range(maps, truths, min_samples=1):
            assert g.mean_gain >= 0.0


class TestRoc:
    def test_endpoints(self):
        curve = roc_curve([score_map([[0.9, 0.2]])], [mask([[1, 0]])])
        assert curve.fpr[0] == 1.0 and curve.tpr[0] == 1.0   # threshold 0
        assert curve.fpr[-1] == 0.0 and curve.tpr[-1] == 0.0  # threshold 1 excludes 0.9


def test_threshold_grid_validation():
    with pytest.raises(ValidationError):
        ThresholdGrid(())
    with pytest.raises(ValidationError):
        ThresholdGrid((0.2, 0.1))
    with pytest.raises(ValidationError):
        ThresholdGrid((0.0, 0.5))
    assert ThresholdGrid().values == tuple(i / 10 for i in range(1, 10))
