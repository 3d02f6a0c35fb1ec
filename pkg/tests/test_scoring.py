import itertools
import math

import numpy as np
import pytest

from digit_forensics import (
    DigitHistogram,
    InsufficientData,
    NoUsableOutcomes,
    OperatorKind,
    TestOutcome,
    UncalibratedReference,
    UnknownOperator,
    aggregate,
    benford_pmf,
    flag,
    ks_discrete,
    ks_p_value,
    normalize_score,
    score_groups,
    score_operator,
)
from digit_forensics.reference import ReferenceDistribution

# Dyadic probabilities are exact binary floats, so cumulative sums carry
# no rounding and distance/probability assertions can be exact.
DYADIC_COUNTS = [128, 64, 32, 16, 8, 4, 2, 1, 1]
DYADIC_PMF = [c / 256 for c in DYADIC_COUNTS]


def make_ref(floor=0.8, pmf=None, observed_len=10):
    return ReferenceDistribution(
        operator=OperatorKind.MEAN, entries_per_vector=1,
        pmf=tuple(pmf if pmf is not None else benford_pmf()),
        calibration_floor=floor, observed_len=observed_len,
        mc_draws=1_000, calibration_samples=10, seed=0)


class TestKsDiscrete:
    def test_matching_distribution_scores_zero(self):
        hist = DigitHistogram(DYADIC_COUNTS)
        assert ks_discrete(hist, DYADIC_PMF) == 0.0

    def test_all_digit_one_vs_base_law(self):
        hist = DigitHistogram([25, 0, 0, 0, 0, 0, 0, 0, 0])
        assert ks_discrete(hist, benford_pmf()) == 1.0 - np.log10(2.0)

    def test_uniform_vs_base_law(self):
        hist = DigitHistogram([1] * 9)
        assert ks_discrete(hist, benford_pmf()) == pytest.approx(
            0.2687266579946291, abs=1e-15)

    def test_symmetry_between_exact_distributions(self):
        q_counts = [8, 8, 4, 4, 2, 2, 1, 1, 2]
        q_pmf = [c / 32 for c in q_counts]
        forward = ks_discrete(DigitHistogram(DYADIC_COUNTS), q_pmf)
        backward = ks_discrete(DigitHistogram(q_counts), DYADIC_PMF)
        assert forward == backward

    def test_rejects_empty_histogram(self):
        from digit_forensics import EmptyHistogram
        with pytest.raises(EmptyHistogram):
            ks_discrete(DigitHistogram([0] * 9), benford_pmf())


class TestKsPValue:
    def test_zero_distance_gives_p_one(self):
        hist = DigitHistogram(DYADIC_COUNTS)
        result = ks_p_value(hist, DYADIC_PMF, resamples=500, rng=1)
        assert result.statistic == 0.0
        assert result.p_value == 1.0

    def test_extreme_sample_is_significant(self):
        hist = DigitHistogram([0] * 8 + [30])
        result = ks_p_value(hist, benford_pmf(), resamples=2_000, rng=3)
        assert result.p_value < 0.01

    def test_p_on_the_add_one_grid(self):
        hist = DigitHistogram([3, 1, 1, 0, 0, 0, 0, 0, 0])
        result = ks_p_value(hist, benford_pmf(), resamples=400, rng=9)
        assert 0.0 < result.p_value <= 1.0
        steps = result.p_value * 401
        assert steps == pytest.approx(round(steps), abs=1e-9)

    def test_deterministic_under_fixed_rng(self):
        hist = DigitHistogram([4, 3, 2, 1, 0, 0, 0, 0, 0])
        a = ks_p_value(hist, benford_pmf(), resamples=300, rng=7)
        b = ks_p_value(hist, benford_pmf(), resamples=300,
                       rng=np.random.default_rng(7))
        assert a == b

    def test_p_non_increasing_as_distance_grows(self):
        base = np.array([15, 9, 6, 5, 4, 4, 3, 2, 2])
        prev_d, prev_p = -1.0, 2.0
        for shift in (0, 5, 10, 15):
            counts = base.copy()
            counts[0] -= shift
            counts[8] += shift
            hist = DigitHistogram(counts)
            d = ks_discrete(hist, benford_pmf())
            result = ks_p_value(hist, benford_pmf(), resamples=4_000,
                                rng=np.random.default_rng(7))
            assert d > prev_d
            assert result.p_value <= prev_p
            prev_d, prev_p = d, result.p_value

    def test_rejects_bad_resamples(self):
        with pytest.raises(ValueError):
            ks_p_value(DigitHistogram([1] * 9), benford_pmf(), resamples=0)

    def test_matches_exhaustive_enumeration_on_tiny_totals(self):
        # For 3 observations the full outcome space is enumerable, giving
        # an exact tail probability to hold the Monte-Carlo one against.
        pmf = np.asarray(benford_pmf())
        total = 3
        compositions = [c for c in itertools.product(range(total + 1), repeat=9)
                        if sum(c) == total]
        exact_prob = np.array([
            math.factorial(total)
            / math.prod(math.factorial(k) for k in counts)
            * math.prod(p ** k for p, k in zip(pmf, counts))
            for counts in compositions])
        assert exact_prob.sum() == pytest.approx(1.0, abs=1e-12)
        distances = np.array([
            ks_discrete(DigitHistogram(counts), pmf) for counts in compositions])
        for i in (0, 44, 80, 127, len(compositions) - 1):
            exact_tail = float(exact_prob[distances >= distances[i]].sum())
            mc = ks_p_value(DigitHistogram(compositions[i]), pmf,
                            resamples=5_000, rng=np.random.default_rng(100 + i))
            assert mc.p_value == pytest.approx(exact_tail, abs=0.03)


class TestNormalizeScore:
    def test_midpoint_example(self):
        assert normalize_score(0.9, 0.8) == pytest.approx(0.5, rel=1e-12)

    def test_raw_at_floor_is_exactly_zero(self):
        assert normalize_score(0.8, 0.8) == 0.0

    def test_raw_below_floor_clips_to_zero(self):
        assert normalize_score(0.7, 0.8) == 0.0

    def test_raw_one_maps_to_one(self):
        assert normalize_score(1.0, 0.8) == 1.0

    def test_zero_floor_is_identity(self):
        assert normalize_score(0.37, 0.0) == 0.37

    @pytest.mark.parametrize("floor", [-0.1, 1.0, 1.5])
    def test_rejects_floor_outside_unit_interval(self, floor):
        with pytest.raises(ValueError):
            normalize_score(0.5, floor)


class TestScoreOperator:
    def test_rejects_uncalibrated_reference(self):
        ref = make_ref(floor=None)
        with pytest.raises(UncalibratedReference):
            score_operator([1.0] * 9, OperatorKind.MEAN, ref)

    def test_insufficient_data_reports_counts(self):
        ref = make_ref()
        outcome = score_operator([1.0, 2.0, 0.0, float("nan")],
                                 OperatorKind.MEAN, ref, min_samples=5)
        assert isinstance(outcome, InsufficientData)
        assert outcome.usable == 2
        assert outcome.required == 5
        assert outcome.skipped == 2

    def test_outcome_fields(self):
        ref = make_ref(floor=0.5)
        values = [1.2, 2.3, 3.4, 4.5, 9.6, 1.7, 0.0]
        outcome = score_operator(values, OperatorKind.MEAN, ref,
                                 resamples=500, rng=11)
        assert isinstance(outcome, TestOutcome)
        assert outcome.operator is OperatorKind.MEAN
        assert outcome.sample_count == 6
        assert outcome.skipped == 1
        assert outcome.reference_key == ref.key
        assert 0.0 <= outcome.raw_score < 1.0
        assert outcome.normalized_score == normalize_score(outcome.raw_score, 0.5)

    def test_deterministic(self):
        ref = make_ref()
        values = [1.2, 2.3, 3.4, 4.5, 9.6, 1.7]
        a = score_operator(values, OperatorKind.MEAN, ref, resamples=500, rng=11)
        b = score_operator(values, OperatorKind.MEAN, ref, resamples=500, rng=11)
        assert a == b


class TestAggregate:
    def outcome(self, normalized, op=OperatorKind.MEAN):
        return TestOutcome(operator=op, raw_score=normalized,
                           normalized_score=normalized, sample_count=9,
                           skipped=0, reference_key=("mean", 1, 10))

    def test_mean_of_normalized_scores(self):
        result = aggregate([self.outcome(0.2), self.outcome(0.4),
                            self.outcome(0.6)])
        assert result.overall == pytest.approx(0.4, abs=1e-12)

    def test_single_outcome(self):
        assert aggregate([self.outcome(0.3)]).overall == pytest.approx(0.3)

    def test_insufficient_entries_excluded_but_listed(self):
        thin = InsufficientData(OperatorKind.STD, usable=2, required=5)
        result = aggregate([self.outcome(0.5), thin])
        assert result.overall == pytest.approx(0.5)
        assert result.insufficient == (thin,)
        assert len(result.per_operator) == 1

    def test_all_insufficient_raises_with_detail(self):
        thin = InsufficientData(OperatorKind.STD, usable=2, required=5)
        with pytest.raises(NoUsableOutcomes, match="std.*2 usable of 5"):
            aggregate([thin])

    def test_empty_raises(self):
        with pytest.raises(NoUsableOutcomes, match="no statistic groups"):
            aggregate([])


class TestFlag:
    def test_reaching_the_level_flags(self):
        assert flag(0.97, 0.96) is True
        assert flag(0.96, 0.96) is True

    def test_below_the_level_does_not(self):
        assert flag(0.95, 0.96) is False


class TestScoreGroups:
    def test_string_and_enum_keys_equivalent(self, small_store):
        values = [1.2, 2.3, 3.4, 4.5, 9.6, 1.7, 5.1, 7.3]
        by_enum = score_groups({OperatorKind.MEAN: values}, 10, small_store,
                               seed=5, resamples=2_000)
        by_name = score_groups({"mean": values}, 10, small_store,
                               seed=5, resamples=2_000)
        assert by_enum == by_name

    def test_unknown_group_name_rejected(self, small_store):
        with pytest.raises(UnknownOperator, match="median"):
            score_groups({"median": [1.0] * 9}, 10, small_store, seed=5)

    def test_thin_groups_listed_without_store_access(self, small_store):
        values = [1.2, 2.3, 3.4, 4.5, 9.6, 1.7, 5.1, 7.3]
        result = score_groups({"mean": values, "std": [1.0, 2.0]}, 10,
                              small_store, seed=5, resamples=2_000)
        assert [m.operator for m in result.insufficient] == [OperatorKind.STD]
        assert [t.operator for t in result.per_operator] == [OperatorKind.MEAN]

    def test_deterministic(self, small_store):
        groups = {"mean": [1.2, 2.3, 3.4, 4.5, 9.6, 1.7],
                  "std": [1.1, 2.9, 3.8, 4.7, 8.6, 6.5]}
        a = score_groups(groups, 10, small_store, seed=5, resamples=2_000)
        b = score_groups(groups, 10, small_store, seed=5, resamples=2_000)
        assert a == b
        assert 0.0 <= a.overall <= 1.0
