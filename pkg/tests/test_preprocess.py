import numpy as np
import pytest

from tsforge.core import (
    DateInterval,
    EmptyInputError,
    InsufficientDataError,
    NoDataError,
    TSFrame,
)
from tsforge.preprocess import (
    AggregatorConfig,
    ImputerConfig,
    OutlierConfig,
    SeriesKind,
    aggregate,
    detect_series_kind,
    impute_knn,
    normalize_monotonic,
    remove_outliers,
)

from conftest import hourly_frame, random_hourly_frame


def minutes(start, offsets, values):
    start = np.datetime64(start, "s")
    ts = start + np.array(offsets) * np.timedelta64(60, "s")
    return TSFrame(ts, np.array(values, dtype=np.float64))


class TestAggregate:
    def test_median_bucketing(self):
        frame = minutes("2014-01-01T00:00", [70, 110, 125], [1.0, 3.0, 5.0])
        out = aggregate(frame)
        assert out.rows() == [
            (np.datetime64("2014-01-01T01:00", "s").item(), 2.0),
            (np.datetime64("2014-01-01T02:00", "s").item(), 5.0),
        ]

    def test_range_completion(self):
        frame = minutes("2014-01-01T00:00", [70, 190], [1.0, 2.0])
        out = aggregate(frame)
        assert [r[1] for r in out.rows()] == [1.0, None, 2.0]

    def test_singleton(self):
        frame = minutes("2014-01-01T00:00", [70], [7.0])
        out = aggregate(frame)
        assert out.rows() == [(np.datetime64("2014-01-01T01:00", "s").item(), 7.0)]

    def test_mean_reducer(self):
        frame = minutes("2014-01-01T00:00", [5, 10], [1.0, 2.0])
        out = aggregate(frame, AggregatorConfig(aggfn=np.mean))
        assert out.values.tolist() == [1.5]

    def test_all_missing_bucket_stays_missing(self):
        frame = hourly_frame([None, 1.0])
        out = aggregate(frame)
        assert out.rows()[0][1] is None

    def test_empty_input(self):
        with pytest.raises(EmptyInputError):
            aggregate(hourly_frame([]))

    def test_output_is_arithmetic_progression(self):
        rng = np.random.default_rng(0)
        for _ in range(500):
            n = int(rng.integers(1, 40))
            start = np.datetime64("2015-06-01T00:00", "s") + np.timedelta64(
                int(rng.integers(0, 100_000)), "s"
            )
            ts = start + np.cumsum(rng.integers(0, 9000, n)).astype("timedelta64[s]")
            frame = TSFrame(ts, rng.normal(size=n))
            interval = DateInterval(
                str(rng.choice(["minute", "hour"])), int(rng.integers(1, 5))
            )
            out = aggregate(frame, AggregatorConfig(interval=interval))
            diffs = np.diff(out.timestamps.astype(np.int64))
            assert (diffs == interval.seconds).all()

    def test_idempotent(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            frame = random_hourly_frame(rng)
            once = aggregate(frame)
            assert aggregate(once) == once


class TestImputeKnn:
    def test_median_of_symmetric_neighbors(self):
        out = impute_knn(hourly_frame([1.0, None, 3.0]))
        assert out.values.tolist() == [1.0, 2.0, 3.0]

    def test_two_passes_fill_leading_block(self):
        first = impute_knn(hourly_frame([None, None, 5.0]), ImputerConfig(max_passes=1))
        assert first.values.tolist()[1:] == [5.0, 5.0] and np.isnan(first.values[0])
        assert "impute_unconverged" in first.meta
        second = impute_knn(hourly_frame([None, None, 5.0]), ImputerConfig(max_passes=2))
        assert second.values.tolist() == [5.0, 5.0, 5.0]
        assert "impute_unconverged" not in second.meta

    def test_complete_series_is_fixpoint(self):
        frame = hourly_frame([1.0, 2.0, 3.0])
        assert impute_knn(frame) == frame

    def test_all_missing_errors(self):
        with pytest.raises(NoDataError):
            impute_knn(hourly_frame([None, None]))

    def test_passes_bound(self):
        # passes needed <= ceil(longest block / k) + 1
        rng = np.random.default_rng(2)
        for _ in range(100):
            frame = random_hourly_frame(rng, missing_fraction=0.5)
            miss = np.isnan(frame.values)
            if not miss.any():
                continue
            longest = max(
                len(run) for run in "".join("m" if m else "p" for m in miss).split("p") if run
            )
            k = int(rng.integers(1, 4))
            budget = int(np.ceil(longest / k)) + 1
            out = impute_knn(frame, ImputerConfig(k=k, max_passes=budget))
            assert not np.isnan(out.values).any()

    def test_aggfn_mean(self):
        out = impute_knn(hourly_frame([1.0, None, 2.0]), ImputerConfig(aggfn=np.mean))
        assert out.values[1] == 1.5


def _cumulative(rng, n=100) -> TSFrame:
    return hourly_frame(np.cumsum(rng.uniform(0.1, 5.0, n)) + 10.0)


def _daily_counts(rng, days=4) -> TSFrame:
    rows = []
    for _ in range(days):
        rows.extend(np.cumsum(rng.integers(0, 20, 24)).astype(float))
    return hourly_frame(rows)


class TestDetectSeriesKind:
    def test_cumulative_is_strictly_monotonic(self):
        frame = _cumulative(np.random.default_rng(3))
        assert detect_series_kind(frame) is SeriesKind.STRICTLY_MONOTONIC

    def test_daily_resetting_counts(self):
        frame = _daily_counts(np.random.default_rng(4))
        assert detect_series_kind(frame) is SeriesKind.DAILY_MONOTONIC

    def test_white_noise_is_plain(self):
        frame = hourly_frame(np.random.default_rng(5).normal(size=200))
        assert detect_series_kind(frame) is SeriesKind.PLAIN

    def test_constant_is_plain(self):
        assert detect_series_kind(hourly_frame([2.0] * 10)) is SeriesKind.PLAIN

    def test_too_short(self):
        with pytest.raises(InsufficientDataError):
            detect_series_kind(hourly_frame([1.0, 2.0]))

    def test_invariant_under_positive_affine(self):
        rng = np.random.default_rng(6)
        frames = [
            _cumulative(rng),
            _daily_counts(rng),
            hourly_frame(rng.normal(size=120)),
        ]
        for frame in frames:
            kind = detect_series_kind(frame)
            for _ in range(5):
                a = float(rng.uniform(0.1, 10.0))
                b = float(rng.uniform(-100, 100))
                scaled = frame.with_values(a * frame.values + b)
                assert detect_series_kind(scaled) is kind


class TestNormalizeMonotonic:
    def test_strictly_monotonic_first_difference(self):
        out = normalize_monotonic(
            hourly_frame([1.0, 3.0, 6.0, 10.0]), SeriesKind.STRICTLY_MONOTONIC
        )
        assert np.isnan(out.values[0])
        assert out.values[1:].tolist() == [2.0, 3.0, 4.0]

    def test_plain_unchanged(self):
        frame = hourly_frame(np.random.default_rng(7).normal(size=50))
        assert normalize_monotonic(frame) == frame

    def test_daily_differences_reset_each_day(self):
        values = [1.0, 2.0, 3.0] * 1  # day one: 3 points
        frame = TSFrame(
            np.array(
                [
                    "2014-01-01T21:00",
                    "2014-01-01T22:00",
                    "2014-01-01T23:00",
                    "2014-01-02T00:00",
                    "2014-01-02T01:00",
                ],
                dtype="datetime64[s]",
            ),
            np.array([1.0, 2.0, 3.0, 1.0, 4.0]),
        )
        out = normalize_monotonic(frame, SeriesKind.DAILY_MONOTONIC)
        expected = [None, 1.0, 1.0, None, 3.0]
        assert [r[1] for r in out.rows()] == expected

    def test_prefix_sum_inverts_differencing(self):
        rng = np.random.default_rng(8)
        for _ in range(100):
            frame = _cumulative(rng, n=int(rng.integers(10, 200)))
            out = normalize_monotonic(frame)
            rebuilt = frame.values[0] + np.cumsum(out.values[1:])
            assert np.abs(rebuilt - frame.values[1:]).max() < 1e-9

    def test_negative_differences_survive(self):
        values = np.cumsum(np.ones(30))
        values[10] -= 5.0  # glitch: one negative step
        out = normalize_monotonic(hourly_frame(values), SeriesKind.STRICTLY_MONOTONIC)
        assert (out.values[1:] < 0).any()


def type7_fences(values, multiplier=1.5):
    """Independent fence oracle: manual linear-interpolated quartiles."""
    v = np.sort(np.asarray(values, dtype=float))
    n = v.size

    def quantile(q):
        h = (n - 1) * q
        lo = int(np.floor(h))
        hi = min(lo + 1, n - 1)
        return v[lo] + (h - lo) * (v[hi] - v[lo])

    q1, q3 = quantile(0.25), quantile(0.75)
    iqr = q3 - q1
    return q1 - multiplier * iqr, q3 + multiplier * iqr


class TestRemoveOutliers:
    def test_spike_is_repaired(self):
        frame = hourly_frame([1.0, 1.0, 1.0, 1.0, 100.0, 1.0, 1.0, 1.0, 1.0])
        out = remove_outliers(frame)
        assert out.values[4] == 1.0
        keep = np.arange(9) != 4
        assert np.array_equal(out.values[keep], frame.values[keep])

    def test_all_equal_unchanged(self):
        frame = hourly_frame([3.0] * 8)
        assert remove_outliers(frame) == frame

    def test_no_outlier_series_unchanged(self):
        # the oracle certifies candidates as outlier-free; certified
        # series must pass through remove_outliers untouched
        rng = np.random.default_rng(9)
        checked = 0
        while checked < 100:
            values = rng.uniform(0, 1, int(rng.integers(8, 60)))
            lo, hi = type7_fences(values)
            if not ((values >= lo) & (values <= hi)).all():
                continue
            checked += 1
            frame = hourly_frame(values)
            assert remove_outliers(frame) == frame

    def test_unflagged_positions_bitwise_unchanged(self):
        rng = np.random.default_rng(10)
        for _ in range(50):
            frame = random_hourly_frame(rng, n=40, missing_fraction=0.1)
            if np.isnan(frame.values).sum() > 36:
                continue
            values = frame.values.copy()
            spikes = rng.choice(40, size=2, replace=False)
            values[spikes] = 1e6
            frame = frame.with_values(values)
            present = ~np.isnan(values)
            if present.sum() < 4:
                continue
            lo, hi = type7_fences(values[present])
            flagged = present & ((values < lo) | (values > hi))
            out = remove_outliers(frame)
            assert np.array_equal(
                out.values[~flagged], values[~flagged], equal_nan=True
            )

    def test_too_few_values(self):
        with pytest.raises(InsufficientDataError):
            remove_outliers(hourly_frame([1.0, 2.0, 3.0]))

    def test_custom_fence_multiplier(self):
        values = [10.0, 11.0, 12.0, 13.0, 14.0, 30.0]
        frame = hourly_frame(values)
        wide = remove_outliers(frame, OutlierConfig(fence_multiplier=10.0))
        assert wide == frame
        tight = remove_outliers(frame, OutlierConfig(fence_multiplier=1.5))
        assert tight.values[5] != 30.0
