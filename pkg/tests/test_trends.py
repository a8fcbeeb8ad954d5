import numpy as np
import pytest

from models.models import CensorPolicy, Direction, GeometricModel, SignSeries
from src.errors import DegenerateWindowError, RangeError, SizeError
from src.trends import (
    bernoulli_band, histogram_frame, runs, sample_waiting_times, signs, waiting_time_at, waiting_time_table
)

WORKED_EXAMPLE = "--+++++-"


def brute_force_wait(match, i):
    k = 0
    while i + k < len(match) and match[i + k]:
        k += 1
    return k, i + k == len(match) and k > 0


class TestSigns:
    def test_zero_change_counts_as_down(self, make_prices):
        assert signs(make_prices([1, 1, 2, 1])).to_string() == "-+-"

    def test_needs_two_prices(self, make_prices):
        with pytest.raises(SizeError):
            signs(make_prices([1]))

    def test_sign_string_uses_direction_symbols(self):
        series = SignSeries.from_string(WORKED_EXAMPLE)
        assert series.to_string() == WORKED_EXAMPLE
        assert series.to_string()[2] == Direction.UP.symbol
        assert series.to_string()[0] == Direction.DOWN.symbol
        with pytest.raises(ValueError):
            SignSeries.from_string("+0-")

    def test_counts(self, make_prices):
        series = signs(make_prices([1, 2, 3, 2]))
        assert (series.n_up, series.n_down) == (2, 1)


class TestRuns:
    def test_worked_example(self):
        found = runs(SignSeries.from_string(WORKED_EXAMPLE))
        assert [(r.direction, r.duration) for r in found] == [
            (Direction.DOWN, 2), (Direction.UP, 5), (Direction.DOWN, 1)
        ]
        assert [r.start for r in found] == [0, 2, 7]

    def test_durations_cover_series(self):
        series = SignSeries(up=np.random.default_rng(1).random(500) < 0.5)
        found = runs(series)
        assert sum(r.duration for r in found) == 500
        assert all(a.direction != b.direction for a, b in zip(found, found[1:]))

    def test_empty(self):
        with pytest.raises(SizeError):
            runs(SignSeries(up=[]))


class TestWaitingTimeAt:
    def test_worked_example(self):
        assert waiting_time_at(SignSeries.from_string(WORKED_EXAMPLE), 4, Direction.UP) == 4

    def test_opposite_sign_gives_zero(self):
        assert waiting_time_at(SignSeries.from_string(WORKED_EXAMPLE), 1, Direction.UP) == 0

    def test_down_direction(self):
        assert waiting_time_at(SignSeries.from_string(WORKED_EXAMPLE), 1, Direction.DOWN) == 2

    @pytest.mark.parametrize("position", [0, 9])
    def test_out_of_range(self, position):
        with pytest.raises(RangeError):
            waiting_time_at(SignSeries.from_string(WORKED_EXAMPLE), position, Direction.UP)


class TestWaitingTimeTable:
    def test_matches_brute_force(self):
        match = np.random.default_rng(7).random((5, 200)) < 0.6
        wait, censored = waiting_time_table(match)
        for r in range(5):
            for i in range(200):
                k, cut = brute_force_wait(match[r], i)
                assert wait[r, i] == k
                assert censored[r, i] == cut

    def test_agrees_with_waiting_time_at(self):
        series = SignSeries.from_string(WORKED_EXAMPLE)
        wait, _ = waiting_time_table(series.matches(Direction.UP)[None, :])
        expected = [waiting_time_at(series, i, Direction.UP) for i in range(1, 9)]
        assert wait[0].tolist() == expected


class TestSampleWaitingTimes:
    def test_all_down_gives_zero_waits(self):
        series = SignSeries(up=np.zeros(100, dtype=bool))
        sample = sample_waiting_times(series, Direction.UP, 10, rng_seed=1)
        assert sample.counts == {0: 10}

    def test_sample_size_and_determinism(self):
        series = SignSeries(up=np.random.default_rng(5).random(999) < 0.5)
        first = sample_waiting_times(series, Direction.UP, 500, rng_seed=42)
        second = sample_waiting_times(series, Direction.UP, 500, rng_seed=42)
        assert first.n == 500
        assert first == second

    def test_discard_policy_never_returns_censored_runs(self):
        # the final run of 40 UP signs is cut by the series end
        up = np.concatenate([np.random.default_rng(9).random(960) < 0.5, [False], np.ones(39, dtype=bool)])
        series = SignSeries(up=up)
        sample = sample_waiting_times(series, Direction.UP, 2000, rng_seed=3)
        longest_complete = max(r.duration for r in runs(series)[:-1] if r.direction is Direction.UP)
        assert max(sample.counts) <= longest_complete

    def test_keep_truncated_policy(self):
        series = SignSeries(up=np.ones(200, dtype=bool))
        sample = sample_waiting_times(series, Direction.UP, 100, rng_seed=3, censor_policy=CensorPolicy.KEEP_TRUNCATED)
        assert sample.n == 100
        assert min(sample.counts) >= 1

    def test_everything_censored_is_degenerate(self):
        series = SignSeries(up=np.ones(200, dtype=bool))
        with pytest.raises(DegenerateWindowError):
            sample_waiting_times(series, Direction.UP, 100, rng_seed=3)

    def test_waits_follow_geometric_law_under_null(self):
        series = SignSeries(up=np.random.default_rng(11).random(100_000) < 0.5)
        sample = sample_waiting_times(series, Direction.UP, 20_000, rng_seed=12)
        zero_share = sample.counts[0] / sample.n
        assert zero_share == pytest.approx(0.5, abs=4 * np.sqrt(0.25 / sample.n) + 0.01)

    @pytest.mark.parametrize("p", [0.4, 0.5, 0.6])
    def test_total_variation_to_geometric_law(self, p):
        series = SignSeries(up=np.random.default_rng(21).random(200_000) < p)
        sample = sample_waiting_times(series, Direction.UP, 100_000, rng_seed=22)
        ks = np.arange(max(sample.counts) + 1)
        model = (1 - p) * p ** ks
        empirical = np.array([sample.normalized.get(int(k), 0.0) for k in ks])
        tv = 0.5 * (np.abs(empirical - model).sum() + p ** ks.size)
        assert tv < 0.02

    @pytest.mark.parametrize("seed", range(5))
    def test_normalized_histogram_sums_to_one(self, seed):
        series = SignSeries(up=np.random.default_rng(seed).random(1000) < 0.5)
        sample = sample_waiting_times(series, Direction.DOWN, 777, rng_seed=seed)
        assert abs(sum(sample.normalized.values()) - 1.0) < 1e-12
        assert all(sample.normalized[k] == c / 777 for k, c in sample.counts.items())
        assert list(sample.normalized) == sorted(sample.counts)


class TestExports:
    def test_histogram_frame(self):
        series = SignSeries.from_string(WORKED_EXAMPLE)
        sample = sample_waiting_times(series, Direction.UP, 50, rng_seed=4)
        frame = histogram_frame(sample, GeometricModel(theta=0.5))
        assert list(frame.columns) == ["k", "count", "frequency", "fitted"]
        assert frame["k"].tolist() == list(range(max(sample.counts) + 1))
        assert frame["count"].sum() == 50
        assert frame["frequency"].sum() == pytest.approx(1.0)
        assert frame["fitted"].iloc[0] == pytest.approx(0.5)

    def test_histogram_frame_without_model(self):
        sample = sample_waiting_times(SignSeries.from_string(WORKED_EXAMPLE), Direction.UP, 20, rng_seed=4)
        assert list(histogram_frame(sample).columns) == ["k", "count", "frequency"]

    def test_bernoulli_band(self):
        assert bernoulli_band(1000) == pytest.approx(0.0474579, abs=1e-6)
        assert bernoulli_band(1000, z=0.0) == 0.0
