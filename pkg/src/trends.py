"""
Trends Module
Sign process of daily price changes, elemental trends (runs) and randomized
waiting-time samples
"""

import logging
import math
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd

from models.models import (
    CensorPolicy, Direction, GeometricModel, PriceSeries, Run, SignSeries, WaitingTimeSample
)
from src.errors import DegenerateWindowError, RangeError, SizeError

logger = logging.getLogger(__name__)

# A window is degenerate when fewer than this share of positions give a complete run
MIN_UNCENSORED_SHARE = 0.01


def signs(prices: PriceSeries) -> SignSeries:
    """UP where S(t+1) > S(t), DOWN otherwise (a zero change counts as DOWN)"""
    if len(prices) < 2:
        raise SizeError(f"signs need at least 2 prices, got {len(prices)}")
    return signs_from_values(prices.as_array())


def signs_from_values(values: np.ndarray) -> SignSeries:
    return SignSeries(up=np.diff(values) > 0)


def runs(sign_series: SignSeries) -> List[Run]:
    """Split the sign series into maximal same-direction runs, in order"""
    up = sign_series.up
    if up.size == 0:
        raise SizeError("runs need a non-empty sign series")
    changes = np.flatnonzero(up[1:] != up[:-1]) + 1
    starts = np.concatenate(([0], changes))
    ends = np.concatenate((changes, [up.size]))
    return [
        Run(direction=Direction.UP if up[s] else Direction.DOWN, start=int(s), duration=int(e - s))
        for s, e in zip(starts, ends)
    ]


def waiting_time_at(sign_series: SignSeries, i: int, direction: Direction) -> int:
    """
    Number of consecutive `direction` signs starting at 1-based position i.

    Returns 0 when position i holds the opposite sign. A run reaching the end of
    the series is counted up to the end; deciding whether to keep it is left to
    the caller.
    """
    if not 1 <= i <= len(sign_series):
        raise RangeError(f"position {i} outside 1..{len(sign_series)}")
    tail = sign_series.matches(direction)[i - 1:]
    breaks = np.flatnonzero(~tail)
    return int(breaks[0]) if breaks.size else int(tail.size)


def waiting_time_table(match: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Waiting time and censor flag for every position of every row.

    Args:
        match: Boolean array (rows x length), True where the sign has the studied direction

    Returns:
        (wait, censored): wait[r, i] counts matching signs from i up to the first
        mismatch; censored[r, i] is True when that run reaches the end of the row
    """
    match = np.atleast_2d(np.asarray(match, dtype=bool))
    length = match.shape[1]
    idx = np.arange(length)
    breaks = np.where(match, length, idx)
    next_break = np.minimum.accumulate(breaks[:, ::-1], axis=1)[:, ::-1]
    wait = next_break - idx
    censored = match & (next_break == length)
    return wait, censored


def draw_waiting_times(
    wait: np.ndarray,
    censored: np.ndarray,
    n_points: int,
    rng: np.random.Generator,
    censor_policy: CensorPolicy = CensorPolicy.DISCARD,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Draw n_points positions per row uniformly with replacement and read their waiting times.

    Under the discard policy a censored draw is replaced by a fresh position until
    every draw is complete; rows where fewer than 1% of positions are uncensored
    cannot be completed and are flagged unusable.

    Returns:
        (durations, usable): durations is rows x n_points; usable is a per-row mask
    """
    rows, length = wait.shape
    row_idx = np.arange(rows)[:, None]
    positions = rng.integers(0, length, size=(rows, n_points))
    durations = wait[row_idx, positions]

    if censor_policy is CensorPolicy.KEEP_TRUNCATED:
        return durations, np.ones(rows, dtype=bool)

    uncensored = length - np.count_nonzero(censored, axis=1)
    usable = (uncensored > 0) & (uncensored >= MIN_UNCENSORED_SHARE * length)
    pending = censored[row_idx, positions] & usable[:, None]
    while pending.any():
        r, c = np.nonzero(pending)
        redraw = rng.integers(0, length, size=r.size)
        durations[r, c] = wait[r, redraw]
        pending[r, c] = censored[r, redraw]
    return durations, usable


def sample_waiting_times(
    sign_series: SignSeries,
    direction: Direction,
    n_points: int,
    rng_seed: int,
    censor_policy: CensorPolicy = CensorPolicy.DISCARD,
) -> WaitingTimeSample:
    """
    Histogram of waiting times at n_points random positions of the sign series.

    Args:
        sign_series: Signs of one window
        direction: Which trends to measure
        n_points: Number of (uncensored) draws
        rng_seed: Seed of the position generator
        censor_policy: discard and redraw runs cut by the series end, or keep them truncated

    Returns:
        WaitingTimeSample with n == n_points
    """
    if len(sign_series) == 0:
        raise SizeError("cannot sample an empty sign series")
    if n_points < 1:
        raise SizeError(f"n_points must be positive, got {n_points}")

    wait, censored = waiting_time_table(sign_series.matches(direction)[None, :])
    rng = np.random.default_rng(rng_seed)
    durations, usable = draw_waiting_times(wait, censored, n_points, rng, censor_policy)
    if not usable[0]:
        raise DegenerateWindowError(
            f"fewer than {MIN_UNCENSORED_SHARE:.0%} of {len(sign_series)} positions give a complete {direction.value} run"
        )
    return WaitingTimeSample.from_durations(direction, durations[0])


def histogram_frame(sample: WaitingTimeSample, model: Optional[GeometricModel] = None) -> pd.DataFrame:
    """
    Histogram table with columns k,count,frequency for k = 0..max observed.

    When a model is given a `fitted` column carries its pmf for overlay plots.
    """
    k_max = max(sample.counts)
    ks = np.arange(k_max + 1)
    counts = np.array([sample.counts.get(int(k), 0) for k in ks])
    normalized = sample.normalized
    frequency = np.array([normalized.get(int(k), 0.0) for k in ks])
    frame = pd.DataFrame({"k": ks, "count": counts, "frequency": frequency})
    if model is not None:
        frame["fitted"] = (1.0 - model.theta) * model.theta ** ks
    return frame


def bernoulli_band(window_length: int, z: float = 3.0) -> float:
    """Half-width z * sqrt(0.25 / (L - 1)) of the up-ratio band for a window of L prices"""
    return z * math.sqrt(0.25 / (window_length - 1))
