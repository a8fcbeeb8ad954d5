"""
Goodness of Fit Module
Discrete Anderson-Darling statistic against the geometric null and its
Monte Carlo (parametric bootstrap) pi-values
"""

import logging
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from models.models import (
    AdTestResult, CellPartition, Direction, GeometricModel, McConfig, WaitingTimeSample
)
from src import geom
from src.errors import (
    CalibrationError, DegenerateParameterError, DegenerateWindowError, PartitionError, SizeError
)
from src.trends import draw_waiting_times, waiting_time_table
from src.utils import derive_seed

logger = logging.getLogger(__name__)

MIN_SAMPLE_SIZE = 30
MIN_SIGNS = 100
MAX_DEGENERATE_SHARE = 0.05
# cap on row x column elements of one simulated block
MAX_BLOCK_ELEMENTS = 5_000_000
RESULT_COLUMNS = ["window_start", "direction", "n", "theta_hat", "a2", "pi_value", "m_replicates", "seed"]


def _tail_index(theta: np.ndarray, n: int, min_expected: float) -> np.ndarray:
    """Largest K with n * theta**K >= min_expected (-1 when even K = 0 fails)"""
    theta = np.asarray(theta, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        k = np.floor(np.log(min_expected / n) / np.log(theta))
    k = np.where(np.isfinite(k), k, -1).astype(np.int64)
    k = np.maximum(k, -1)
    # one correction step either way absorbs rounding in the logarithms
    k = np.where(n * theta ** (k + 1) >= min_expected, k + 1, k)
    k = np.where((k >= 0) & (n * theta ** np.maximum(k, 0) < min_expected), k - 1, k)
    return k


def build_cells(model: GeometricModel, n: int, min_expected: float = 5.0) -> CellPartition:
    """
    Singleton cells {0}, ..., {K-1} and the tail cell {>=K}.

    K is the largest value whose tail expectation n * theta**K still reaches
    min_expected. At least three cells are required.

    Raises:
        SizeError: n < 30
        DegenerateWindowError: fewer than three cells can be formed
    """
    if n < MIN_SAMPLE_SIZE:
        raise SizeError(f"at least {MIN_SAMPLE_SIZE} observations are needed, got {n}")
    k_tail = int(_tail_index(np.array([model.theta]), n, min_expected)[0])
    if k_tail < 2:
        raise DegenerateWindowError(
            f"theta={model.theta:.6g}, n={n}: the tail cell cannot reach {min_expected} expected counts with 3 cells"
        )
    ks = np.arange(k_tail)
    probs = np.append(geom.pmf(model, ks), geom.survival(model, k_tail))
    return CellPartition(
        theta=model.theta,
        n=n,
        boundaries=list(range(k_tail + 1)),
        null_probs=probs.tolist(),
    )


def _ad_from_counts(counts: np.ndarray, probs: np.ndarray, k_tail: np.ndarray, n: int) -> np.ndarray:
    """
    A^2 = (1/n) * sum_{j<m} Z_j^2 p_j / (H_j (1 - H_j)) for each row.

    counts and probs are rows x width with the tail cell of row r at column
    k_tail[r]; columns past the tail are zero padding.
    """
    cells = np.arange(counts.shape[1])
    inner = cells < k_tail[:, None]
    observed = np.cumsum(counts, axis=1)
    expected = np.cumsum(probs, axis=1)
    z = observed - n * expected
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(inner, z ** 2 * probs / (expected * (1.0 - expected)), 0.0)
    return terms.sum(axis=1) / n


def ad_statistic(sample: WaitingTimeSample, cells: CellPartition) -> float:
    """Discrete Anderson-Darling statistic of a waiting-time sample over a cell partition"""
    ks = np.fromiter(sample.counts.keys(), dtype=np.int64)
    if ks.size and ks.min() < 0:
        raise PartitionError(f"negative duration {int(ks.min())} lies outside the cells")
    counts = np.zeros(cells.n_cells)
    for k, c in sample.counts.items():
        counts[min(k, cells.k_tail)] += c
    probs = np.asarray(cells.null_probs, dtype=float)
    a2 = _ad_from_counts(counts[None, :], probs[None, :], np.array([cells.k_tail]), sample.n)
    return float(a2[0])


def ad_statistics_batch(
    durations: np.ndarray, theta: np.ndarray, min_expected: float
) -> Tuple[np.ndarray, np.ndarray]:
    """
    A^2 for many samples at once, each binned with the cells build_cells would
    give for its own theta.

    Args:
        durations: rows x n waiting times
        theta: per-row continuation probability in (0, 1)
        min_expected: tail cell expectation threshold

    Returns:
        (a2, valid): statistics (NaN where fewer than three cells exist) and the validity mask
    """
    rows, n = durations.shape
    theta = np.asarray(theta, dtype=float)
    k_tail = _tail_index(theta, n, min_expected)
    valid = k_tail >= 2
    k_tail = np.where(valid, k_tail, 2)
    width = int(k_tail.max()) + 1

    binned = np.minimum(durations, k_tail[:, None])
    flat = (np.arange(rows)[:, None] * width + binned).ravel()
    counts = np.bincount(flat, minlength=rows * width).reshape(rows, width).astype(float)

    cells = np.arange(width)
    th = theta[:, None]
    kt = k_tail[:, None]
    probs = np.where(cells < kt, (1.0 - th) * th ** cells, 0.0)
    probs = np.where(cells == kt, th ** kt, probs)

    a2 = _ad_from_counts(counts, probs, k_tail, n)
    return np.where(valid, a2, np.nan), valid


def _block_size(replicate_block: int, row_width: int) -> int:
    """Replicates per block: replicate_block, fewer when rows are wide"""
    return max(1, min(replicate_block, MAX_BLOCK_ELEMENTS // max(row_width, 1)))


def _blocks(total: int, block: int) -> Iterator[Tuple[int, int]]:
    for index, start in enumerate(range(0, total, block)):
        yield index, min(block, total - start)


def _pi_value(null_a2: np.ndarray, observed_a2: float) -> float:
    return (1 + int(np.count_nonzero(null_a2 >= observed_a2))) / (null_a2.size + 1)


def _check_degeneracy(valid: int, total: int) -> None:
    degenerate = total - valid
    logger.debug("%d of %d bootstrap replicates degenerate", degenerate, total)
    if degenerate > MAX_DEGENERATE_SHARE * total:
        raise CalibrationError(
            f"{degenerate} of {total} bootstrap replicates were degenerate (limit {MAX_DEGENERATE_SHARE:.0%})"
        )


def mc_pi_value(
    signs_len: int,
    theta_hat: float,
    direction: Direction,
    observed_a2: float,
    cfg: McConfig,
    seed: Optional[int] = None,
) -> AdTestResult:
    """
    Bootstrap pi-value that replays the whole window pipeline under the null.

    Each replicate simulates signs_len Bernoulli signs whose chance of going in
    `direction` is theta_hat, re-estimates theta from them, draws cfg.n_points
    waiting times with the same censor policy, bins them and computes A^2.
    Replicates are simulated in blocks of at most cfg.replicate_block, fewer
    for long sign series; block b uses a generator seeded with derive_seed(seed, b).

    Returns:
        AdTestResult with pi = (1 + #{A2* >= A2}) / (M' + 1), M' the non-degenerate replicates
    """
    if signs_len < MIN_SIGNS:
        raise SizeError(f"calibration needs at least {MIN_SIGNS} signs, got {signs_len}")
    if not 0.0 < theta_hat < 1.0:
        raise DegenerateParameterError(f"theta_hat must lie in (0, 1), got {theta_hat}")
    seed = cfg.master_seed if seed is None else seed

    null_parts: List[np.ndarray] = []
    block_size = _block_size(cfg.replicate_block, max(signs_len, cfg.n_points))
    for block, size in _blocks(cfg.m_replicates, block_size):
        rng = np.random.default_rng(derive_seed(seed, block))
        match = rng.random((size, signs_len)) < theta_hat
        theta_star = geom.continuation_ratio(np.count_nonzero(match, axis=1), signs_len)
        estimable = (theta_star > 0.0) & (theta_star < 1.0)

        wait, censored = waiting_time_table(match)
        durations, usable = draw_waiting_times(wait, censored, cfg.n_points, rng, cfg.censor_policy)
        a2, binnable = ad_statistics_batch(durations, np.where(estimable, theta_star, 0.5), cfg.min_expected)
        null_parts.append(a2[estimable & usable & binnable])

    null_a2 = np.concatenate(null_parts)
    _check_degeneracy(null_a2.size, cfg.m_replicates)
    return AdTestResult(
        direction=direction,
        a2=observed_a2,
        pi_value=_pi_value(null_a2, observed_a2),
        n=cfg.n_points,
        theta_hat=theta_hat,
        m_replicates=int(null_a2.size),
        seed=seed,
    )


def mc_pi_value_iid(
    model: GeometricModel,
    n: int,
    observed_a2: float,
    cfg: McConfig,
    seed: Optional[int] = None,
    direction: Direction = Direction.UP,
) -> AdTestResult:
    """
    Bootstrap pi-value for a standalone sample of n durations with a known theta:
    replicates are i.i.d. geometric samples binned into the same cells.
    """
    build_cells(model, n, cfg.min_expected)
    seed = cfg.master_seed if seed is None else seed

    null_parts: List[np.ndarray] = []
    for block, size in _blocks(cfg.m_replicates, _block_size(cfg.replicate_block, n)):
        draws = geom.sample(model, size * n, derive_seed(seed, block)).reshape(size, n)
        a2, _ = ad_statistics_batch(draws, np.full(size, model.theta), cfg.min_expected)
        null_parts.append(a2)

    null_a2 = np.concatenate(null_parts)
    return AdTestResult(
        direction=direction,
        a2=observed_a2,
        pi_value=_pi_value(null_a2, observed_a2),
        n=n,
        theta_hat=model.theta,
        m_replicates=int(null_a2.size),
        seed=seed,
    )


def results_frame(results: Sequence[Tuple[str, AdTestResult]]) -> pd.DataFrame:
    """Result export: one row per (window start, direction)"""
    rows = [
        {
            "window_start": start,
            "direction": result.direction.value,
            "n": result.n,
            "theta_hat": result.theta_hat,
            "a2": result.a2,
            "pi_value": result.pi_value,
            "m_replicates": result.m_replicates,
            "seed": str(result.seed),
        }
        for start, result in results
    ]
    return pd.DataFrame(rows, columns=RESULT_COLUMNS)
