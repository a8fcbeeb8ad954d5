"""
Window Module
Sliding-window orchestration: per-window sampling, fitting and testing, the
up-ratio series and the pi-value series against time
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from datetime import date
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from models.models import Direction, GeometricModel, McConfig, PriceSeries, WindowReport, WindowSpec
from src.data_access import get_data_access
from src.errors import DegeneracyError, SizeError
from src.geom import estimate_theta_from_signs
from src.gof import MIN_SIGNS, ad_statistic, build_cells, mc_pi_value, results_frame
from src.trends import histogram_frame, sample_waiting_times, signs_from_values
from src.utils import derive_seed

logger = logging.getLogger(__name__)

REPORT_COLUMNS = ["start_date", "up_ratio", "up_a2", "up_pi", "down_a2", "down_pi", "skipped"]

# third key of a window seed path
_SAMPLING_STREAM = 0
_CALIBRATION_STREAM = 1


def enumerate_windows(series_len: int, spec: WindowSpec) -> range:
    """Start ordinals 0, step, 2*step, ...; len() gives floor((N - L) / step) + 1"""
    if series_len < spec.length:
        raise SizeError(f"series of {series_len} prices is shorter than the {spec.length}-day window")
    return range(0, series_len - spec.length + 1, spec.step)


def up_ratio_series(prices: PriceSeries, spec: WindowSpec) -> List[Tuple[date, float]]:
    """Share of UP changes among the L - 1 changes of each window, labelled by its first day"""
    starts = np.asarray(enumerate_windows(len(prices), spec))
    ups = np.diff(prices.as_array()) > 0
    cumulative = np.concatenate(([0], np.cumsum(ups)))
    changes = spec.length - 1
    ratios = (cumulative[starts + changes] - cumulative[starts]) / changes
    return [(prices.dates[s], float(r)) for s, r in zip(starts, ratios)]


def _check_testable(spec: WindowSpec) -> None:
    if spec.length - 1 < MIN_SIGNS:
        raise SizeError(f"testing needs at least {MIN_SIGNS} changes per window, a {spec.length}-day window has {spec.length - 1}")


def _analyze_slice(values: np.ndarray, start: int, start_date: date, cfg: McConfig) -> WindowReport:
    """Test one window's prices in both directions; degeneracy becomes a skip marker"""
    sign_series = signs_from_values(values)
    results = {}
    histograms = {}
    try:
        for direction in Direction:
            model = estimate_theta_from_signs(sign_series, direction)
            sample = sample_waiting_times(
                sign_series,
                direction,
                cfg.n_points,
                derive_seed(cfg.master_seed, start, direction.code, _SAMPLING_STREAM),
                cfg.censor_policy,
            )
            cells = build_cells(model, sample.n, cfg.min_expected)
            results[direction] = mc_pi_value(
                len(sign_series),
                model.theta,
                direction,
                ad_statistic(sample, cells),
                cfg,
                seed=derive_seed(cfg.master_seed, start, direction.code, _CALIBRATION_STREAM),
            )
            histograms[direction] = sample
    except DegeneracyError as e:
        logger.debug("Window %d (%s) skipped: %s", start, start_date, e)
        return WindowReport(start_ordinal=start, start_date=start_date, skipped=True, skip_reason=str(e))

    return WindowReport(
        start_ordinal=start,
        start_date=start_date,
        up_ratio=results[Direction.UP].theta_hat,
        up_result=results[Direction.UP],
        down_result=results[Direction.DOWN],
        up_histogram=histograms[Direction.UP],
        down_histogram=histograms[Direction.DOWN],
    )


def analyze_window(prices: PriceSeries, start: int, spec: WindowSpec, cfg: McConfig) -> WindowReport:
    """
    Signs, waiting-time histograms, parameter estimates, A^2 and pi-values for
    the window of spec.length prices starting at trading day `start`.

    Seeds derive from (cfg.master_seed, start, direction), so a window's result
    does not depend on which other windows are analyzed.
    """
    _check_testable(spec)
    if start < 0 or start + spec.length > len(prices):
        raise SizeError(f"window [{start}, {start + spec.length}) does not fit a series of {len(prices)} prices")
    values = prices.as_array()[start:start + spec.length]
    return _analyze_slice(values, start, prices.dates[start], cfg)


class _SeriesTask:
    """Analyzes windows of one immutable series; shipped once to each worker"""

    def __init__(self, values: np.ndarray, dates: Sequence[date], spec: WindowSpec, cfg: McConfig):
        self.values = values
        self.dates = dates
        self.spec = spec
        self.cfg = cfg

    def __call__(self, start: int) -> WindowReport:
        window = self.values[start:start + self.spec.length]
        return _analyze_slice(window, start, self.dates[start], self.cfg)


_worker_task: Optional[_SeriesTask] = None


def _init_worker(task: _SeriesTask) -> None:
    global _worker_task
    _worker_task = task


def _run_worker(start: int) -> WindowReport:
    return _worker_task(start)


def analyze_series(
    prices: PriceSeries, spec: WindowSpec, cfg: McConfig, threads: int = 1
) -> List[WindowReport]:
    """
    analyze_window over every window start, in window order.

    With threads > 1 windows run in a process pool; every window seeds itself,
    so the output is identical for any degree of parallelism.
    """
    _check_testable(spec)
    starts = enumerate_windows(len(prices), spec)
    task = _SeriesTask(prices.as_array(), list(prices.dates), spec, cfg)
    total = len(starts)
    logger.info("Analyzing %d windows of %d days (step %d) with %d worker(s)", total, spec.length, spec.step, threads)

    if threads <= 1:
        outcomes = map(task, starts)
        pool = None
    else:
        pool = ProcessPoolExecutor(max_workers=threads, initializer=_init_worker, initargs=(task,))
        chunksize = max(1, min(64, total // (threads * 8)))
        outcomes = pool.map(_run_worker, starts, chunksize=chunksize)

    reports: List[WindowReport] = []
    milestone = max(1, total // 20)
    try:
        for report in outcomes:
            reports.append(report)
            if len(reports) % milestone == 0:
                logger.info("%d/%d windows done", len(reports), total)
    finally:
        if pool is not None:
            pool.shutdown()
    return reports


# ============================================================================
# Exports
# ============================================================================

def reports_frame(reports: Sequence[WindowReport]) -> pd.DataFrame:
    """Report CSV rows: start_date,up_ratio,up_a2,up_pi,down_a2,down_pi,skipped"""
    rows = []
    for report in reports:
        row = {"start_date": report.start_date.isoformat(), "skipped": int(report.skipped)}
        if not report.skipped:
            row.update(
                up_ratio=report.up_ratio,
                up_a2=report.up_result.a2,
                up_pi=report.up_result.pi_value,
                down_a2=report.down_result.a2,
                down_pi=report.down_result.pi_value,
            )
        rows.append(row)
    return pd.DataFrame(rows, columns=REPORT_COLUMNS)


def window_results_frame(reports: Sequence[WindowReport]) -> pd.DataFrame:
    """Per-direction result rows of every analyzed window"""
    results = []
    for report in reports:
        if report.skipped:
            continue
        start = report.start_date.isoformat()
        results.append((start, report.up_result))
        results.append((start, report.down_result))
    return results_frame(results)


def write_histograms(reports: Sequence[WindowReport], out_dir: Path) -> List[Path]:
    """One k,count,frequency,fitted CSV per analyzed window and direction"""
    data_access = get_data_access()
    written = []
    for report in reports:
        if report.skipped:
            continue
        for sample, result in ((report.up_histogram, report.up_result), (report.down_histogram, report.down_result)):
            frame = histogram_frame(sample, GeometricModel(theta=result.theta_hat))
            path = Path(out_dir) / f"{report.start_date.isoformat()}_{sample.direction.value}.csv"
            written.append(data_access.write_frame(path, frame))
    return written


def summarize_by_year(reports: Sequence[WindowReport], alpha: float = 0.05) -> pd.DataFrame:
    """
    Per calendar year of window start: window counts, median pi-values and the
    share of windows whose pi-value falls below alpha, per direction.
    """
    columns = [
        "year", "windows", "skipped", "up_pi_median", "down_pi_median",
        "up_rejected_share", "down_rejected_share",
    ]
    if not reports:
        return pd.DataFrame(columns=columns)
    frame = reports_frame(reports)
    frame["year"] = [r.start_date.year for r in reports]
    analyzed = frame[frame["skipped"] == 0].assign(
        up_rejected=lambda f: (f["up_pi"] < alpha).astype(float),
        down_rejected=lambda f: (f["down_pi"] < alpha).astype(float),
    )
    grouped = frame.groupby("year")
    summary = pd.DataFrame({
        "windows": grouped.size(),
        "skipped": grouped["skipped"].sum(),
    })
    summary.index.name = "year"
    by_year = analyzed.groupby("year")
    summary["up_pi_median"] = by_year["up_pi"].median()
    summary["down_pi_median"] = by_year["down_pi"].median()
    summary["up_rejected_share"] = by_year["up_rejected"].mean()
    summary["down_rejected_share"] = by_year["down_rejected"].mean()
    return summary.reset_index()[columns]


def skipped_share(reports: Sequence[WindowReport]) -> float:
    if not reports:
        return 0.0
    return sum(r.skipped for r in reports) / len(reports)


def report_counts(reports: Sequence[WindowReport]) -> Dict[str, int]:
    skipped = sum(r.skipped for r in reports)
    return {"windows": len(reports), "analyzed": len(reports) - skipped, "skipped": skipped}
