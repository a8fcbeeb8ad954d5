"""
Ingest Module
Parses daily index prices and monthly CPI data, deflates prices to constant money
and computes one-day returns
"""

import io
import logging
import math
from datetime import date
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from models.models import CpiSeries, PriceSeries, ReturnSeries
from src.errors import DataError, FormatError, GapError, RangeError, SizeError

logger = logging.getLogger(__name__)

YAHOO_COLUMNS = ["Date", "Open", "High", "Low", "Close", "Adj Close", "Volume"]
CANONICAL_COLUMNS = ["Date", "Close"]
CPI_COLUMNS = ["Month", "Value"]
DURATION_COLUMN = "duration"
FLOAT_FORMAT = "%.12g"


def _read_frame(csv_text: str, header: Optional[int] = 0) -> pd.DataFrame:
    """Read CSV text as strings so each cell can be validated with its line number"""
    if csv_text is None or not csv_text.strip():
        raise FormatError("input is empty")
    try:
        return pd.read_csv(
            io.StringIO(csv_text),
            header=header,
            dtype=str,
            keep_default_na=False,
            skipinitialspace=True,
            skip_blank_lines=True,
        )
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise FormatError(f"malformed CSV: {e}") from e


def _parse_day(text: str) -> date:
    text = str(text).strip()
    if len(text) != 10:
        raise ValueError(f"expected YYYY-MM-DD, got {text!r}")
    return date.fromisoformat(text)


def _parse_month(text: str) -> date:
    text = str(text).strip()
    if len(text) != 7:
        raise ValueError(f"expected YYYY-MM, got {text!r}")
    return date.fromisoformat(f"{text}-01")


def _parse_positive(text: str, line: int, column: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise DataError(f"line {line}: {column} value {text!r} is not numeric", row=line) from None
    if not math.isfinite(value):
        raise DataError(f"line {line}: {column} value {text!r} is not finite", row=line)
    if value <= 0:
        raise DataError(f"line {line}: {column} value {value} is not positive", row=line)
    return value


def _next_month(month: date) -> date:
    return date(month.year + month.month // 12, month.month % 12 + 1, 1)


def parse_prices(csv_text: str, label: str = "INDEX") -> PriceSeries:
    """
    Parse a daily price CSV into a PriceSeries of closing values.

    Accepts the Yahoo layout (Date,Open,High,Low,Close,Adj Close,Volume) or the
    canonical Date,Close layout written by format_prices_csv. Rows may come in
    any order; the result is sorted by date.

    Args:
        csv_text: Whole file contents including the header row
        label: Series identifier

    Returns:
        PriceSeries keyed by trading day
    """
    frame = _read_frame(csv_text)
    columns = [str(c).strip() for c in frame.columns]
    if columns not in (YAHOO_COLUMNS, CANONICAL_COLUMNS):
        raise FormatError(
            f"unexpected header {columns}; expected {','.join(YAHOO_COLUMNS)} or {','.join(CANONICAL_COLUMNS)}"
        )
    frame.columns = columns
    if frame.empty:
        raise FormatError("no data rows after the header")

    first_line: Dict[date, int] = {}
    rows: List[Tuple[date, float]] = []
    # line 1 is the header
    for line, (day_text, close_text) in enumerate(zip(frame["Date"], frame["Close"]), start=2):
        try:
            day = _parse_day(day_text)
        except ValueError as e:
            raise DataError(f"line {line}: invalid Date ({e})", row=line) from None
        close = _parse_positive(close_text, line, "Close")
        if day in first_line:
            raise DataError(f"line {line}: duplicate date {day} (first seen on line {first_line[day]})", row=line)
        first_line[day] = line
        rows.append((day, close))

    rows.sort(key=lambda row: row[0])
    logger.debug("Parsed %d closes for %s", len(rows), label)
    return PriceSeries(label=label, dates=[d for d, _ in rows], values=[v for _, v in rows])


def parse_cpi(csv_text: str) -> CpiSeries:
    """
    Parse monthly CPI rows (YYYY-MM,value), with or without a Month,Value header.

    Raises:
        FormatError: empty input or wrong column count
        DataError: invalid month, non-positive value or duplicate month
        GapError: a month inside the covered range is missing
    """
    frame = _read_frame(csv_text, header=None)
    if frame.shape[1] != 2:
        raise FormatError(f"expected 2 columns (Month,Value), found {frame.shape[1]}")

    offset = 1
    if [str(c).strip() for c in frame.iloc[0]] == CPI_COLUMNS:
        frame = frame.iloc[1:]
        offset = 2
    if frame.empty:
        raise FormatError("no CPI rows")

    seen: Dict[date, int] = {}
    rows: List[Tuple[date, float]] = []
    for line, (month_text, value_text) in enumerate(zip(frame.iloc[:, 0], frame.iloc[:, 1]), start=offset):
        try:
            month = _parse_month(month_text)
        except ValueError as e:
            raise DataError(f"line {line}: invalid Month ({e})", row=line) from None
        value = _parse_positive(value_text, line, "Value")
        if month in seen:
            raise DataError(f"line {line}: duplicate month {month:%Y-%m}", row=line)
        seen[month] = line
        rows.append((month, value))

    rows.sort(key=lambda row: row[0])
    for (prev, _), (cur, _) in zip(rows, rows[1:]):
        expected = _next_month(prev)
        if cur != expected:
            raise GapError(f"CPI month {expected:%Y-%m} is missing", month=expected)

    return CpiSeries(months=[m for m, _ in rows], values=[v for _, v in rows])


def parse_durations(csv_text: str) -> np.ndarray:
    """
    Parse a one-column CSV of non-negative integer waiting times, with an
    optional `duration` header.
    """
    frame = _read_frame(csv_text, header=None)
    if frame.shape[1] != 1:
        raise FormatError(f"expected a single duration column, found {frame.shape[1]}")
    cells = [str(c).strip() for c in frame.iloc[:, 0]]
    offset = 1
    if cells and cells[0].lower() == DURATION_COLUMN:
        cells = cells[1:]
        offset = 2
    if not cells:
        raise FormatError("no durations")

    durations = []
    for line, text in enumerate(cells, start=offset):
        if not text.isdigit():
            raise DataError(f"line {line}: duration {text!r} is not a non-negative integer", row=line)
        durations.append(int(text))
    return np.asarray(durations, dtype=np.int64)


def interpolate_cpi_daily(cpi: CpiSeries, dates: Sequence[date]) -> np.ndarray:
    """
    CPI value for each calendar date, linear in calendar days between monthly anchors.

    Each month's value applies to its first calendar day; a date exactly on an
    anchor gets that month's value unchanged.
    """
    anchors = np.fromiter((m.toordinal() for m in cpi.months), dtype=float, count=len(cpi))
    days = np.fromiter((d.toordinal() for d in dates), dtype=float, count=len(dates))
    outside = (days < anchors[0]) | (days > anchors[-1])
    if np.any(outside):
        bad = dates[int(np.argmax(outside))]
        missing = date(bad.year, bad.month, 1) if bad < cpi.months[0] else _next_month(cpi.months[-1])
        raise RangeError(
            f"date {bad} is outside the CPI anchor range {cpi.months[0]} .. {cpi.months[-1]}; "
            f"CPI month {missing:%Y-%m} is needed"
        )
    return np.interp(days, anchors, np.asarray(cpi.values, dtype=float))


def deflate(prices: PriceSeries, cpi: CpiSeries, base_date: Optional[date] = None) -> PriceSeries:
    """
    Express prices in constant money of base_date: value(t) * CPI(base) / CPI(t).

    The base date defaults to the first trading day of the series.
    """
    base_date = base_date or prices.dates[0]
    cpi_t = interpolate_cpi_daily(cpi, prices.dates)
    cpi_base = interpolate_cpi_daily(cpi, [base_date])[0]
    values = prices.as_array() * (cpi_base / cpi_t)
    logger.info("Deflated %s to constant money of %s (CPI %.6g)", prices.label, base_date, cpi_base)
    return PriceSeries(label=prices.label, dates=prices.dates, values=values.tolist())


def returns(prices: PriceSeries, horizon: int = 1) -> ReturnSeries:
    """Log returns r(t) = log S(t+horizon) - log S(t) and simple returns, one per start day"""
    if horizon < 1:
        raise SizeError(f"horizon must be at least 1 trading day, got {horizon}")
    if len(prices) <= horizon:
        raise SizeError(f"returns over {horizon} day(s) need at least {horizon + 1} prices, got {len(prices)}")
    values = prices.as_array()
    log_values = np.log(values)
    log_returns = log_values[horizon:] - log_values[:-horizon]
    simple_returns = (values[horizon:] - values[:-horizon]) / values[:-horizon]
    return ReturnSeries(
        dates=prices.dates[:-horizon],
        log_returns=log_returns.tolist(),
        simple_returns=simple_returns.tolist(),
        horizon=horizon,
    )


def prices_frame(prices: PriceSeries) -> pd.DataFrame:
    return pd.DataFrame({
        "Date": [d.isoformat() for d in prices.dates],
        "Close": prices.values,
    })


def format_prices_csv(prices: PriceSeries) -> str:
    """Canonical Date,Close CSV with 12 significant digits"""
    return prices_frame(prices).to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
