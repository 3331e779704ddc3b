#!/usr/bin/env python3
"""
Price Ingest and Return Construction
====================================

CSV price files -> RawSeries -> inner-joined price matrix -> ReturnPanel,
plus sub-sample splitting around break dates.

All functions are pure over their inputs; nothing is cached or mutated.
"""

import bisect
import io
import pathlib
from datetime import date
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from core.config import SeriesSpec
from core.errors import (
    ConfigValidationError,
    DataFaultError,
    EmptyIntersectionError,
    InsufficientDataError,
)
from core.structures import RawSeries, ReturnPanel, SampleSplit, TransformTag
from utils.logger import RunLogger, library_logger

ModeArg = Union[str, TransformTag, Sequence[Union[str, TransformTag]]]


def _log(logger: Optional[RunLogger]) -> RunLogger:
    return logger or library_logger("spillover.data")


def load_csv(path: Union[str, pathlib.Path], schema: SeriesSpec, logger: Optional[RunLogger] = None) -> RawSeries:
    """Read one price file into a sorted, de-duplicated RawSeries.

    Rows with an unparseable date, an unparseable price or a price <= 0 are
    dropped and counted in ``rejected_rows``. Repeated dates are collapsed when
    they carry the same price and rejected when they do not.
    """
    log = _log(logger)
    path = pathlib.Path(path)
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except (OSError, UnicodeDecodeError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise DataFaultError(f"{schema.ticker}: cannot read {path}: {e}")

    missing = [c for c in (schema.date_column, schema.price_column) if c not in frame.columns]
    if missing:
        raise DataFaultError(f"{schema.ticker}: column(s) {missing} not in {path.name} (found {list(frame.columns)})")

    dates = pd.to_datetime(frame[schema.date_column].str.strip(), format=schema.date_format, errors="coerce")
    prices = pd.to_numeric(
        frame[schema.price_column].str.strip().str.replace(",", "", regex=False), errors="coerce"
    )
    valid = dates.notna() & prices.notna() & np.isfinite(prices) & (prices > 0)
    rejected = int((~valid).sum())
    if rejected:
        log.warning(f"{schema.ticker}: rejected {rejected} row(s) with unparseable date or non-positive price in {path.name}")

    clean = pd.DataFrame({"date": dates[valid].dt.date.to_numpy(), "price": prices[valid].astype(float).to_numpy()})
    if clean.empty:
        raise DataFaultError(f"{schema.ticker}: no valid rows in {path}")

    distinct = clean.groupby("date")["price"].nunique()
    conflicts = distinct[distinct > 1]
    if not conflicts.empty:
        first = conflicts.index[0]
        raise DataFaultError(
            f"{schema.ticker}: {len(conflicts)} duplicate date(s) with conflicting prices, first at {first}"
        )
    clean = clean.drop_duplicates(subset="date").sort_values("date", kind="mergesort")

    log.debug(f"{schema.ticker}: loaded {len(clean)} rows from {path.name}")
    return RawSeries(
        ticker=schema.ticker,
        dates=tuple(clean["date"].tolist()),
        prices=clean["price"].to_numpy(dtype=float),
        rejected_rows=rejected,
    )


def align(series: Sequence[RawSeries], logger: Optional[RunLogger] = None) -> Tuple[Tuple[date, ...], np.ndarray]:
    """Inner join on the dates every series shares; columns keep the given order."""
    log = _log(logger)
    if len(series) < 2:
        raise DataFaultError(f"align needs at least two series, got {len(series)}")
    for s in series:
        if len(s) == 0:
            raise DataFaultError(f"{s.ticker}: empty series")

    common = set(series[0].dates)
    for s in series[1:]:
        common &= set(s.dates)
    if not common:
        raise EmptyIntersectionError("empty intersection: the input series share no common date")

    dates = tuple(sorted(common))
    columns = []
    for s in series:
        lookup = dict(zip(s.dates, s.prices))
        columns.append([lookup[d] for d in dates])
        dropped = len(s) - len(dates)
        if dropped:
            log.info(f"{s.ticker}: {dropped} row(s) outside the common calendar dropped by alignment")
    return dates, np.column_stack(columns).astype(float)


def _resolve_modes(mode: ModeArg, n_cols: int) -> Tuple[str, ...]:
    if isinstance(mode, (str, TransformTag)):
        modes = [mode] * n_cols
    else:
        modes = list(mode)
        if len(modes) != n_cols:
            raise ConfigValidationError(f"{len(modes)} transform tags given for {n_cols} columns")
    resolved = []
    for m in modes:
        try:
            resolved.append(TransformTag(m).value)
        except ValueError:
            raise ConfigValidationError(f"unknown transform '{m}' (expected log_diff or plain_diff)")
    return tuple(resolved)


def to_returns(
    prices: np.ndarray,
    mode: ModeArg = TransformTag.LOG_DIFF,
    tickers: Optional[Sequence[str]] = None,
    dates: Optional[Sequence[date]] = None,
) -> ReturnPanel:
    """First differences of log (or raw) levels; the panel is one row shorter.

    ``mode`` is one tag for every column or one tag per column. Without a
    calendar the rows are indexed 1..T-1.
    """
    prices = np.asarray(prices, dtype=float)
    if prices.ndim == 1:
        prices = prices[:, None]
    n_rows, n_cols = prices.shape
    if n_rows < 2:
        raise InsufficientDataError(f"need at least two price rows to difference, got {n_rows}")
    tags = _resolve_modes(mode, n_cols)
    tickers = tuple(tickers) if tickers is not None else tuple(f"x{k + 1}" for k in range(n_cols))
    if len(tickers) != n_cols:
        raise DataFaultError(f"{len(tickers)} tickers for {n_cols} price columns")
    if dates is not None and len(dates) != n_rows:
        raise DataFaultError(f"{len(dates)} dates for {n_rows} price rows")

    values = np.empty((n_rows - 1, n_cols))
    for k, tag in enumerate(tags):
        column = prices[:, k]
        if not np.all(np.isfinite(column)):
            raise DataFaultError(f"{tickers[k]}: non-finite price")
        if tag == TransformTag.LOG_DIFF.value:
            if np.any(column <= 0):
                raise DataFaultError(f"{tickers[k]}: non-positive price under log_diff")
            values[:, k] = np.diff(np.log(column))
        else:
            values[:, k] = np.diff(column)

    calendar = tuple(dates) if dates is not None else tuple(range(n_rows))
    return ReturnPanel(
        tickers=tickers,
        dates=calendar[1:],
        values=values,
        transform_tags=tags,
        base_prices=prices[0].copy(),
        base_date=calendar[0],
    )


def reconstruct_prices(panel: ReturnPanel) -> np.ndarray:
    """Invert to_returns from the stored base prices: (T + 1) x N levels."""
    if panel.base_prices is None:
        raise DataFaultError("panel carries no base prices (it is not the first segment of a differenced series)")
    levels = np.empty((panel.n_obs + 1, panel.n_vars))
    levels[0] = panel.base_prices
    for k, tag in enumerate(panel.transform_tags):
        steps = np.cumsum(panel.values[:, k])
        if tag == TransformTag.LOG_DIFF.value:
            levels[1:, k] = panel.base_prices[k] * np.exp(steps)
        else:
            levels[1:, k] = panel.base_prices[k] + steps
    return levels


def split_panel(panel: ReturnPanel, split: SampleSplit) -> List[ReturnPanel]:
    """Contiguous segments; a row dated on a break date opens the later segment."""
    if not split.break_dates:
        return [panel]
    first, last = panel.dates[0], panel.dates[-1]
    cuts = []
    for b in split.break_dates:
        if not (first < b <= last):
            raise ConfigValidationError(f"break date {b} outside the panel range ({first} .. {last}]")
        cuts.append(bisect.bisect_left(panel.dates, b))
    bounds = [0] + cuts + [panel.n_obs]
    segments = []
    for start, stop in zip(bounds, bounds[1:]):
        if stop <= start:
            raise ConfigValidationError(f"break dates {list(split.break_dates)} produce an empty segment")
        segments.append(panel.rows(start, stop))
    return segments


def restrict_dates(
    dates: Sequence[date], prices: np.ndarray, start: Optional[date], end: Optional[date]
) -> Tuple[Tuple[date, ...], np.ndarray]:
    """Keep aligned price rows with start <= date <= end (inclusive)."""
    keep = [k for k, d in enumerate(dates) if (start is None or d >= start) and (end is None or d <= end)]
    return tuple(dates[k] for k in keep), prices[keep]


def build_panel(
    specs: Sequence[SeriesSpec],
    start: Optional[date] = None,
    end: Optional[date] = None,
    logger: Optional[RunLogger] = None,
) -> ReturnPanel:
    """load -> align -> date-range filter -> per-column transform."""
    log = _log(logger)
    raw = [load_csv(s.path, s, logger=log) for s in specs]
    if len(raw) == 1:
        dates, prices = raw[0].dates, raw[0].prices[:, None]
    else:
        dates, prices = align(raw, logger=log)
    dates, prices = restrict_dates(dates, prices, start, end)
    if len(dates) < 2:
        raise InsufficientDataError(f"only {len(dates)} aligned price row(s) inside {start} .. {end}")
    panel = to_returns(prices, [s.transform for s in specs], tickers=[s.ticker for s in specs], dates=dates)
    log.info(f"Panel built: {panel.n_obs} rows x {panel.n_vars} columns ({panel.dates[0]} .. {panel.dates[-1]})")
    return panel


def panel_to_csv(panel: ReturnPanel) -> str:
    """`date` column first, one column per ticker, 12 significant digits."""
    frame = panel.to_frame()
    frame.index = [d.isoformat() if isinstance(d, date) else str(d) for d in frame.index]
    frame.index.name = "date"
    return frame.to_csv(float_format="%.12g", lineterminator="\n")


def panel_from_csv(text_or_path: Union[str, pathlib.Path], transform: str = "log_diff") -> ReturnPanel:
    """Reload a panel written by panel_to_csv (base prices are not stored)."""
    source = text_or_path
    if isinstance(text_or_path, str) and "\n" in text_or_path:
        source = io.StringIO(text_or_path)
    frame = pd.read_csv(source)
    if frame.columns[0] != "date":
        raise DataFaultError("panel CSV must start with a 'date' column")
    tickers = tuple(frame.columns[1:])
    return ReturnPanel(
        tickers=tickers,
        dates=tuple(date.fromisoformat(d) for d in frame["date"].astype(str)),
        values=frame[list(tickers)].to_numpy(dtype=float),
        transform_tags=_resolve_modes(transform, len(tickers)),
    )
