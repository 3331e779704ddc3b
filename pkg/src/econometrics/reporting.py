#!/usr/bin/env python3
"""
Table Rendering
===============

Human tables (aligned text, publication-style decimals and significance stars)
and full-precision CSV for diagnostics and connectedness reports.

Connectedness layout: N x N block of 100 * l with a Receiver column, then
Giver (total in the corner), Inc.Own ("TCI" in the corner), NET (TCI value
in the corner) and NPT rows, then the Givers / Receivers summary lines.
"""

from datetime import date
from typing import Dict, List, Optional, Sequence, Tuple

import pandas as pd
from scipy.stats import norm

from core.structures import AdfResult, ChowResult, ConnectednessReport, DescriptiveStats
from econometrics.diagnostics import significance_stars
from utils.file_utils import format_sig

CSV_DIGITS = 17
STAR_LEGEND = "(. p-value <= 0.1, * p-value <= 0.05, ** p-value <= 0.01, *** p-value <= 0.005)"
KURTOSIS_NOTE = "Kurtosis is excess kurtosis (normal = 0)."

ChowRow = Tuple[str, date, Optional[ChowResult], str]  # (ticker, break, result, status)


def _fixed(value: float, decimals: int = 2) -> str:
    text = f"{value:.{decimals}f}"
    return text[1:] if text.startswith("-") and float(text) == 0.0 else text


def _text(frame: pd.DataFrame) -> str:
    return frame.to_string() + "\n"


def _csv(frame: pd.DataFrame, index: bool = True) -> str:
    return frame.to_csv(index=index, lineterminator="\n")


# ---------------------------------------------------------------- connectedness

def _connectedness_cells(report: ConnectednessReport, fmt) -> pd.DataFrame:
    columns = list(report.tickers) + ["Receiver"]
    rows: Dict[str, List[str]] = {}
    for i, ticker in enumerate(report.tickers):
        rows[ticker] = [fmt(100.0 * v) for v in report.shares[i]] + [fmt(report.receiver[i])]
    rows["Giver"] = [fmt(v) for v in report.giver] + [fmt(report.giver.sum())]
    rows["Inc.Own"] = [fmt(v) for v in report.inc_own] + ["TCI"]
    rows["NET"] = [fmt(v) for v in report.net] + [fmt(report.tci)]
    rows["NPT"] = [str(int(v)) for v in report.npt] + [""]
    return pd.DataFrame.from_dict(rows, orient="index", columns=columns)


def summary_lines(report: ConnectednessReport) -> List[str]:
    """Givers ranked by NET, receivers in panel order."""
    ranked = sorted(report.givers, key=lambda t: -report.net[report.tickers.index(t)])
    return [f"Givers: {', '.join(ranked)}", f"Receivers: {', '.join(report.receivers)}"]


def render_connectedness_text(report: ConnectednessReport, title: Optional[str] = None) -> str:
    header = title or f"Connectedness ({report.label or 'report'}), horizon {report.horizon}"
    body = _text(_connectedness_cells(report, _fixed))
    return f"{header}\n\n{body}\n" + "\n".join(summary_lines(report)) + "\n"


def render_connectedness_csv(report: ConnectednessReport) -> str:
    frame = _connectedness_cells(report, lambda v: format_sig(v, CSV_DIGITS))
    frame.index.name = "row"
    return _csv(frame)


PAIRWISE_TABLES = ("npdc", "pci", "pii")


def render_pairwise_csv(report: ConnectednessReport, table: str) -> str:
    """One pairwise N x N matrix (npdc, pci or pii) keyed by ticker on both axes."""
    if table not in PAIRWISE_TABLES:
        raise ValueError(f"unknown pairwise table '{table}'")
    matrix = getattr(report, table)
    frame = pd.DataFrame(
        [[format_sig(v, CSV_DIGITS) for v in row] for row in matrix],
        index=list(report.tickers),
        columns=list(report.tickers),
    )
    frame.index.name = "ticker"
    return _csv(frame)


def render_comparison_text(reports: Sequence[ConnectednessReport], title: Optional[str] = None) -> str:
    """Segment tables side by side, one column block per report."""
    blocks = []
    for report in reports:
        cells = _connectedness_cells(report, _fixed)
        cells.columns = pd.MultiIndex.from_product([[report.label], cells.columns])
        blocks.append(cells)
    frame = pd.concat(blocks, axis=1)
    header = title or "Connectedness by segment: " + " | ".join(r.label for r in reports)
    lines = [header, "", frame.to_string(), ""]
    for report in reports:
        lines.append(f"[{report.label}] " + "; ".join(summary_lines(report)))
    return "\n".join(lines) + "\n"


def render_comparison_csv(reports: Sequence[ConnectednessReport]) -> str:
    blocks = []
    for report in reports:
        cells = _connectedness_cells(report, lambda v: format_sig(v, CSV_DIGITS))
        cells.columns = [f"{report.label}:{c}" for c in cells.columns]
        blocks.append(cells)
    frame = pd.concat(blocks, axis=1)
    frame.index.name = "row"
    return _csv(frame)


def series_csv(frame: pd.DataFrame) -> str:
    """Date-indexed time series at full precision."""
    out = frame.copy()
    out.index = [d.isoformat() if isinstance(d, date) else str(d) for d in out.index]
    out.index.name = "date"
    return out.to_csv(lineterminator="\n", float_format=f"%.{CSV_DIGITS}g")


# ---------------------------------------------------------------- diagnostics

def render_descriptive_text(stats: Dict[str, DescriptiveStats]) -> str:
    rows = {}
    q2_label = "Q2"
    for ticker, s in stats.items():
        q2_label = f"Q2({s.q2_lags})"
        rows[ticker] = {
            "Mean": _fixed(s.mean, 3),
            "Median": _fixed(s.median, 4),
            "SD": _fixed(s.sd, 4),
            "Skewness": _fixed(s.skewness, 3) + _moment_stars(s.skewness, 6.0, s.n_obs),
            "Kurtosis": _fixed(s.excess_kurtosis, 3) + _moment_stars(s.excess_kurtosis, 24.0, s.n_obs),
            "J-B test": _fixed(s.jb_stat, 3) + significance_stars(s.jb_pvalue),
            q2_label: _fixed(s.q2_stat, 3) + significance_stars(s.q2_pvalue),
        }
    frame = pd.DataFrame.from_dict(rows, orient="index")
    frame.index.name = "Variable"
    return "Descriptive statistics\n\n" + _text(frame) + "\n" + STAR_LEGEND + "\n" + KURTOSIS_NOTE + "\n"


def _moment_stars(value: float, variance_factor: float, n_obs: int) -> str:
    """Asymptotic z-test of a moment: se = sqrt(6 / T) for skewness, sqrt(24 / T) for excess kurtosis."""
    z = value / (variance_factor / n_obs) ** 0.5
    return significance_stars(float(2.0 * norm.sf(abs(z))))


def render_descriptive_csv(stats: Dict[str, DescriptiveStats]) -> str:
    records = []
    for ticker, s in stats.items():
        records.append({
            "variable": ticker,
            "n_obs": s.n_obs,
            "mean": format_sig(s.mean, CSV_DIGITS),
            "median": format_sig(s.median, CSV_DIGITS),
            "sd": format_sig(s.sd, CSV_DIGITS),
            "skewness": format_sig(s.skewness, CSV_DIGITS),
            "excess_kurtosis": format_sig(s.excess_kurtosis, CSV_DIGITS),
            "jb_stat": format_sig(s.jb_stat, CSV_DIGITS),
            "jb_pvalue": format_sig(s.jb_pvalue, CSV_DIGITS),
            "q2_stat": format_sig(s.q2_stat, CSV_DIGITS),
            "q2_lags": s.q2_lags,
            "q2_pvalue": format_sig(s.q2_pvalue, CSV_DIGITS),
        })
    return _csv(pd.DataFrame.from_records(records), index=False)


def _adf_cell(result: Optional[AdfResult]) -> str:
    if result is None:
        return "n/a"
    return f"{_fixed(result.statistic, 2)}{significance_stars(result.pvalue)}({result.chosen_lag})"


def render_adf_text(results: Dict[str, Dict[str, AdfResult]]) -> str:
    """``results[ticker]`` maps "level" / "difference" to an AdfResult."""
    rows = {}
    specs = {r.deterministic_spec for by_form in results.values() for r in by_form.values()}
    spec = ", ".join(sorted(specs))
    for ticker, by_form in results.items():
        level, diff = by_form.get("level"), by_form.get("difference")
        rows[ticker] = {
            "ADF level (Lag)": _adf_cell(level),
            "p-value (level)": format_sig(level.pvalue, 3) if level else "n/a",
            "ADF first difference (Lag)": _adf_cell(diff),
            "p-value": format_sig(diff.pvalue, 3) if diff else "n/a",
        }
    frame = pd.DataFrame.from_dict(rows, orient="index")
    frame.index.name = "Ticker"
    return f"ADF unit-root tests (deterministic terms: {spec}, lag by AIC)\n\n" + _text(frame) + "\n" + STAR_LEGEND + "\n"


def render_adf_csv(results: Dict[str, Dict[str, AdfResult]]) -> str:
    records = []
    for ticker, by_form in results.items():
        for form in ("level", "difference"):
            r = by_form.get(form)
            if r is None:
                continue
            records.append({
                "ticker": ticker,
                "form": form,
                "statistic": format_sig(r.statistic, CSV_DIGITS),
                "chosen_lag": r.chosen_lag,
                "max_lag": r.max_lag,
                "pvalue": format_sig(r.pvalue, CSV_DIGITS),
                "stars": significance_stars(r.pvalue),
                "deterministic_spec": r.deterministic_spec,
                "n_obs": r.n_obs,
            })
    return _csv(pd.DataFrame.from_records(records), index=False)


def render_chow_text(rows: Sequence[ChowRow]) -> str:
    table = []
    for ticker, break_date, result, status in rows:
        if result is None:
            table.append([ticker, break_date.isoformat(), status, "", ""])
        else:
            table.append([
                ticker,
                break_date.isoformat(),
                _fixed(result.f_stat, 3) + significance_stars(result.pvalue),
                f"({result.df_num}, {result.df_den})",
                format_sig(result.pvalue, 3),
            ])
    frame = pd.DataFrame(table, columns=["Ticker", "Break", "F", "df", "p-value"]).set_index("Ticker")
    return "Chow break test, AR(1) with constant\n\n" + _text(frame) + "\n" + STAR_LEGEND + "\n"


def render_chow_csv(rows: Sequence[ChowRow]) -> str:
    records = []
    for ticker, break_date, result, status in rows:
        record = {"ticker": ticker, "break_date": break_date.isoformat()}
        if result is None:
            record.update(f_stat="", df_num="", df_den="", pvalue="", status=status)
        else:
            record.update(
                f_stat=format_sig(result.f_stat, CSV_DIGITS),
                df_num=result.df_num,
                df_den=result.df_den,
                pvalue=format_sig(result.pvalue, CSV_DIGITS),
                status=status,
            )
        records.append(record)
    return _csv(pd.DataFrame.from_records(records), index=False)
