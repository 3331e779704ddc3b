#!/usr/bin/env python3
"""
Generalized FEVD and Connectedness Indices
==========================================

Order-free (generalized) forecast-error variance decomposition and the
indices built on its row-normalized shares l:

  FROM_i   100 * sum_{j != i} l_ij         (receiver)
  TO_i     100 * sum_{j != i} l_ji         (giver)
  NET_i    TO_i - FROM_i
  TCI      mean_i FROM_i
  npdc_ij  100 * (l_ji - l_ij)             (> 0: i is the net transmitter to j)
  NPT_i    #{j : npdc_ij > 0}
  Inc.Own  TO_i + 100 * l_ii
  PCI_ij   (l_ij + l_ji) / (l_ii + l_jj + l_ij + l_ji)
  PII_ij   (l_ij - l_ji) / (l_ij + l_ji), 0/0 -> 0
"""

import json
from concurrent.futures import ThreadPoolExecutor
from datetime import date
from typing import List, Optional, Sequence, Tuple

import numpy as np

from core.errors import (
    DataFaultError,
    DegenerateInputError,
    InsufficientDataError,
    NumericalFailureError,
)
from core.structures import ConnectednessReport, DynamicConnectedness, FevdTable, TvpPath, VarEstimate
from econometrics.tvp import snapshot
from econometrics.var import ma_coefficients
from utils.logger import RunLogger, library_logger
from utils.serialization import dumps

REPORT_SCHEMA_VERSION = 1


def gfevd(est: VarEstimate, H: int) -> FevdTable:
    """Generalized FEVD over horizons 0..H-1, raw and row-normalized."""
    sigma = np.asarray(est.resid_cov, dtype=float)
    variances = np.diag(sigma)
    if np.any(variances <= 0.0):
        raise DegenerateInputError("residual covariance has a non-positive diagonal entry")
    psi = ma_coefficients(est, H).psi

    impact = psi @ sigma                                   # (H, N, N): Psi_h Sigma
    numerator = (impact ** 2).sum(axis=0) / variances[None, :]
    denominator = np.einsum("hij,jk,hik->i", psi, sigma, psi)
    if np.any(denominator <= 0.0) or not np.all(np.isfinite(denominator)):
        raise DegenerateInputError("forecast-error variance is zero or non-finite for some variable")

    raw = numerator / denominator[:, None]
    normalized = raw / raw.sum(axis=1, keepdims=True)
    return FevdTable(horizon=H, raw=raw, normalized=normalized)


def _safe_ratio(numerator: np.ndarray, denominator: np.ndarray) -> np.ndarray:
    out = np.zeros_like(numerator)
    np.divide(numerator, denominator, out=out, where=denominator != 0.0)
    return out


def report_from_shares(
    shares: np.ndarray, tickers: Sequence[str], horizon: int, label: str = ""
) -> ConnectednessReport:
    """Every index from a row-normalized share matrix."""
    l = np.asarray(shares, dtype=float)
    own = np.diag(l)
    spill = l - np.diag(own)
    receiver = 100.0 * spill.sum(axis=1)
    giver = 100.0 * spill.sum(axis=0)
    npdc = 100.0 * (l.T - l)
    pair_sum = l + l.T
    return ConnectednessReport(
        tickers=tuple(tickers),
        horizon=horizon,
        shares=l,
        receiver=receiver,
        giver=giver,
        inc_own=giver + 100.0 * own,
        net=giver - receiver,
        npt=(npdc > 0.0).sum(axis=1),
        tci=float(receiver.mean()),
        npdc=npdc,
        pci=_safe_ratio(pair_sum, own[:, None] + own[None, :] + pair_sum),
        pii=_safe_ratio(l - l.T, pair_sum),
        label=label,
    )


def indices(f: FevdTable, tickers: Optional[Sequence[str]] = None, label: str = "") -> ConnectednessReport:
    n = f.normalized.shape[0]
    tickers = tickers if tickers is not None else [f"x{k + 1}" for k in range(n)]
    return report_from_shares(f.normalized, tickers, f.horizon, label)


def static_report(est: VarEstimate, H: int, label: str = "full") -> ConnectednessReport:
    return indices(gfevd(est, H), est.tickers, label)


def dynamic_indices(
    path: TvpPath,
    H: int,
    workers: int = 1,
    fail_threshold: float = 0.01,
    logger: Optional[RunLogger] = None,
) -> DynamicConnectedness:
    """snapshot -> gfevd -> indices per date, merged in date order.

    Dates whose decomposition fails are skipped and listed; more than
    ``fail_threshold`` of them aborts the run.
    """
    log = logger or library_logger("spillover.connectedness")

    def _shares(t: int) -> Tuple[int, Optional[np.ndarray], Optional[str]]:
        try:
            return t, gfevd(snapshot(path, t), H).normalized, None
        except (NumericalFailureError, np.linalg.LinAlgError, FloatingPointError) as e:
            return t, None, str(e)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        results = list(pool.map(_shares, range(len(path))))

    failed: List[date] = []
    reports: List[ConnectednessReport] = []
    kept_dates = []
    for t, shares, problem in results:
        day = path.dates[t]
        if shares is None:
            failed.append(day)
            log.warning(f"Decomposition failed at {day}: {problem}")
            continue
        kept_dates.append(day)
        reports.append(report_from_shares(shares, path.tickers, H, label=str(day)))

    if failed and len(failed) / len(path) > fail_threshold:
        raise NumericalFailureError(
            f"{len(failed)} of {len(path)} per-date decompositions failed (threshold {fail_threshold:.2%})"
        )
    if not reports:
        raise NumericalFailureError("every per-date decomposition failed")

    average = report_from_shares(np.mean([r.shares for r in reports], axis=0), path.tickers, H, label="average")
    log.info(f"Dynamic connectedness over {len(reports)} dates, average TCI {average.tci:.2f}")
    return DynamicConnectedness(
        tickers=path.tickers,
        horizon=H,
        dates=tuple(kept_dates),
        reports=reports,
        average=average,
        failed_dates=failed,
    )


def average_report(
    dynamic: DynamicConnectedness,
    start: Optional[date] = None,
    stop: Optional[date] = None,
    label: str = "",
) -> ConnectednessReport:
    """Indices recomputed from the mean share matrix over start <= date < stop."""
    selected = [
        r.shares
        for day, r in zip(dynamic.dates, dynamic.reports)
        if (start is None or day >= start) and (stop is None or day < stop)
    ]
    if not selected:
        raise InsufficientDataError(f"no dynamic dates in [{start}, {stop}) for '{label}'")
    return report_from_shares(np.mean(selected, axis=0), dynamic.tickers, dynamic.horizon, label)


def report_to_json(report: ConnectednessReport) -> str:
    """Shares are stored losslessly; the index and pairwise fields are for readers."""
    document = {
        "version": REPORT_SCHEMA_VERSION,
        "label": report.label,
        "horizon": report.horizon,
        "tickers": list(report.tickers),
        "shares": report.shares,
        "tci": report.tci,
        "from": report.receiver,
        "to": report.giver,
        "net": report.net,
        "npt": report.npt,
        "npdc": report.npdc,
        "pci": report.pci,
        "pii": report.pii,
    }
    return dumps(document)


def report_from_json(text: str) -> ConnectednessReport:
    try:
        document = json.loads(text)
        if document.get("version") != REPORT_SCHEMA_VERSION:
            raise DataFaultError(f"unsupported report version {document.get('version')!r}")
        shares = np.array(document["shares"], dtype=float)
        tickers = document["tickers"]
        horizon = int(document["horizon"])
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise DataFaultError(f"malformed connectedness report: {e}")
    if shares.shape != (len(tickers), len(tickers)):
        raise DataFaultError(f"share matrix shape {shares.shape} does not match {len(tickers)} tickers")
    return report_from_shares(shares, tickers, horizon, document.get("label", ""))
