#!/usr/bin/env python3
"""
Static VAR(p) Estimation
========================

Thin layer over statsmodels' VAR: OLS fits with an optional intercept,
information-criterion lag selection on a common sample, the companion-matrix
stability check and the Wold moving-average coefficients feeding the
variance decomposition.

Regressor rows are laid out as [1, y_{t-1}', ..., y_{t-p}'] (intercept first),
the same order statsmodels uses for ``params``.
"""

from datetime import date
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd
from statsmodels.tsa.api import VAR
from statsmodels.tsa.vector_ar.util import comp_matrix
from statsmodels.tsa.vector_ar.var_model import ma_rep

from core.errors import (
    ConfigValidationError,
    DataFaultError,
    DegenerateInputError,
    InsufficientDataError,
    SingularMatrixError,
)
from core.structures import MaCoefficients, ReturnPanel, VarEstimate
from utils.file_utils import format_sig
from utils.logger import RunLogger, library_logger

SNAPSHOT_HEADER = "# var_estimate v1"
SNAPSHOT_DIGITS = 17


def build_lagged(values: np.ndarray, p: int, intercept: bool = True, start: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Targets Y (rows start..T-1) and regressors Z for a VAR(p)."""
    values = np.asarray(values, dtype=float)
    n_rows = values.shape[0]
    start = p if start is None else start
    if start < p:
        raise ConfigValidationError(f"sample start {start} is before the first usable row {p}")
    blocks = [values[start - j:n_rows - j] for j in range(1, p + 1)]
    if intercept:
        blocks.insert(0, np.ones((n_rows - start, 1)))
    return values[start:], np.hstack(blocks)


def companion_matrix(coefficients: np.ndarray) -> np.ndarray:
    """Np x Np companion form of (Phi_1, ..., Phi_p)."""
    return comp_matrix(np.asarray(coefficients, dtype=float))


def spectral_radius(coefficients: np.ndarray) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(companion_matrix(coefficients)))))


def split_coefficients(B: np.ndarray, n_vars: int, p: int, intercept: bool) -> Tuple[np.ndarray, np.ndarray]:
    """(k x N) stacked OLS solution -> intercept (N,) and Phi (p, N, N)."""
    offset = 1 if intercept else 0
    c = B[0].copy() if intercept else np.zeros(n_vars)
    phi = np.stack([B[offset + j * n_vars: offset + (j + 1) * n_vars].T for j in range(p)])
    return c, phi


def _check_residuals(residuals: np.ndarray) -> None:
    sign, _ = np.linalg.slogdet(residuals.T @ residuals / residuals.shape[0])
    if sign <= 0:
        raise DegenerateInputError("residual covariance is singular (perfectly collinear residuals)")


def fit_var(panel: ReturnPanel, p: int, intercept: bool = True, sample_start: Optional[int] = None) -> VarEstimate:
    """OLS VAR(p); Sigma uses the T - p - Np - intercept degrees of freedom.

    ``sample_start`` moves the first target row forward so that several lag
    orders can share one estimation sample.
    """
    if p < 1:
        raise ConfigValidationError(f"lag order must be >= 1, got {p}")
    n_rows, n_vars = panel.values.shape
    start = p if sample_start is None else sample_start
    n_eff = n_rows - start
    if n_eff <= n_vars * p + 1:
        raise InsufficientDataError(
            f"VAR({p}) on {n_vars} variables needs more than {n_vars * p + 1} usable rows, got {n_eff}"
        )
    if not np.all(np.isfinite(panel.values)):
        raise DataFaultError("panel contains non-finite values")

    _, Z = build_lagged(panel.values, p, intercept, start)
    k = Z.shape[1]
    if np.linalg.matrix_rank(Z) < k:
        raise SingularMatrixError(f"VAR({p}) regressor matrix is rank deficient (collinear columns)")

    results = VAR(np.asarray(panel.values[start - p:], dtype=float)).fit(
        maxlags=p, trend="c" if intercept else "n"
    )
    residuals = np.asarray(results.resid, dtype=float)
    _check_residuals(residuals)
    sigma = np.asarray(results.sigma_u, dtype=float)
    sigma = 0.5 * (sigma + sigma.T)

    loglik = float(results.llf)
    n_params = n_vars * k
    c, phi = split_coefficients(np.asarray(results.params, dtype=float), n_vars, p, intercept)
    radius = spectral_radius(phi)
    return VarEstimate(
        tickers=panel.tickers,
        lag_order=p,
        coefficients=phi,
        intercept=c,
        resid_cov=sigma,
        nobs=int(results.nobs),
        has_intercept=intercept,
        residuals=residuals,
        bic=float(-2.0 * loglik + n_params * np.log(n_eff)),
        aic=float(-2.0 * loglik + 2.0 * n_params),
        loglik=loglik,
        gram_inv=np.linalg.inv(Z.T @ Z),
        spectral_radius=radius,
        stable=radius < 1.0,
        as_of=panel.dates[-1] if panel.dates else None,
    )


def lag_criteria(panel: ReturnPanel, p_max: int, intercept: bool = True) -> pd.DataFrame:
    """AIC/BIC per candidate lag, every model fitted on rows p_max..T-1."""
    if p_max < 1:
        raise ConfigValidationError(f"p_max must be >= 1, got {p_max}")
    rows = []
    for p in range(1, p_max + 1):
        est = fit_var(panel, p, intercept, sample_start=p_max)
        rows.append({"lag": p, "aic": est.aic, "bic": est.bic, "loglik": est.loglik, "nobs": est.nobs})
    return pd.DataFrame(rows).set_index("lag")


def select_lag(panel: ReturnPanel, p_max: int, intercept: bool = True, logger: Optional[RunLogger] = None) -> int:
    """BIC-minimizing lag in 1..p_max (ties go to the smaller model)."""
    log = logger or library_logger("spillover.var")
    criteria = lag_criteria(panel, p_max, intercept)
    chosen = int(criteria["bic"].idxmin())
    log.debug(f"Lag criteria (common sample of {int(criteria['nobs'].iloc[0])} rows):\n{criteria.to_string()}")
    log.info(f"BIC selects lag {chosen} of 1..{p_max}")
    return chosen


def ma_coefficients(est: VarEstimate, H: int) -> MaCoefficients:
    """Psi_0 = I; Psi_h = sum_{j=1..min(h,p)} Phi_j Psi_{h-j} for h < H."""
    if H < 1:
        raise ConfigValidationError(f"horizon must be >= 1, got {H}")
    psi = ma_rep(np.asarray(est.coefficients, dtype=float), maxn=H - 1)
    return MaCoefficients(horizons=H, psi=np.asarray(psi, dtype=float))


def _row(values: np.ndarray) -> str:
    return " ".join(format_sig(v, SNAPSHOT_DIGITS) for v in np.ravel(values))


def write_var_snapshot(est: VarEstimate) -> str:
    """Self-describing text dump: header keys, then row-major matrices."""
    lines: List[str] = [
        SNAPSHOT_HEADER,
        f"tickers: {','.join(est.tickers)}",
        f"lag_order: {est.lag_order}",
        f"lag_selection: {est.lag_selection or 'fixed'}",
        f"intercept: {'true' if est.has_intercept else 'false'}",
        f"nobs: {est.nobs}",
        f"as_of: {est.as_of.isoformat() if isinstance(est.as_of, date) else 'none'}",
        f"loglik: {format_sig(est.loglik if est.loglik is not None else float('nan'), SNAPSHOT_DIGITS)}",
        f"aic: {format_sig(est.aic if est.aic is not None else float('nan'), SNAPSHOT_DIGITS)}",
        f"bic: {format_sig(est.bic if est.bic is not None else float('nan'), SNAPSHOT_DIGITS)}",
        f"spectral_radius: {format_sig(est.spectral_radius, SNAPSHOT_DIGITS)}",
        f"stable: {'true' if est.stable else 'false'}",
        "[intercept]",
        _row(est.intercept),
    ]
    for j in range(est.lag_order):
        lines.append(f"[phi_{j + 1}]")
        lines.extend(_row(r) for r in est.coefficients[j])
    lines.append("[sigma]")
    lines.extend(_row(r) for r in est.resid_cov)
    return "\n".join(lines) + "\n"


def read_var_snapshot(text: str) -> VarEstimate:
    """Parse write_var_snapshot output back into a VarEstimate (no residuals)."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != SNAPSHOT_HEADER:
        raise DataFaultError("not a VAR snapshot (missing header line)")
    header = {}
    blocks = {}
    current = None
    for line in lines[1:]:
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1]
            blocks[current] = []
        elif current is None:
            key, _, value = line.partition(":")
            header[key.strip()] = value.strip()
        else:
            blocks[current].append([float(v) for v in line.split()])

    try:
        tickers = tuple(header["tickers"].split(","))
        p = int(header["lag_order"])
        phi = np.array([blocks[f"phi_{j + 1}"] for j in range(p)], dtype=float)
        sigma = np.array(blocks["sigma"], dtype=float)
        intercept = np.array(blocks["intercept"][0], dtype=float)
    except (KeyError, ValueError, IndexError) as e:
        raise DataFaultError(f"malformed VAR snapshot: {e}")

    def _opt(key):
        value = float(header.get(key, "nan"))
        return None if np.isnan(value) else value

    as_of = header.get("as_of", "none")
    return VarEstimate(
        tickers=tickers,
        lag_order=p,
        coefficients=phi,
        intercept=intercept,
        resid_cov=sigma,
        nobs=int(header.get("nobs", 0)),
        has_intercept=header.get("intercept", "true") == "true",
        bic=_opt("bic"),
        aic=_opt("aic"),
        loglik=_opt("loglik"),
        spectral_radius=float(header.get("spectral_radius", "nan")),
        stable=header.get("stable") == "true",
        as_of=None if as_of == "none" else date.fromisoformat(as_of),
        lag_selection=None if header.get("lag_selection") == "fixed" else header.get("lag_selection"),
    )
