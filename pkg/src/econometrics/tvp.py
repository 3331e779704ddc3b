#!/usr/bin/env python3
"""
Time-Varying-Parameter VAR
==========================

Forgetting-factor Kalman filter over a random-walk coefficient state.

State layout is equation-major: for equation i the block is
[c_i, Phi_1[i, :], ..., Phi_p[i, :]], so y_t = (I_N kron z_t') state_t + e_t
with z_t = [1, y_{t-1}', ..., y_{t-p}'].

Per date:
  predict   P <- P / kappa1                      (state mean unchanged)
  error     e = y_t - Z_t state
  S_t       kappa2 * S_{t-1} + (1 - kappa2) * e e'
  update    gain against F = Z P Z' + S_t, Joseph-form covariance,
            symmetrize, eigenvalue check on P
"""

from dataclasses import dataclass, asdict
from typing import List, Optional, Sequence, Tuple

import numpy as np

from core.errors import (
    ConfigValidationError,
    DataFaultError,
    InsufficientDataError,
    PositiveDefinitenessError,
    SingularMatrixError,
)
from core.structures import ReturnPanel, TvpPath, VarEstimate
from econometrics.var import fit_var, spectral_radius
from utils.file_utils import format_sig
from utils.logger import RunLogger, library_logger

PATH_DIGITS = 12


@dataclass
class TvpConfig:
    """Filter settings"""
    kappa1: float = 0.99
    kappa2: float = 0.96
    prior_window: int = 200
    lag_order: int = 1
    inflation: float = 4.0
    prior_mode: str = "window"   # "window" | "full_sample"
    intercept: bool = True
    psd_tolerance: float = 1e-8  # relative; more negative eigenvalues abort

    def validate(self, n_vars: int) -> None:
        problems = []
        for name in ("kappa1", "kappa2"):
            value = getattr(self, name)
            if not (0.0 < value <= 1.0):
                problems.append(f"{name} must lie in (0, 1], got {value}")
        if self.lag_order < 1:
            problems.append(f"lag_order must be >= 1, got {self.lag_order}")
        if self.prior_mode not in ("window", "full_sample"):
            problems.append(f"prior_mode must be 'window' or 'full_sample', got '{self.prior_mode}'")
        if not (self.inflation == 0 or self.inflation >= 1):
            problems.append(f"inflation must be 0 (no scaling) or >= 1, got {self.inflation}")
        if problems:
            raise ConfigValidationError("; ".join(problems))
        if self.prior_mode == "window" and self.prior_window <= n_vars * self.lag_order + 1:
            raise InsufficientDataError(
                f"prior_window {self.prior_window} must exceed N*p + 1 = {n_vars * self.lag_order + 1}"
            )


def regressor_names(tickers: Sequence[str], p: int, intercept: bool = True) -> List[str]:
    names = ["const"] if intercept else []
    for j in range(1, p + 1):
        names.extend(f"{t}.L{j}" for t in tickers)
    return names


def stack_state(est: VarEstimate) -> np.ndarray:
    """VarEstimate -> (N, K) per-equation coefficient rows."""
    blocks = list(est.coefficients)
    if est.has_intercept:
        blocks.insert(0, est.intercept[:, None])
    return np.hstack(blocks)


def init_prior(panel: ReturnPanel, cfg: TvpConfig) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """OLS prior: (state mean, state covariance, S_0).

    The state covariance is Sigma kron (Z'Z)^-1 times the inflation factor;
    an inflation of 0 leaves the OLS covariance unscaled.
    """
    cfg.validate(panel.n_vars)
    p = cfg.lag_order
    if cfg.prior_mode == "window":
        if panel.n_obs < p + cfg.prior_window:
            raise InsufficientDataError(
                f"prior window needs {p + cfg.prior_window} rows, panel has {panel.n_obs}"
            )
        sample = panel.rows(0, p + cfg.prior_window)
    else:
        sample = panel
    est = fit_var(sample, p, intercept=cfg.intercept)
    mean = stack_state(est).ravel()
    cov = np.kron(est.resid_cov, est.gram_inv)
    if cfg.inflation:
        cov = cov * cfg.inflation
    cov = 0.5 * (cov + cov.T)
    return mean, cov, est.resid_cov.copy()


def first_path_row(cfg: TvpConfig) -> int:
    """Panel row of the first date on the filtered path."""
    if cfg.prior_mode == "window":
        return cfg.lag_order + cfg.prior_window - 1
    return cfg.lag_order


def _repair_psd(P: np.ndarray, tolerance: float) -> Tuple[np.ndarray, bool]:
    eigenvalues, vectors = np.linalg.eigh(P)
    lowest = eigenvalues[0]
    if lowest >= 0.0:
        return P, False
    scale = max(1.0, float(np.max(np.abs(eigenvalues))))
    if lowest < -tolerance * scale:
        raise PositiveDefinitenessError(
            f"state covariance lost positive definiteness (min eigenvalue {lowest:.3e})"
        )
    repaired = (vectors * np.clip(eigenvalues, 0.0, None)) @ vectors.T
    return 0.5 * (repaired + repaired.T), True


def kalman_filter(panel: ReturnPanel, cfg: TvpConfig, logger: Optional[RunLogger] = None) -> TvpPath:
    """Forward pass; returns filtered coefficient, S_t and state-covariance paths.

    Window prior: the first row is the prior itself, dated on the last prior
    row, followed by T - p - prior_window filtered dates. Full-sample prior:
    every date from p on is filtered.
    """
    log = logger or library_logger("spillover.tvp")
    mean, P, S = init_prior(panel, cfg)
    y = panel.values
    n_rows, n = y.shape
    p = cfg.lag_order
    k = n * p + (1 if cfg.intercept else 0)
    identity = np.eye(n * k)

    if cfg.prior_mode == "window":
        anchor = first_path_row(cfg)
        filter_rows = range(anchor + 1, n_rows)
        dates = [panel.dates[anchor]]
        coeffs = [mean.reshape(n, k).copy()]
        resid_cov = [S.copy()]
        state_cov = [P.copy()]
        innovations = [np.zeros(n)]
    else:
        filter_rows = range(first_path_row(cfg), n_rows)
        dates, coeffs, resid_cov, state_cov, innovations = [], [], [], [], []

    repairs = 0
    log.progress("TVP filter", 0, len(filter_rows))
    for step, t in enumerate(filter_rows, start=1):
        log.progress("TVP filter", step, len(filter_rows))
        regressors = [y[t - j] for j in range(1, p + 1)]
        if cfg.intercept:
            regressors.insert(0, np.ones(1))
        z = np.concatenate(regressors)
        Z = np.kron(np.eye(n), z[None, :])

        P = P / cfg.kappa1
        e = y[t] - Z @ mean
        if not np.all(np.isfinite(e)):
            raise DataFaultError(f"non-finite innovation at {panel.dates[t]}")
        S = cfg.kappa2 * S + (1.0 - cfg.kappa2) * np.outer(e, e)
        S = 0.5 * (S + S.T)

        ZP = Z @ P
        F = ZP @ Z.T + S
        try:
            gain = np.linalg.solve(F, ZP).T
        except np.linalg.LinAlgError:
            raise SingularMatrixError(f"forecast-error covariance singular at {panel.dates[t]}")

        mean = mean + gain @ e
        A = identity - gain @ Z
        P = A @ P @ A.T + gain @ S @ gain.T
        P = 0.5 * (P + P.T)
        try:
            P, repaired = _repair_psd(P, cfg.psd_tolerance)
        except PositiveDefinitenessError as e:
            log.error(f"Filter aborted at {panel.dates[t]}: {e}")
            raise
        if repaired:
            repairs += 1
            log.debug(f"PSD repair of the state covariance at {panel.dates[t]}")

        dates.append(panel.dates[t])
        coeffs.append(mean.reshape(n, k).copy())
        resid_cov.append(S.copy())
        state_cov.append(P.copy())
        innovations.append(e)

    if not dates:
        raise InsufficientDataError("no dates left to filter after the prior")

    settings = asdict(cfg)
    log.info(f"TVP filter: {len(dates)} dates ({dates[0]} .. {dates[-1]}), {repairs} PSD repair(s)")
    return TvpPath(
        tickers=panel.tickers,
        dates=tuple(dates),
        lag_order=p,
        coeffs=np.array(coeffs),
        resid_cov=np.array(resid_cov),
        state_cov=np.array(state_cov),
        innovations=np.array(innovations),
        settings=settings,
        psd_repairs=repairs,
    )


def snapshot(path: TvpPath, t: int) -> VarEstimate:
    """VAR view of the filtered state at position t (negative counts from the end)."""
    size = len(path)
    if not -size <= t < size:
        raise IndexError(f"snapshot index {t} out of range for a path of {size} dates")
    t = t % size
    n = len(path.tickers)
    p = path.lag_order
    intercept = bool(path.settings.get("intercept", True))
    rows = path.coeffs[t]
    offset = 1 if intercept else 0
    phi = np.stack([rows[:, offset + j * n: offset + (j + 1) * n] for j in range(p)])
    return VarEstimate(
        tickers=path.tickers,
        lag_order=p,
        coefficients=phi,
        intercept=rows[:, 0].copy() if intercept else np.zeros(n),
        resid_cov=path.resid_cov[t],
        nobs=t + 1,
        has_intercept=intercept,
        spectral_radius=spectral_radius(phi),
        stable=spectral_radius(phi) < 1.0,
        as_of=path.dates[t],
        lag_selection="tvp",
    )


def path_to_csv(path: TvpPath) -> str:
    """One row per date: flattened state, then the lower triangle of S_t."""
    n = len(path.tickers)
    intercept = bool(path.settings.get("intercept", True))
    names = regressor_names(path.tickers, path.lag_order, intercept)
    columns = ["date"]
    for ticker in path.tickers:
        columns.extend(f"{ticker}:{name}" for name in names)
    lower = [(a, b) for a in range(n) for b in range(a + 1)]
    columns.extend(f"S:{path.tickers[a]}:{path.tickers[b]}" for a, b in lower)

    lines = ["# tvp_path v1"]
    lines.extend(f"# {key}: {value}" for key, value in path.settings.items())
    lines.append(f"# psd_repairs: {path.psd_repairs}")
    lines.append(",".join(columns))
    for t, day in enumerate(path.dates):
        cells = [day.isoformat() if hasattr(day, "isoformat") else str(day)]
        cells.extend(format_sig(v, PATH_DIGITS) for v in path.coeffs[t].ravel())
        cells.extend(format_sig(path.resid_cov[t][a, b], PATH_DIGITS) for a, b in lower)
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"
