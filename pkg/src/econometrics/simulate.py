#!/usr/bin/env python3
"""
Seeded VAR Simulation and Fixtures
==================================

Data-generating processes for estimator checks and the bundled price
fixture: six coupled market-like columns on a business-day calendar plus
one high-volatility, weakly coupled column traded seven days a week.
"""

import pathlib
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from core.errors import ConfigValidationError
from econometrics.var import spectral_radius
from utils.file_utils import write_text_file
from utils.logger import RunLogger, library_logger
from utils.serialization import dumps

RngLike = Union[int, np.random.Generator, None]

FIXTURE_TICKERS = ("EWZ", "INDA", "EZA", "MCHI", "ERUS", "VIX", "BTC")
FIXTURE_START = "2015-01-06"
FIXTURE_BREAK = "2020-02-20"
WEEKEND_TICKERS = ("BTC",)

# Common-factor loadings; correlation of innovations i != j is b_i * b_j
_LOADINGS = np.array([0.70, 0.70, 0.75, 0.65, 0.60, -0.60, 0.07])
_SCALES = np.array([0.0181, 0.0143, 0.0151, 0.0184, 0.0231, 0.0228, 0.0350])
_DRIFTS = np.array([0.0001, 0.0003, 0.0001, 0.0000, -0.0002, -0.0001, 0.0020])
_START_PRICES = np.array([38.0, 30.0, 55.0, 47.0, 19.0, 17.0, 280.0])


def _rng(seed: RngLike) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def simulate_var(
    coefficients: np.ndarray,
    sigma: np.ndarray,
    n_obs: int,
    seed: RngLike = None,
    intercept: Optional[np.ndarray] = None,
    burn_in: int = 200,
    break_at: Optional[int] = None,
    coefficients_after: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Draw n_obs rows of y_t = c + sum_j Phi_j y_{t-j} + e_t, e_t ~ N(0, sigma).

    With ``break_at`` the coefficients switch to ``coefficients_after`` from
    that returned row onwards.
    """
    rng = _rng(seed)
    coefficients = np.asarray(coefficients, dtype=float)
    if coefficients.ndim == 2:
        coefficients = coefficients[None]
    p, n, _ = coefficients.shape
    c = np.zeros(n) if intercept is None else np.asarray(intercept, dtype=float)
    chol = np.linalg.cholesky(np.asarray(sigma, dtype=float))
    total = burn_in + n_obs
    shocks = rng.standard_normal((total, n)) @ chol.T

    later = coefficients if coefficients_after is None else np.asarray(coefficients_after, dtype=float).reshape(p, n, n)
    switch = total if break_at is None else burn_in + break_at

    y = np.zeros((total + p, n))
    for t in range(total):
        phi = coefficients if t < switch else later
        row = c + shocks[t]
        for j in range(p):
            row = row + phi[j] @ y[t + p - 1 - j]
        y[t + p] = row
    return y[p + burn_in:]


def random_stable_var(
    n_vars: int, p: int, seed: RngLike = None, max_radius: float = 0.9
) -> Tuple[np.ndarray, np.ndarray]:
    """Random (Phi, Sigma) with companion spectral radius <= max_radius and dense Sigma."""
    rng = _rng(seed)
    coefficients = rng.normal(scale=0.4 / np.sqrt(n_vars * p), size=(p, n_vars, n_vars))
    radius = spectral_radius(coefficients)
    if radius > max_radius:
        # Phi_j -> a^j Phi_j scales every companion eigenvalue by a
        a = max_radius / radius
        coefficients = np.stack([coefficients[j] * a ** (j + 1) for j in range(p)])
    mixing = rng.normal(size=(n_vars, n_vars))
    sigma = mixing @ mixing.T / n_vars + 0.1 * np.eye(n_vars)
    return coefficients, sigma


def fixture_system(tickers: Sequence[str] = FIXTURE_TICKERS) -> Tuple[np.ndarray, np.ndarray]:
    """Standardized VAR(1) behind the price fixture, restricted to ``tickers``."""
    unknown = [t for t in tickers if t not in FIXTURE_TICKERS]
    if unknown:
        raise ConfigValidationError(f"unknown fixture tickers {unknown}; choose from {FIXTURE_TICKERS}")
    n = len(FIXTURE_TICKERS)
    phi = np.zeros((n, n))
    equities = range(5)
    for i in equities:
        phi[i, i] = 0.05
        if i != 2:
            phi[i, 2] = 0.08   # EZA leads the other markets
    phi[6, :6] = 0.05          # BTC absorbs lagged moves of everything else

    corr = np.outer(_LOADINGS, _LOADINGS)
    np.fill_diagonal(corr, 1.0)

    idx = [FIXTURE_TICKERS.index(t) for t in tickers]
    return phi[np.ix_(idx, idx)], corr[np.ix_(idx, idx)]


def _calendar(n_rows: int) -> Tuple[pd.DatetimeIndex, pd.DatetimeIndex]:
    business = pd.bdate_range(start=FIXTURE_START, periods=n_rows)
    every_day = pd.date_range(start=business[0], end=business[-1], freq="D")
    return business, every_day


def generate_fixture(
    out_dir: Union[str, pathlib.Path],
    seed: int = 42,
    n_obs: int = 2100,
    tickers: Sequence[str] = FIXTURE_TICKERS,
    logger: Optional[RunLogger] = None,
) -> pathlib.Path:
    """Write one price CSV per ticker plus config.json; returns the config path."""
    log = logger or library_logger("spillover.simulate")
    out_dir = pathlib.Path(out_dir)
    rng = np.random.default_rng(seed)
    phi, corr = fixture_system(tickers)
    idx = [FIXTURE_TICKERS.index(t) for t in tickers]

    standardized = simulate_var(phi, corr, n_obs, seed=rng)
    returns = standardized * _SCALES[idx] + _DRIFTS[idx]
    levels = _START_PRICES[idx] * np.exp(np.vstack([np.zeros(len(idx)), np.cumsum(returns, axis=0)]))

    business, every_day = _calendar(n_obs + 1)
    series: List[Dict[str, str]] = []
    for k, ticker in enumerate(tickers):
        prices = pd.Series(levels[:, k], index=business)
        if ticker in WEEKEND_TICKERS:
            # weekend quotes drift off the last business close; alignment drops them
            prices = prices.reindex(every_day).ffill()
            weekend = prices.index.dayofweek >= 5
            prices[weekend] = prices[weekend] * np.exp(rng.normal(scale=0.01, size=int(weekend.sum())))
        frame = pd.DataFrame({"date": prices.index.strftime("%Y-%m-%d"), "close": prices.to_numpy()})
        path = write_text_file(out_dir / f"{ticker}.csv", frame.to_csv(index=False, float_format="%.6f", lineterminator="\n"))
        series.append({"ticker": ticker, "path": path.name})
        log.debug(f"Fixture {ticker}: {len(frame)} rows -> {path}")

    break_day = pd.Timestamp(FIXTURE_BREAK)
    if not business[0] < break_day <= business[-1]:
        break_day = business[len(business) // 2]

    config = {
        "series": series,
        "start_date": business[0].strftime("%Y-%m-%d"),
        "end_date": business[-1].strftime("%Y-%m-%d"),
        "break_dates": [break_day.strftime("%Y-%m-%d")],
        "lag": "auto",
        "p_max": 5,
        "horizon": 10,
        "seed": seed,
    }
    config_path = write_text_file(out_dir / "config.json", dumps(config))
    log.info(f"Fixture with {len(tickers)} series x {n_obs + 1} business days written to {out_dir}")
    return config_path
