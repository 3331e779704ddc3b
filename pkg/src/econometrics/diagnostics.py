#!/usr/bin/env python3
"""
Pre-estimation Diagnostics
==========================

Descriptive statistics with Jarque-Bera and Ljung-Box Q² columns, the
augmented Dickey-Fuller unit-root test and the Chow break test.

Distribution tails come from scipy.stats; ADF lag search and MacKinnon
p-values and the Ljung-Box statistic come from statsmodels.
"""

import bisect
import math
from datetime import date
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy import stats
from statsmodels.stats.diagnostic import acorr_ljungbox
from statsmodels.tsa.stattools import adfuller

from core.errors import DegenerateInputError, InsufficientDataError, SingularMatrixError
from core.structures import AdfResult, ChowResult, DescriptiveStats, DeterministicSpec

MIN_DESCRIBE_LENGTH = 8

_ADF_REGRESSION = {
    DeterministicSpec.CONSTANT.value: "c",
    DeterministicSpec.CONSTANT_TREND.value: "ct",
    DeterministicSpec.NONE.value: "n",
}

# (threshold, marker), tightest first
_STAR_LEVELS = ((0.005, "***"), (0.01, "**"), (0.05, "*"), (0.1, "."))


def _as_vector(series: Union[Sequence[float], np.ndarray], name: str = "series") -> np.ndarray:
    x = np.asarray(series, dtype=float).ravel()
    if not np.all(np.isfinite(x)):
        raise DegenerateInputError(f"{name} contains non-finite values")
    return x


def significance_stars(pvalue: Optional[float]) -> str:
    """`.` <= 0.1, `*` <= 0.05, `**` <= 0.01, `***` <= 0.005."""
    if pvalue is None or math.isnan(pvalue):
        return ""
    for threshold, marker in _STAR_LEVELS:
        if pvalue <= threshold:
            return marker
    return ""


def ljung_box(series: Union[Sequence[float], np.ndarray], lags: int, on_squares: bool = False) -> Tuple[float, float]:
    """Ljung-Box Q at ``lags`` with chi²(lags) p-value.

    With ``on_squares`` the series is demeaned and squared first. A series
    with no variation left after that has no measurable autocorrelation and
    scores (0.0, 1.0).
    """
    x = _as_vector(series)
    if lags < 1:
        raise InsufficientDataError(f"lags must be >= 1, got {lags}")
    if len(x) <= lags + 1:
        raise InsufficientDataError(f"Ljung-Box at {lags} lags needs more than {lags + 1} observations, got {len(x)}")
    y = (x - x.mean()) ** 2 if on_squares else x
    if np.ptp(y) == 0.0:
        return 0.0, 1.0
    table = acorr_ljungbox(y, lags=[lags], return_df=True)
    return float(table["lb_stat"].iloc[0]), float(table["lb_pvalue"].iloc[0])


def describe(series: Union[Sequence[float], np.ndarray], q2_lags: int = 20) -> DescriptiveStats:
    """Moments, Jarque-Bera and Q² on one return column.

    Skewness and kurtosis are the moment (biased) estimators; kurtosis is
    reported in excess of 3. Q² uses min(q2_lags, T - 2) lags on short input.
    """
    x = _as_vector(series)
    n = len(x)
    if n < MIN_DESCRIBE_LENGTH:
        raise InsufficientDataError(f"describe needs at least {MIN_DESCRIBE_LENGTH} observations, got {n}")
    sd = float(np.std(x, ddof=1))
    if sd == 0.0:
        raise DegenerateInputError("constant series: standard deviation is zero")

    skewness = float(stats.skew(x, bias=True))
    excess_kurtosis = float(stats.kurtosis(x, fisher=True, bias=True))
    jb = stats.jarque_bera(x)
    lags = min(q2_lags, n - 2)
    q2_stat, q2_pvalue = ljung_box(x, lags, on_squares=True)

    return DescriptiveStats(
        n_obs=n,
        mean=float(np.mean(x)),
        median=float(np.median(x)),
        sd=sd,
        skewness=skewness,
        excess_kurtosis=excess_kurtosis,
        jb_stat=float(jb.statistic),
        jb_pvalue=float(jb.pvalue),
        q2_stat=q2_stat,
        q2_lags=lags,
        q2_pvalue=q2_pvalue,
    )


def auto_adf_max_lag(n_obs: int) -> int:
    """Schwert rule floor(12 * (T/100)^0.25)."""
    return int(math.floor(12.0 * (n_obs / 100.0) ** 0.25))


def adf_test(
    series: Union[Sequence[float], np.ndarray],
    max_lag: Union[int, str, None] = "auto",
    spec: Union[str, DeterministicSpec] = DeterministicSpec.CONSTANT,
) -> AdfResult:
    """ADF t-test with AIC lag choice over 0..max_lag and MacKinnon p-value."""
    x = _as_vector(series)
    spec = DeterministicSpec(spec).value
    n = len(x)
    if max_lag is None or max_lag == "auto":
        max_lag = auto_adf_max_lag(n)
    max_lag = int(max_lag)
    if max_lag < 0 or n <= max_lag + 2:
        raise InsufficientDataError(f"ADF with max_lag={max_lag} needs more than {max_lag + 2} observations, got {n}")
    if np.ptp(x) == 0.0:
        raise DegenerateInputError("constant series: ADF regressor matrix is singular")

    try:
        statistic, pvalue, used_lag, nobs, critical, _ = adfuller(
            x, maxlag=max_lag, regression=_ADF_REGRESSION[spec], autolag="AIC"
        )
    except ValueError as e:
        raise InsufficientDataError(f"ADF regression not estimable: {e}")
    except np.linalg.LinAlgError as e:
        raise SingularMatrixError(f"ADF regression singular: {e}")

    return AdfResult(
        statistic=float(statistic),
        chosen_lag=int(used_lag),
        max_lag=max_lag,
        pvalue=float(pvalue),
        deterministic_spec=spec,
        n_obs=int(nobs),
        critical_values={k: float(v) for k, v in critical.items()},
    )


def _ssr(y: np.ndarray, X: np.ndarray) -> float:
    beta = np.linalg.lstsq(X, y, rcond=None)[0]
    resid = y - X @ beta
    return float(resid @ resid)


def chow_test(y: Union[Sequence[float], np.ndarray], X: np.ndarray, break_index: int) -> ChowResult:
    """Classic Chow F for a coefficient break at ``break_index``.

    Rows [0, break_index) form the first sub-sample and [break_index, T)
    the second; each needs more rows than regressors.
    """
    y = _as_vector(y, "y")
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, k = X.shape
    if len(y) != n:
        raise InsufficientDataError(f"y has {len(y)} rows but X has {n}")
    if break_index <= k or n - break_index <= k:
        raise InsufficientDataError(
            f"break_index {break_index} leaves a sub-sample with no more rows than the {k} regressors (T={n})"
        )
    if np.linalg.matrix_rank(X) < k:
        raise SingularMatrixError("Chow regressor matrix is rank deficient")

    ssr_pooled = _ssr(y, X)
    ssr_1 = _ssr(y[:break_index], X[:break_index])
    ssr_2 = _ssr(y[break_index:], X[break_index:])
    df_den = n - 2 * k
    unrestricted = ssr_1 + ssr_2
    if unrestricted <= 0.0:
        raise DegenerateInputError("sub-sample regressions fit exactly; Chow F undefined")
    f_stat = max(0.0, ((ssr_pooled - unrestricted) / k) / (unrestricted / df_den))
    return ChowResult(
        f_stat=float(f_stat),
        df_num=k,
        df_den=df_den,
        pvalue=float(stats.f.sf(f_stat, k, df_den)),
        break_index=break_index,
    )


def break_in_range(dates: Sequence[date], break_date: date) -> bool:
    """A usable break opens a non-empty later segment: dates[0] < break <= dates[-1]."""
    return bool(dates) and dates[0] < break_date <= dates[-1]


def ar1_chow(series: Union[Sequence[float], np.ndarray], dates: Sequence[date], break_date: date) -> ChowResult:
    """Chow test of an AR(1)-with-constant regression at a calendar break."""
    x = _as_vector(series)
    position = bisect.bisect_left(list(dates), break_date)
    y = x[1:]
    X = np.column_stack([np.ones(len(y)), x[:-1]])
    result = chow_test(y, X, position - 1)
    result.break_date = break_date
    result.break_index = position
    return result
