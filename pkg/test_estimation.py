#!/usr/bin/env python3
"""
SpilloverScope - Estimation Tests
=================================

Static VAR (OLS, lag selection, MA recursion, snapshots) and the
forgetting-factor TVP-VAR filter against known data-generating processes.
Run: python test_estimation.py [test_name] [--verbose]
"""

import numpy as np
import pandas as pd
from statsmodels.tsa.api import VAR

from testkit import run_module, time_budget

from core.errors import (
    ConfigValidationError,
    InsufficientDataError,
    PositiveDefinitenessError,
    SingularMatrixError,
)
from core.structures import ReturnPanel
from econometrics.connectedness import static_report
from econometrics.simulate import random_stable_var, simulate_var
from econometrics.tvp import (
    TvpConfig,
    _repair_psd,
    init_prior,
    kalman_filter,
    path_to_csv,
    regressor_names,
    snapshot,
)
from econometrics.var import (
    build_lagged,
    companion_matrix,
    fit_var,
    lag_criteria,
    ma_coefficients,
    read_var_snapshot,
    select_lag,
    spectral_radius,
    write_var_snapshot,
)

PHI = np.array([[0.5, 0.1], [0.0, 0.3]])


def _panel(values: np.ndarray, tickers=None) -> ReturnPanel:
    values = np.asarray(values, dtype=float)
    n_rows, n_cols = values.shape
    tickers = tuple(tickers or [f"x{k + 1}" for k in range(n_cols)])
    dates = tuple(d.date() for d in pd.bdate_range("2000-01-03", periods=n_rows))
    return ReturnPanel(tickers=tickers, dates=dates, values=values, transform_tags=("log_diff",) * n_cols)


# =========================================================================
# Static VAR
# =========================================================================

def test_fit_var_recovers_known_coefficients():
    y = simulate_var(PHI, np.eye(2), 20_000, seed=1)
    est = fit_var(_panel(y), 1)
    assert est.coefficients.shape == (1, 2, 2)
    assert np.max(np.abs(est.coefficients[0] - PHI)) < 0.03
    assert np.max(np.abs(est.resid_cov - np.eye(2))) < 0.05
    assert est.nobs == 19_999
    assert est.stable and abs(est.spectral_radius - 0.5) < 0.05
    assert est.gram_inv.shape == (3, 3)


def test_fit_var_white_noise():
    y = np.random.default_rng(2).standard_normal((20_000, 3))
    est = fit_var(_panel(y), 1)
    assert np.max(np.abs(est.coefficients)) < 0.03
    assert np.max(np.abs(est.intercept)) < 0.03


def test_fit_var_without_intercept():
    y = simulate_var(PHI, np.eye(2), 5000, seed=3)
    est = fit_var(_panel(y), 1, intercept=False)
    assert not est.has_intercept
    assert np.all(est.intercept == 0.0)
    assert est.gram_inv.shape == (2, 2)


def test_fit_var_errors():
    try:
        fit_var(_panel(np.random.default_rng(4).standard_normal((5, 2))), 2)
    except InsufficientDataError:
        pass
    else:
        raise AssertionError("too few rows accepted")

    x = np.random.default_rng(5).standard_normal(200)
    try:
        fit_var(_panel(np.column_stack([x, 2.0 * x])), 1)
    except SingularMatrixError:
        pass
    else:
        raise AssertionError("collinear columns accepted")

    try:
        fit_var(_panel(np.ones((50, 2))), 0)
    except ConfigValidationError:
        pass
    else:
        raise AssertionError("lag 0 accepted")


def test_fit_var_agrees_with_statsmodels():
    phi, sigma = random_stable_var(3, 2, seed=41)
    y = simulate_var(phi, sigma, 1500, seed=42)
    est = fit_var(_panel(y), 2)
    results = VAR(y).fit(maxlags=2, trend="c")
    assert np.allclose(est.coefficients, results.coefs, atol=1e-12)
    assert np.allclose(est.intercept, results.params[0], atol=1e-12)
    assert np.allclose(est.resid_cov, results.sigma_u, atol=1e-12)
    assert abs(est.loglik - results.llf) < 1e-8
    assert np.allclose(ma_coefficients(est, 8).psi, results.ma_rep(7), atol=1e-12)

    phi2 = np.stack([0.2 * np.eye(2), np.array([[0.5, 0.0], [0.1, 0.45]])])
    y2 = simulate_var(phi2, np.eye(2), 3000, seed=43)
    chosen = VAR(y2).select_order(4, trend="c").selected_orders["bic"]
    assert chosen >= 1
    assert int(lag_criteria(_panel(y2), 4)["bic"].idxmin()) == chosen


def test_lag_criteria_common_sample():
    y = simulate_var(PHI, np.eye(2), 800, seed=6)
    criteria = lag_criteria(_panel(y), 4)
    assert list(criteria.index) == [1, 2, 3, 4]
    assert set(criteria["nobs"]) == {796}
    assert int(criteria["bic"].idxmin()) == 1
    assert np.all(np.diff(criteria["loglik"].to_numpy()) > 0)


def test_select_lag_finds_second_order():
    phi = np.stack([0.2 * np.eye(2), np.array([[0.5, 0.0], [0.1, 0.45]])])
    hits = sum(
        select_lag(_panel(simulate_var(phi, np.eye(2), 5000, seed=100 + seed)), 5) == 2
        for seed in range(50)
    )
    assert hits >= 48, f"BIC chose lag 2 in {hits} of 50 runs"


def test_select_lag_white_noise():
    y = np.random.default_rng(7).standard_normal((5000, 3))
    assert select_lag(_panel(y), 5) == 1


def test_companion_and_spectral_radius():
    phi = np.stack([0.5 * np.eye(2), 0.1 * np.eye(2)])
    companion = companion_matrix(phi)
    assert companion.shape == (4, 4)
    assert np.array_equal(companion[2:, :2], np.eye(2))
    # roots of z^2 - 0.5 z - 0.1
    expected = (0.5 + np.sqrt(0.25 + 0.4)) / 2.0
    assert abs(spectral_radius(phi) - expected) < 1e-10


def test_ma_coefficients_closed_form():
    y = simulate_var(0.5 * np.eye(2), np.eye(2), 500, seed=8)
    est = fit_var(_panel(y), 1)
    est.coefficients = np.array([0.5 * np.eye(2)])
    psi = ma_coefficients(est, 3).psi
    assert np.array_equal(psi[0], np.eye(2))
    assert np.allclose(psi[1], 0.5 * np.eye(2), atol=0, rtol=0)
    assert np.allclose(psi[2], 0.25 * np.eye(2), atol=0, rtol=0)


def test_ma_coefficients_match_noise_free_impulses():
    phi, sigma = random_stable_var(3, 2, seed=9)
    est = fit_var(_panel(simulate_var(phi, sigma, 400, seed=10)), 2)
    est.coefficients = phi
    H = 12
    psi = ma_coefficients(est, H).psi
    for j in range(3):
        path = np.zeros((H + 2, 3))
        path[2, j] = 1.0  # two zero pre-sample rows
        for t in range(3, H + 2):
            path[t] = phi[0] @ path[t - 1] + phi[1] @ path[t - 2]
        assert np.max(np.abs(path[2:, :] - psi[:, :, j])) < 1e-10


def test_ols_residuals_orthogonal_to_regressors():
    phi, sigma = random_stable_var(4, 2, seed=51)
    y = simulate_var(phi, sigma, 1200, seed=52)
    for intercept in (True, False):
        est = fit_var(_panel(y), 2, intercept=intercept)
        _, Z = build_lagged(y, 2, intercept)
        scale = np.linalg.norm(Z) * np.linalg.norm(est.residuals)
        assert np.linalg.norm(Z.T @ est.residuals) < 1e-10 * scale


def test_fit_var_permutation_equivariant():
    phi, sigma = random_stable_var(4, 2, seed=53)
    y = simulate_var(phi, sigma, 1500, seed=54)
    base = fit_var(_panel(y), 2)
    for perm in ([2, 0, 3, 1], [3, 2, 1, 0]):
        P = np.eye(4)[perm]
        permuted = fit_var(_panel(y[:, perm]), 2)
        for j in range(2):
            assert np.allclose(permuted.coefficients[j], P @ base.coefficients[j] @ P.T, atol=1e-10)
        assert np.allclose(permuted.resid_cov, P @ base.resid_cov @ P.T, atol=1e-10)
        assert np.allclose(permuted.intercept, P @ base.intercept, atol=1e-12)


def test_ma_coefficients_decay_on_stable_fits():
    H = 10
    for seed, n in enumerate((2, 3, 5, 7)):
        phi, sigma = random_stable_var(n, 1, seed=60 + seed)
        phi = phi * (0.8 / np.linalg.norm(phi[0], 2))  # spectral norm 0.8
        est = fit_var(_panel(simulate_var(phi, sigma, 4000, seed=70 + seed)), 1)
        assert est.stable
        psi = ma_coefficients(est, H).psi
        assert np.linalg.norm(psi[H - 1], 2) < np.linalg.norm(psi[1], 2), seed


def test_var_snapshot_round_trip():
    y = simulate_var(PHI, np.eye(2), 600, seed=11)
    est = fit_var(_panel(y, ["AAA", "BBB"]), 2)
    est.lag_selection = "bic (p_max=5)"
    text = write_var_snapshot(est)
    assert text.startswith("# var_estimate v1\n")
    loaded = read_var_snapshot(text)
    assert loaded.tickers == ("AAA", "BBB")
    assert loaded.lag_order == 2 and loaded.nobs == est.nobs
    assert np.array_equal(loaded.coefficients, est.coefficients)
    assert np.array_equal(loaded.resid_cov, est.resid_cov)
    assert loaded.as_of == est.as_of
    assert loaded.lag_selection == "bic (p_max=5)"
    assert write_var_snapshot(loaded) == text


# =========================================================================
# TVP-VAR
# =========================================================================

def test_tvp_config_validation():
    for bad in (TvpConfig(kappa1=0.0), TvpConfig(kappa2=1.2), TvpConfig(prior_mode="rolling")):
        try:
            bad.validate(2)
        except ConfigValidationError:
            continue
        raise AssertionError(f"accepted {bad}")
    try:
        TvpConfig(prior_window=3, lag_order=1).validate(3)
    except InsufficientDataError:
        pass
    else:
        raise AssertionError("prior window shorter than the regressor count accepted")


def test_prior_mean_near_truth():
    y = simulate_var(PHI, np.eye(2), 3000, seed=12)
    mean, cov, S = init_prior(_panel(y), TvpConfig(prior_window=500))
    coefficients = mean.reshape(2, 3)[:, 1:]
    assert np.max(np.abs(coefficients - PHI)) < 0.15
    assert cov.shape == (6, 6) and np.allclose(cov, cov.T)
    assert np.all(np.linalg.eigvalsh(cov) > 0)
    assert np.all(np.diag(S) > 0)


def test_prior_inflation():
    panel = _panel(simulate_var(PHI, np.eye(2), 1000, seed=13))
    _, base, _ = init_prior(panel, TvpConfig(prior_window=300, inflation=1.0))
    _, inflated, _ = init_prior(panel, TvpConfig(prior_window=300, inflation=4.0))
    _, unscaled, _ = init_prior(panel, TvpConfig(prior_window=300, inflation=0.0))
    assert np.allclose(inflated, 4.0 * base)
    assert np.array_equal(unscaled, base)


def test_prior_inflation_between_zero_and_one_rejected():
    panel = _panel(simulate_var(PHI, np.eye(2), 1000, seed=13))
    for value in (0.5, 0.99, -1.0):
        try:
            init_prior(panel, TvpConfig(prior_window=300, inflation=value))
        except ConfigValidationError as e:
            assert "inflation" in str(e)
            continue
        raise AssertionError(f"inflation {value} accepted")


def test_filter_degenerate_limit_equals_ols():
    panel = _panel(simulate_var(PHI, np.eye(2), 5000, seed=14))
    cfg = TvpConfig(kappa1=1.0, kappa2=1.0, prior_mode="full_sample", inflation=1.0)
    with time_budget(60.0, "degenerate-limit filter"):
        path = kalman_filter(panel, cfg)
        ols = fit_var(panel, 1)
        final = snapshot(path, -1)
        dynamic_tci = static_report(final, 10).tci
        static_tci = static_report(ols, 10).tci
    assert abs(dynamic_tci - static_tci) < 1.0, (dynamic_tci, static_tci)
    assert len(path) == panel.n_obs - 1
    assert np.max(np.abs(final.coefficients - ols.coefficients)) < 0.02
    assert np.max(np.abs(final.intercept - ols.intercept)) < 0.02
    # exact Bayesian update of a prior centered on the same OLS fit
    assert np.max(np.abs(final.coefficients - ols.coefficients)) < 1e-6
    # kappa2 = 1 freezes S_t at S_0
    assert np.array_equal(path.resid_cov, np.broadcast_to(path.resid_cov[0], path.resid_cov.shape))
    assert np.allclose(path.resid_cov[0], ols.resid_cov)


def test_filter_kappa1_one_tracks_ols():
    panel = _panel(simulate_var(PHI, np.eye(2), 5000, seed=15))
    path = kalman_filter(panel, TvpConfig(kappa1=1.0, kappa2=0.96, prior_window=200))
    ols = fit_var(panel, 1)
    assert np.max(np.abs(snapshot(path, -1).coefficients - ols.coefficients)) < 0.02


def test_filter_window_dates():
    panel = _panel(simulate_var(PHI, np.eye(2), 400, seed=16))
    cfg = TvpConfig(prior_window=100, lag_order=2)
    path = kalman_filter(panel, cfg)
    anchor = 2 + 100 - 1
    assert path.dates[0] == panel.dates[anchor]
    assert path.dates[-1] == panel.dates[-1]
    assert len(path) == panel.n_obs - anchor
    assert path.coeffs.shape == (len(path), 2, 5)
    assert path.state_cov.shape == (len(path), 10, 10)
    assert np.all(path.innovations[0] == 0.0)
    assert path.settings["kappa1"] == 0.99 and path.settings["prior_window"] == 100


def test_filter_tracks_coefficient_break():
    before = np.array([[0.2, 0.0], [0.1, 0.3]])
    after = np.array([[0.7, 0.0], [0.1, 0.3]])
    n_obs, break_at, window = 1000, 500, 200
    cfg = TvpConfig(kappa1=0.96, kappa2=0.96, prior_window=window)
    for seed in range(5):
        y = simulate_var(before, np.eye(2), n_obs, seed=200 + seed, break_at=break_at, coefficients_after=after)
        path = kalman_filter(_panel(y), cfg)
        first = break_at - window  # path position of panel row break_at (window prior, p = 1)
        own_lag = path.coeffs[first:first + 201, 0, 1]
        assert np.min(np.abs(own_lag - 0.7)) < 0.1, f"seed {seed}: closest {own_lag[np.argmin(np.abs(own_lag - 0.7))]:.3f}"
        assert np.mean(path.coeffs[first - 100:first, 0, 1]) < 0.45


def test_snapshot_indexing():
    panel = _panel(simulate_var(PHI, np.eye(2), 300, seed=17), ["AAA", "BBB"])
    path = kalman_filter(panel, TvpConfig(prior_window=100))
    last = snapshot(path, -1)
    assert last.as_of == path.dates[-1]
    assert last.lag_selection == "tvp"
    assert np.array_equal(last.coefficients[0], path.coeffs[-1][:, 1:])
    assert np.array_equal(snapshot(path, 0).resid_cov, path.resid_cov[0])
    for bad in (len(path), -len(path) - 1):
        try:
            snapshot(path, bad)
        except IndexError:
            continue
        raise AssertionError(f"index {bad} accepted")


def test_path_csv_layout():
    panel = _panel(simulate_var(PHI, np.eye(2), 260, seed=18), ["AAA", "BBB"])
    path = kalman_filter(panel, TvpConfig(prior_window=100))
    lines = path_to_csv(path).splitlines()
    assert lines[0] == "# tvp_path v1"
    header = next(line for line in lines if line.startswith("date,"))
    assert header.split(",")[1:4] == ["AAA:const", "AAA:AAA.L1", "AAA:BBB.L1"]
    assert header.split(",")[-3:] == ["S:AAA:AAA", "S:BBB:AAA", "S:BBB:BBB"]
    data_rows = [line for line in lines if line[:1].isdigit()]
    assert len(data_rows) == len(path)
    assert regressor_names(["A", "B"], 2, intercept=False) == ["A.L1", "B.L1", "A.L2", "B.L2"]


def test_psd_repair():
    vectors = np.linalg.qr(np.random.default_rng(19).standard_normal((3, 3)))[0]
    slightly = vectors @ np.diag([-1e-12, 1.0, 2.0]) @ vectors.T
    repaired, changed = _repair_psd(slightly, 1e-8)
    assert changed and np.min(np.linalg.eigvalsh(repaired)) >= -1e-12
    untouched, changed = _repair_psd(np.eye(3), 1e-8)
    assert not changed and untouched is not None
    badly = vectors @ np.diag([-0.5, 1.0, 2.0]) @ vectors.T
    try:
        _repair_psd(badly, 1e-8)
    except PositiveDefinitenessError:
        pass
    else:
        raise AssertionError("indefinite covariance repaired silently")


if __name__ == "__main__":
    run_module(globals())
