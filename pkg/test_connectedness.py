#!/usr/bin/env python3
"""
SpilloverScope - Connectedness and Network Tests
================================================

Generalized FEVD (closed forms and a simulation oracle), the index
arithmetic, per-date connectedness, table rendering and network export.
Run: python test_connectedness.py [test_name] [--verbose]
"""

import io
import json
from pathlib import Path

import networkx as nx
import numpy as np
import pandas as pd
from networkx.readwrite import json_graph

from testkit import run_module, time_budget

from core.errors import DataFaultError, NumericalFailureError
from core.structures import FevdTable, SpilloverNetwork, TvpPath, VarEstimate
from econometrics.connectedness import (
    average_report,
    dynamic_indices,
    gfevd,
    indices,
    report_from_json,
    report_from_shares,
    report_to_json,
    static_report,
)
from econometrics.network import build_network, emit_dot, emit_json, parse_json
from econometrics.reporting import (
    render_comparison_csv,
    render_comparison_text,
    render_connectedness_csv,
    render_connectedness_text,
    render_pairwise_csv,
)
from econometrics.simulate import random_stable_var, simulate_var
from econometrics.tvp import TvpConfig, kalman_filter
from econometrics.var import fit_var

from test_estimation import _panel


def _estimate(phi: np.ndarray, sigma: np.ndarray, tickers=None) -> VarEstimate:
    phi = np.asarray(phi, dtype=float)
    if phi.ndim == 2:
        phi = phi[None]
    n = phi.shape[1]
    return VarEstimate(
        tickers=tuple(tickers or [f"x{k + 1}" for k in range(n)]),
        lag_order=phi.shape[0],
        coefficients=phi,
        intercept=np.zeros(n),
        resid_cov=np.asarray(sigma, dtype=float),
        nobs=1000,
    )


def _path(phi: np.ndarray, sigmas, tickers=("AAA", "BBB")) -> TvpPath:
    n = phi.shape[0]
    coeffs = np.hstack([np.zeros((n, 1)), phi])
    size = len(sigmas)
    return TvpPath(
        tickers=tuple(tickers),
        dates=tuple(d.date() for d in pd.bdate_range("2021-01-04", periods=size)),
        lag_order=1,
        coeffs=np.repeat(coeffs[None], size, axis=0),
        resid_cov=np.array(sigmas, dtype=float),
        state_cov=np.zeros((size, n * (n + 1), n * (n + 1))),
        innovations=np.zeros((size, n)),
        settings={"intercept": True},
    )


def _random_shares(n: int, seed: int) -> np.ndarray:
    raw = np.random.default_rng(seed).uniform(size=(n, n)) + np.eye(n)
    return raw / raw.sum(axis=1, keepdims=True)


# =========================================================================
# Generalized FEVD
# =========================================================================

def test_gfevd_uncorrelated_static_system_is_identity():
    table = gfevd(_estimate(np.zeros((3, 3)), np.diag([1.0, 2.0, 0.5])), 10)
    assert np.allclose(table.normalized, np.eye(3), atol=1e-15)


def test_gfevd_horizon_one_depends_on_sigma_only():
    phi, sigma = random_stable_var(3, 1, seed=21)
    table = gfevd(_estimate(phi, sigma), 1)
    variances = np.diag(sigma)
    expected = sigma ** 2 / np.outer(variances, variances)
    assert np.allclose(table.raw, expected, rtol=1e-12, atol=0)
    assert np.allclose(table.normalized.sum(axis=1), 1.0, atol=1e-10)


def _assert_index_identities(report, shares) -> None:
    n = shares.shape[0]
    assert abs(report.net.sum()) < 1e-8
    assert abs(report.tci - report.receiver.mean()) < 1e-8
    assert abs(report.tci - report.giver.mean()) < 1e-8
    assert np.allclose(report.inc_own, report.giver + 100.0 * np.diag(shares), atol=1e-8)
    assert np.array_equal(report.npdc, -report.npdc.T)
    assert np.all((report.pci >= 0.0) & (report.pci <= 1.0))
    assert np.all(np.abs(report.pii) <= 1.0)
    assert 0.0 <= report.tci <= 100.0 * (n - 1) / n + 1e-9


def test_gfevd_normalization_on_random_stable_systems():
    with time_budget(10.0, "100 random decompositions"):
        for seed in range(100):
            n = 2 + seed % 6
            p = 1 + (seed // 6) % 2
            H = (1, 5, 10)[seed % 3]
            phi, sigma = random_stable_var(n, p, seed=1000 + seed)
            table = gfevd(_estimate(phi, sigma), H)
            assert np.allclose(table.normalized.sum(axis=1), 1.0, atol=1e-10), seed
            assert np.all(table.normalized >= 0.0) and np.all(table.raw >= 0.0), seed
            _assert_index_identities(indices(table), table.normalized)


def test_gfevd_matches_simulated_generalized_impulses():
    n_paths, H = 200_000, 10
    with time_budget(120.0, "simulation oracle"):
        for seed in (31, 32, 33):
            phi, sigma = random_stable_var(3, 1, seed=seed)
            table = gfevd(_estimate(phi, sigma), H)

            rng = np.random.default_rng(seed)
            shocks = rng.multivariate_normal(np.zeros(3), sigma, size=(n_paths, H))
            y = np.zeros((n_paths, 3))
            for h in range(H):
                y = y @ phi[0].T + shocks[:, h, :]
            # share of the H-step forecast error variance explained by shock j's path
            raw = np.empty((3, 3))
            for j in range(3):
                design = shocks[:, :, j]
                for i in range(3):
                    beta = np.linalg.lstsq(design, y[:, i], rcond=None)[0]
                    raw[i, j] = 1.0 - np.var(y[:, i] - design @ beta) / np.var(y[:, i])
            simulated = raw / raw.sum(axis=1, keepdims=True)
            assert np.max(np.abs(raw - table.raw)) < 0.01, f"seed {seed}"
            assert np.max(np.abs(simulated - table.normalized)) < 0.01, f"seed {seed}"
            _assert_index_identities(indices(table), table.normalized)


def test_gfevd_permutation_equivariance():
    tickers = ["A", "B", "C", "D", "E"]
    for system in range(5):
        n = 3 + system % 3
        phi, sigma = random_stable_var(n, 1 + system % 2, seed=41 + system)
        names = tickers[:n]
        base = static_report(_estimate(phi, sigma, names), 10)
        rng = np.random.default_rng(400 + system)
        for _ in range(10):
            order = list(rng.permutation(n))
            permuted = static_report(
                _estimate(phi[:, order][:, :, order], sigma[np.ix_(order, order)], [names[k] for k in order]), 10
            )
            assert abs(base.tci - permuted.tci) < 1e-12
            assert np.allclose(permuted.shares, base.shares[np.ix_(order, order)], atol=1e-12)
            assert np.allclose(permuted.net, base.net[order], atol=1e-10)
            assert np.allclose(permuted.npdc, base.npdc[np.ix_(order, order)], atol=1e-10)
            assert np.allclose(permuted.pci, base.pci[np.ix_(order, order)], atol=1e-12)
            assert np.array_equal(permuted.npt, base.npt[order])


def test_gfevd_rejects_degenerate_covariance():
    try:
        gfevd(_estimate(np.zeros((2, 2)), np.diag([1.0, 0.0])), 5)
    except NumericalFailureError:
        pass
    else:
        raise AssertionError("zero variance accepted")


# =========================================================================
# Indices
# =========================================================================

def test_indices_identity():
    report = indices(FevdTable(horizon=10, raw=np.eye(4), normalized=np.eye(4)))
    assert report.tci == 0.0
    assert np.all(report.net == 0.0) and np.all(report.npt == 0)
    assert np.allclose(np.diag(report.pci), 0.5)
    assert report.tickers == ("x1", "x2", "x3", "x4")


def test_indices_symmetric_shares():
    base = _random_shares(4, 51)
    sym = (base + base.T) / 2.0
    sym = sym / sym.sum(axis=1, keepdims=True)
    sym = (sym + sym.T) / 2.0  # exactly symmetric; rows no longer matter here
    report = report_from_shares(sym, ["a", "b", "c", "d"], 10)
    assert np.all(report.npdc == 0.0)
    assert np.all(report.pii == 0.0)
    assert np.allclose(report.net, 0.0, atol=1e-12)


def test_indices_invariants():
    l = _random_shares(6, 52)
    report = report_from_shares(l, list("abcdef"), 10, label="x")
    n = 6
    assert abs(report.net.sum()) < 1e-8
    assert abs(report.tci - report.receiver.mean()) < 1e-8
    assert abs(report.tci - report.giver.mean()) < 1e-8
    assert np.allclose(report.inc_own, report.giver + 100.0 * np.diag(l), atol=1e-8)
    assert np.allclose(report.receiver, 100.0 - 100.0 * np.diag(l), atol=1e-8)
    assert np.array_equal(report.npdc + report.npdc.T, np.zeros((n, n)))
    assert np.allclose(report.pii, -report.pii.T) and np.allclose(report.pci, report.pci.T)
    assert 0.0 <= report.tci <= 100.0 * (n - 1) / n
    assert np.all((report.pci >= 0.0) & (report.pci <= 1.0))
    assert np.all(np.abs(report.pii) <= 1.0)
    assert np.array_equal(report.npt, (report.npdc > 0).sum(axis=1))
    assert np.array_equal(report.npdc_formula_literal(), 100.0 * (l - l.T))
    assert report.givers == [t for t, v in zip(report.tickers, report.net) if v > 0]


def test_indices_two_variable_example():
    l = np.array([[0.7, 0.3], [0.1, 0.9]])
    report = report_from_shares(l, ["x1", "x2"], 10)
    assert np.isclose(report.npdc[1, 0], 20.0) and np.isclose(report.npdc[0, 1], -20.0)
    assert np.allclose(report.net, [-20.0, 20.0])
    assert report.givers == ["x2"] and report.receivers == ["x1"]
    assert np.isclose(report.tci, 20.0)
    assert np.isclose(report.pii[0, 1], 0.5)


# =========================================================================
# Dynamic connectedness
# =========================================================================

def test_dynamic_single_date():
    sigma = np.array([[1.0, 0.4], [0.4, 2.0]])
    phi = np.array([[0.3, 0.1], [0.0, 0.2]])
    dynamic = dynamic_indices(_path(phi, [sigma]), 10)
    assert len(dynamic.reports) == 1
    assert np.allclose(dynamic.average.shares, dynamic.reports[0].shares)
    assert dynamic.average.tci == dynamic.reports[0].tci
    assert dynamic.reports[0].label == dynamic.dates[0].isoformat()


def test_dynamic_failures_skipped_then_abort():
    good = np.array([[1.0, 0.2], [0.2, 1.0]])
    bad = np.array([[0.0, 0.0], [0.0, 1.0]])
    path = _path(np.zeros((2, 2)), [good, bad, good])
    dynamic = dynamic_indices(path, 5, fail_threshold=0.5)
    assert dynamic.failed_dates == [path.dates[1]]
    assert dynamic.dates == (path.dates[0], path.dates[2])
    try:
        dynamic_indices(path, 5, fail_threshold=0.01)
    except NumericalFailureError as e:
        assert "1 of 3" in str(e)
    else:
        raise AssertionError("failure rate above the threshold accepted")


def test_dynamic_workers_merge_in_date_order():
    panel = _panel(simulate_var(np.array([[0.3, 0.1], [0.05, 0.2]]), np.array([[1.0, 0.5], [0.5, 1.0]]), 400, seed=61))
    path = kalman_filter(panel, TvpConfig(prior_window=100))
    serial = dynamic_indices(path, 10, workers=1)
    parallel = dynamic_indices(path, 10, workers=4)
    assert serial.dates == parallel.dates == path.dates
    assert serial.tci_series().equals(parallel.tci_series())
    assert list(serial.npdc_frame().columns) == ["x1->x2"]


def test_dynamic_tci_converges_to_static():
    phi, sigma = random_stable_var(3, 1, seed=71)
    panel = _panel(simulate_var(phi, sigma, 5000, seed=72))
    path = kalman_filter(panel, TvpConfig(kappa1=1.0, kappa2=1.0, prior_mode="full_sample"))
    dynamic = dynamic_indices(path, 10)
    static_tci = static_report(fit_var(panel, 1), 10).tci
    tail = dynamic.tci_series().to_numpy()[-len(dynamic.dates) // 10:]
    assert np.max(np.abs(tail - static_tci)) < 1.0, f"static {static_tci:.2f}, tail {tail.min():.2f}..{tail.max():.2f}"


def test_average_report_window():
    sigmas = [np.array([[1.0, rho], [rho, 1.0]]) for rho in (0.1, 0.2, 0.6, 0.7)]
    dynamic = dynamic_indices(_path(np.zeros((2, 2)), sigmas), 5)
    cut = dynamic.dates[2]
    early = average_report(dynamic, stop=cut, label="early")
    late = average_report(dynamic, start=cut, label="late")
    assert early.label == "early"
    assert np.allclose(early.shares, np.mean([r.shares for r in dynamic.reports[:2]], axis=0))
    assert late.tci > early.tci
    assert np.allclose(average_report(dynamic).shares, dynamic.average.shares)


def test_report_json_keeps_shares():
    report = report_from_shares(_random_shares(3, 81), ["A", "B", "C"], 10, label="full")
    loaded = report_from_json(report_to_json(report))
    assert loaded.label == "full" and loaded.tickers == ("A", "B", "C")
    assert np.array_equal(loaded.shares, report.shares)
    assert loaded.tci == report.tci


# =========================================================================
# Rendering
# =========================================================================

def test_connectedness_table_layout():
    l = np.array([[0.7, 0.3], [0.1, 0.9]])
    report = report_from_shares(l, ["EZA", "BTC"], 10, label="static")
    text = render_connectedness_text(report)
    assert "Receiver" in text and "Inc.Own" in text and "NPT" in text and "TCI" in text
    assert "Givers: BTC" in text and "Receivers: EZA" in text
    assert "70.00" in text and "20.00" in text

    frame = pd.read_csv(io.StringIO(render_connectedness_csv(report)), index_col=0, dtype=str)
    assert list(frame.index) == ["EZA", "BTC", "Giver", "Inc.Own", "NET", "NPT"]
    assert abs(float(frame.loc["EZA", "Receiver"]) - (100.0 - 70.0)) < 1e-8
    assert frame.loc["Inc.Own", "Receiver"] == "TCI"
    assert abs(float(frame.loc["NET", "Receiver"]) - report.tci) < 1e-12


def test_comparison_rendering():
    first = report_from_shares(_random_shares(3, 91), ["A", "B", "C"], 10, label="pre")
    second = report_from_shares(_random_shares(3, 92), ["A", "B", "C"], 10, label="post")
    text = render_comparison_text([first, second])
    assert "pre" in text.splitlines()[0] and "[post] Givers:" in text
    header = render_comparison_csv([first, second]).splitlines()[0]
    assert header.startswith("row,pre:A") and "post:Receiver" in header


# =========================================================================
# Network
# =========================================================================

def test_network_identity_has_no_edges():
    report = report_from_shares(np.eye(3), ["A", "B", "C"], 10)
    network = build_network(report)
    assert len(network.nodes) == 3 and network.edges == []
    assert all(n.role == "receiver" and n.size == 1.0 for n in network.nodes)
    dot = emit_dot(network)
    assert dot.count("fillcolor=") == 3 and "->" not in dot


def test_network_two_variable_example():
    report = report_from_shares(np.array([[0.7, 0.3], [0.1, 0.9]]), ["x1", "x2"], 10)
    network = build_network(report, 0.75)
    assert len(network.edges) == 1
    edge = network.edges[0]
    assert (edge.source, edge.target) == ("x2", "x1")
    assert abs(edge.weight - 20.0) < 1e-12 and edge.emphasis == "bold"
    roles = {n.ticker: n.role for n in network.nodes}
    assert roles == {"x1": "receiver", "x2": "giver"}

    dot = emit_dot(network)
    assert dot == emit_dot(network)
    edge_lines = [line for line in dot.splitlines() if "->" in line]
    assert len(edge_lines) == 1 and "penwidth=3.0" in edge_lines[0]
    assert edge_lines[0].strip() == '"x2" -> "x1" [penwidth=3.0, label="20.00"];'
    assert '"x2" [fillcolor="#4477CC", width=1.200, fixedsize=true];' in dot
    assert '"x1" [fillcolor="#EECC44", width=1.200, fixedsize=true];' in dot


def test_network_bold_quantile_and_sizes():
    l = np.array([
        [0.80, 0.05, 0.15],
        [0.25, 0.70, 0.05],
        [0.05, 0.35, 0.60],
    ])
    report = report_from_shares(l, ["A", "B", "C"], 10)
    network = build_network(report, 0.75)
    weights = {(e.source, e.target): e.weight for e in network.edges}
    assert set(weights) == {("A", "B"), ("C", "A"), ("B", "C")}
    assert np.isclose(weights[("A", "B")], 20.0) and np.isclose(weights[("C", "A")], 10.0)
    assert np.isclose(weights[("B", "C")], 30.0)
    bold = [e for e in network.edges if e.emphasis == "bold"]
    assert [(e.source, e.target) for e in bold] == [("B", "C")]
    sizes = [n.size for n in network.nodes]
    assert np.isclose(min(sizes), 0.3) and np.isclose(max(sizes), 1.0)
    assert [n.role for n in network.nodes] == ["giver", "giver", "receiver"]
    for edge in network.edges:
        i, j = report.tickers.index(edge.source), report.tickers.index(edge.target)
        assert report.npdc[i, j] > 0


def test_network_json_round_trip():
    report = report_from_shares(_random_shares(5, 101), list("ABCDE"), 10, label="post")
    network = build_network(report, 0.5)
    text = emit_json(network)
    assert text == emit_json(network)
    assert parse_json(text) == network
    empty = emit_json(SpilloverNetwork.from_parts([], []))
    assert '"nodes": []' in empty and '"links": []' in empty


def test_network_is_a_node_link_digraph():
    report = report_from_shares(_random_shares(4, 102), list("ABCD"), 10, label="pre")
    network = build_network(report, 0.75)
    graph = network.graph
    assert isinstance(graph, nx.DiGraph) and not graph.is_multigraph()
    assert list(graph.nodes) == ["A", "B", "C", "D"]
    assert graph.graph == {"label": "pre", "edge_threshold": 0.75}
    assert graph.number_of_edges() == int(np.count_nonzero(np.triu(report.npdc, 1)))
    # out-degree counts the partners each ticker transmits to on net
    assert [graph.out_degree(t) for t in report.tickers] == list(report.npt)

    document = json.loads(emit_json(network))
    assert document["version"] == 2 and document["directed"] is True
    assert document["graph"]["edge_threshold"] == 0.75
    assert [n["ticker"] for n in document["nodes"]] == ["A", "B", "C", "D"]
    assert {(l["source"], l["target"]) for l in document["links"]} == set(graph.edges)
    rebuilt = json_graph.node_link_graph(document, name="ticker")
    assert nx.utils.graphs_equal(rebuilt, graph)


def test_network_json_rejects_bad_documents():
    good = json.loads(emit_json(build_network(report_from_shares(_random_shares(3, 103), list("ABC"), 10))))
    stale = dict(good, version=1)
    undirected = dict(good, directed=False)
    bare = dict(good, nodes=[{"ticker": n["ticker"]} for n in good["nodes"]])
    for document in (stale, undirected, bare):
        try:
            parse_json(json.dumps(document))
        except DataFaultError:
            continue
        raise AssertionError(f"accepted {document}")
    for text in ("{ not json", "[1, 2]"):
        try:
            parse_json(text)
        except DataFaultError:
            continue
        raise AssertionError(f"accepted {text!r}")


# ---------------------------------------------------------------- golden outputs

GOLDEN = Path(__file__).parent / "golden"
EIGHTHS = np.array([
    [0.5, 0.375, 0.125],
    [0.125, 0.75, 0.125],
    [0.25, 0.125, 0.625],
])


def _golden(name: str) -> str:
    return (GOLDEN / name).read_text(encoding="utf-8")


def test_golden_connectedness_tables():
    report = report_from_shares(EIGHTHS, list("ABC"), 10, label="eighths")
    assert report.tci == 37.5
    assert render_connectedness_csv(report) == _golden("eighths_connectedness.csv")
    assert render_pairwise_csv(report, "npdc") == _golden("eighths_npdc.csv")
    text = render_connectedness_text(report)
    assert text.splitlines()[0] == "Connectedness (eighths), horizon 10"
    assert text.rstrip().splitlines()[-2:] == ["Givers: B", "Receivers: A, C"]


def test_golden_pairwise_ratios():
    report = report_from_shares(EIGHTHS, list("ABC"), 10, label="eighths")
    expected_pci = np.array([[0.5, 2 / 7, 0.25], [2 / 7, 0.5, 2 / 13], [0.25, 2 / 13, 0.5]])
    expected_pii = np.array([[0.0, 0.5, -1 / 3], [-0.5, 0.0, 0.0], [1 / 3, 0.0, 0.0]])
    assert np.allclose(report.pci, expected_pci, atol=1e-15)
    assert np.allclose(report.pii, expected_pii, atol=1e-15)


def test_golden_network_dot():
    network = build_network(report_from_shares(EIGHTHS, list("ABC"), 10, label="eighths"))
    assert emit_dot(network) == _golden("eighths_network.dot")
    assert emit_dot(parse_json(emit_json(network))) == _golden("eighths_network.dot")


if __name__ == "__main__":
    run_module(globals())
