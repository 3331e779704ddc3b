#!/usr/bin/env python3
"""
Core Data Structures for SpilloverScope
=======================================

This module defines the data structures passed between pipeline stages:
price series and return panels, diagnostic results, VAR and TVP-VAR
estimates, variance decompositions, connectedness reports and networks.

Matrix orientation follows the panel: every N-sized axis uses the
panel's column (ticker) order.
"""

from dataclasses import dataclass, field
from datetime import date
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
import pandas as pd


class TransformTag(str, Enum):
    LOG_DIFF = "log_diff"
    PLAIN_DIFF = "plain_diff"


class DeterministicSpec(str, Enum):
    CONSTANT = "constant"
    CONSTANT_TREND = "constant_trend"
    NONE = "none"


@dataclass
class RawSeries:
    """One ticker's price observations, sorted and de-duplicated."""
    ticker: str
    dates: Tuple[date, ...]
    prices: np.ndarray
    rejected_rows: int = 0  # rows dropped for non-positive or unparseable prices/dates

    def __len__(self) -> int:
        return len(self.dates)


@dataclass
class ReturnPanel:
    """Date-aligned T x N matrix of differenced series."""
    tickers: Tuple[str, ...]
    dates: Tuple[date, ...]
    values: np.ndarray
    transform_tags: Tuple[str, ...]
    base_prices: Optional[np.ndarray] = None  # aligned prices on the date preceding dates[0]
    base_date: Optional[date] = None

    @property
    def n_obs(self) -> int:
        return int(self.values.shape[0])

    @property
    def n_vars(self) -> int:
        return int(self.values.shape[1])

    @property
    def transform_tag(self) -> str:
        tags = set(self.transform_tags)
        return self.transform_tags[0] if len(tags) == 1 else "mixed"

    def column(self, ticker: str) -> np.ndarray:
        return self.values[:, self.tickers.index(ticker)]

    def select(self, tickers: Sequence[str]) -> "ReturnPanel":
        """Reorder or subset columns; metadata follows the new order."""
        idx = [self.tickers.index(t) for t in tickers]
        return ReturnPanel(
            tickers=tuple(tickers),
            dates=self.dates,
            values=self.values[:, idx].copy(),
            transform_tags=tuple(self.transform_tags[i] for i in idx),
            base_prices=None if self.base_prices is None else self.base_prices[idx].copy(),
            base_date=self.base_date,
        )

    def rows(self, start: int, stop: int) -> "ReturnPanel":
        """Contiguous row slice [start, stop)."""
        return ReturnPanel(
            tickers=self.tickers,
            dates=self.dates[start:stop],
            values=self.values[start:stop].copy(),
            transform_tags=self.transform_tags,
            base_prices=self.base_prices if start == 0 else None,
            base_date=self.base_date if start == 0 else self.dates[start - 1],
        )

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.values, index=pd.Index(self.dates, name="date"), columns=list(self.tickers))


@dataclass
class SampleSplit:
    break_dates: Tuple[date, ...]
    labels: Tuple[str, ...] = ()

    def __post_init__(self):
        if not self.labels:
            self.labels = tuple(f"segment_{k + 1}" for k in range(len(self.break_dates) + 1))


@dataclass
class DescriptiveStats:
    n_obs: int
    mean: float
    median: float
    sd: float
    skewness: float
    excess_kurtosis: float
    jb_stat: float
    jb_pvalue: float
    q2_stat: float
    q2_lags: int
    q2_pvalue: float


@dataclass
class AdfResult:
    statistic: float
    chosen_lag: int
    max_lag: int
    pvalue: float
    deterministic_spec: str
    n_obs: int
    critical_values: Dict[str, float] = field(default_factory=dict)


@dataclass
class ChowResult:
    f_stat: float
    df_num: int
    df_den: int
    pvalue: float
    break_date: Optional[date] = None
    break_index: Optional[int] = None


@dataclass
class VarEstimate:
    """Static VAR(p) estimate, or a per-date view of a TVP path."""
    tickers: Tuple[str, ...]
    lag_order: int
    coefficients: np.ndarray          # (p, N, N); coefficients[j - 1] is Phi_j
    intercept: np.ndarray             # (N,)
    resid_cov: np.ndarray             # (N, N)
    nobs: int
    has_intercept: bool = True
    residuals: Optional[np.ndarray] = None
    bic: Optional[float] = None
    aic: Optional[float] = None
    loglik: Optional[float] = None
    gram_inv: Optional[np.ndarray] = None  # (Z'Z)^-1 of the regressors, intercept first
    spectral_radius: float = float("nan")
    stable: bool = False
    as_of: Optional[date] = None
    lag_selection: Optional[str] = None

    @property
    def n_vars(self) -> int:
        return int(self.resid_cov.shape[0])


@dataclass
class MaCoefficients:
    horizons: int
    psi: np.ndarray  # (H, N, N); psi[0] is the identity


@dataclass
class TvpPath:
    """Filtered coefficient and covariance paths of the TVP-VAR."""
    tickers: Tuple[str, ...]
    dates: Tuple[date, ...]
    lag_order: int
    coeffs: np.ndarray       # (T', N, 1 + N*p): per equation [c, Phi_1 row, ..., Phi_p row]
    resid_cov: np.ndarray    # (T', N, N)
    state_cov: np.ndarray    # (T', N*(1 + N*p), N*(1 + N*p))
    innovations: np.ndarray  # (T', N) one-step prediction errors; zeros on the prior anchor row
    settings: Dict[str, Any] = field(default_factory=dict)
    psd_repairs: int = 0

    def __len__(self) -> int:
        return len(self.dates)


@dataclass
class FevdTable:
    horizon: int
    raw: np.ndarray         # d, before normalization
    normalized: np.ndarray  # l, rows sum to one


@dataclass
class ConnectednessReport:
    tickers: Tuple[str, ...]
    horizon: int
    shares: np.ndarray      # row-normalized decomposition l
    receiver: np.ndarray    # FROM_i, percent
    giver: np.ndarray       # TO_i, percent
    inc_own: np.ndarray
    net: np.ndarray
    npt: np.ndarray
    tci: float
    npdc: np.ndarray        # npdc[i, j] > 0: i is the net transmitter to j
    pci: np.ndarray
    pii: np.ndarray
    label: str = ""

    @property
    def givers(self) -> List[str]:
        return [t for t, v in zip(self.tickers, self.net) if v > 0]

    @property
    def receivers(self) -> List[str]:
        return [t for t, v in zip(self.tickers, self.net) if v <= 0]

    def npdc_formula_literal(self) -> np.ndarray:
        """l_ij - l_ji in percent: positive when i receives more than it sends."""
        return -self.npdc


@dataclass
class DynamicConnectedness:
    tickers: Tuple[str, ...]
    horizon: int
    dates: Tuple[date, ...]
    reports: List[ConnectednessReport]
    average: ConnectednessReport
    failed_dates: List[date] = field(default_factory=list)

    def _index(self) -> pd.Index:
        return pd.Index(self.dates, name="date")

    def tci_series(self) -> pd.Series:
        return pd.Series([r.tci for r in self.reports], index=self._index(), name="TCI")

    def net_frame(self) -> pd.DataFrame:
        return pd.DataFrame([r.net for r in self.reports], index=self._index(), columns=list(self.tickers))

    def from_frame(self) -> pd.DataFrame:
        return pd.DataFrame([r.receiver for r in self.reports], index=self._index(), columns=list(self.tickers))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([r.giver for r in self.reports], index=self._index(), columns=list(self.tickers))

    def npdc_frame(self) -> pd.DataFrame:
        """One column per unordered pair 'A->B' holding the net transmission from A to B."""
        n = len(self.tickers)
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        columns = [f"{self.tickers[i]}->{self.tickers[j]}" for i, j in pairs]
        data = [[r.npdc[i, j] for i, j in pairs] for r in self.reports]
        return pd.DataFrame(data, index=self._index(), columns=columns)


@dataclass
class NetworkNode:
    ticker: str
    role: str  # "giver" | "receiver"
    size: float
    net_value: float


@dataclass
class NetworkEdge:
    source: str
    target: str
    weight: float
    emphasis: str  # "bold" | "fine"


class SpilloverNetwork:
    """Directed net-spillover graph.

    Backed by a networkx DiGraph: graph attributes ``label`` and
    ``edge_threshold``, node attributes ``role``/``size``/``net_value``,
    edge attributes ``weight``/``emphasis``. ``nodes`` follow insertion
    (ticker) order; ``edges`` follow the unordered pair order (i < j) of
    that node order.
    """

    def __init__(self, graph: Optional[nx.DiGraph] = None):
        self.graph = graph if graph is not None else nx.DiGraph(label="", edge_threshold=0.75)

    @classmethod
    def from_parts(cls, nodes: Sequence[NetworkNode], edges: Sequence[NetworkEdge],
                   edge_threshold: float = 0.75, label: str = "") -> "SpilloverNetwork":
        graph = nx.DiGraph(label=label, edge_threshold=edge_threshold)
        for node in nodes:
            graph.add_node(node.ticker, role=node.role, size=node.size, net_value=node.net_value)
        for edge in edges:
            graph.add_edge(edge.source, edge.target, weight=edge.weight, emphasis=edge.emphasis)
        return cls(graph)

    @property
    def label(self) -> str:
        return self.graph.graph.get("label", "")

    @property
    def edge_threshold(self) -> float:
        return self.graph.graph.get("edge_threshold", 0.75)

    @property
    def nodes(self) -> List[NetworkNode]:
        return [
            NetworkNode(ticker=t, role=d["role"], size=d["size"], net_value=d["net_value"])
            for t, d in self.graph.nodes(data=True)
        ]

    @property
    def edges(self) -> List[NetworkEdge]:
        position = {t: k for k, t in enumerate(self.graph.nodes)}
        ordered = sorted(
            self.graph.edges(data=True),
            key=lambda e: (min(position[e[0]], position[e[1]]), max(position[e[0]], position[e[1]])),
        )
        return [NetworkEdge(source=s, target=t, weight=d["weight"], emphasis=d["emphasis"]) for s, t, d in ordered]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SpilloverNetwork):
            return NotImplemented
        return (
            self.graph.graph == other.graph.graph
            and self.nodes == other.nodes
            and self.edges == other.edges
        )

    def __repr__(self) -> str:
        return (f"SpilloverNetwork(label={self.label!r}, nodes={self.graph.number_of_nodes()}, "
                f"edges={self.graph.number_of_edges()})")
