#!/usr/bin/env python3
"""
Spillover Network Export
========================

ConnectednessReport -> networkx DiGraph of net pairwise transmission,
written as Graphviz DOT or versioned node-link JSON. Nodes keep the
panel's ticker order and DOT edges follow the pair order, so repeated
emission is byte-identical.
"""

import json
from typing import List

import networkx as nx
import numpy as np
from networkx.readwrite import json_graph

from core.errors import DataFaultError
from core.structures import ConnectednessReport, SpilloverNetwork
from utils.serialization import dumps

NETWORK_SCHEMA_VERSION = 2
NODE_KEY = "ticker"
NODE_FIELDS = {"role", "size", "net_value"}
EDGE_FIELDS = {"weight", "emphasis"}

GIVER_COLOR = "#4477CC"
RECEIVER_COLOR = "#EECC44"
BOLD_PENWIDTH = "3.0"
FINE_PENWIDTH = "1.0"
MIN_NODE_SIZE = 0.3
MAX_NODE_SIZE = 1.0
NODE_WIDTH_INCHES = 1.2  # DOT width at size 1.0


def _node_sizes(net: np.ndarray) -> List[float]:
    magnitude = np.abs(np.asarray(net, dtype=float))
    if magnitude.size == 0:
        return []
    lo, hi = float(magnitude.min()), float(magnitude.max())
    if hi == lo:
        return [MAX_NODE_SIZE] * len(magnitude)
    span = MAX_NODE_SIZE - MIN_NODE_SIZE
    return [MIN_NODE_SIZE + span * (float(m) - lo) / (hi - lo) for m in magnitude]


def build_network(report: ConnectednessReport, edge_threshold: float = 0.75) -> SpilloverNetwork:
    """One edge per unordered pair, pointing away from the net transmitter."""
    graph = nx.DiGraph(label=report.label, edge_threshold=edge_threshold)
    for ticker, value, size in zip(report.tickers, report.net, _node_sizes(report.net)):
        graph.add_node(ticker, role="giver" if value > 0 else "receiver", size=size, net_value=float(value))

    n = len(report.tickers)
    for i in range(n):
        for j in range(i + 1, n):
            value = float(report.npdc[i, j])
            if value > 0:
                graph.add_edge(report.tickers[i], report.tickers[j], weight=value)
            elif value < 0:
                graph.add_edge(report.tickers[j], report.tickers[i], weight=-value)

    if graph.number_of_edges():
        weights = nx.get_edge_attributes(graph, "weight")
        cutoff = float(np.quantile(list(weights.values()), edge_threshold))
        nx.set_edge_attributes(graph, {e: "bold" if w >= cutoff else "fine" for e, w in weights.items()}, "emphasis")
    return SpilloverNetwork(graph)


def _quote(text: str) -> str:
    return '"' + str(text).replace("\\", "\\\\").replace('"', '\\"') + '"'


def emit_dot(net: SpilloverNetwork) -> str:
    lines = ["digraph spillover {"]
    if net.label:
        lines.append(f"  graph [label={_quote(net.label)}];")
    lines.append('  node [shape=circle, style=filled, fontname="Helvetica"];')
    for node in net.nodes:
        color = GIVER_COLOR if node.role == "giver" else RECEIVER_COLOR
        width = f"{NODE_WIDTH_INCHES * node.size:.3f}"
        lines.append(f'  {_quote(node.ticker)} [fillcolor="{color}", width={width}, fixedsize=true];')
    for edge in net.edges:
        pen = BOLD_PENWIDTH if edge.emphasis == "bold" else FINE_PENWIDTH
        lines.append(
            f'  {_quote(edge.source)} -> {_quote(edge.target)} [penwidth={pen}, label="{edge.weight:.2f}"];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"


def emit_json(net: SpilloverNetwork) -> str:
    """node_link_data document keyed by ticker, with a schema version in front."""
    return dumps({"version": NETWORK_SCHEMA_VERSION, **json_graph.node_link_data(net.graph, name=NODE_KEY)})


def parse_json(text: str) -> SpilloverNetwork:
    try:
        document = json.loads(text)
        if document.get("version") != NETWORK_SCHEMA_VERSION:
            raise DataFaultError(f"unsupported network version {document.get('version')!r}")
        if not document.get("directed") or document.get("multigraph"):
            raise DataFaultError("network document must describe a simple directed graph")
        graph = json_graph.node_link_graph(document, directed=True, multigraph=False, name=NODE_KEY)
        for ticker, data in graph.nodes(data=True):
            missing = NODE_FIELDS - set(data)
            if missing:
                raise DataFaultError(f"node {ticker!r} lacks {sorted(missing)}")
        for source, target, data in graph.edges(data=True):
            missing = EDGE_FIELDS - set(data)
            if missing:
                raise DataFaultError(f"edge {source!r} -> {target!r} lacks {sorted(missing)}")
        return SpilloverNetwork(graph)
    except DataFaultError:
        raise
    except (json.JSONDecodeError, KeyError, TypeError, ValueError, AttributeError, nx.NetworkXError) as e:
        raise DataFaultError(f"malformed network document: {e}")
