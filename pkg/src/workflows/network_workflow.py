#!/usr/bin/env python3
"""
Network Re-emission Workflow
============================

Rebuilds graph files from a saved connectedness report, typically with a
different edge threshold.
"""

import pathlib
from typing import Any, Dict

from core.errors import ConfigValidationError, DataFaultError
from econometrics.connectedness import report_from_json
from econometrics.network import build_network, emit_dot, emit_json
from workflows.base_workflow import BaseWorkflow


class NetworkWorkflow(BaseWorkflow):
    """Saved report JSON -> DOT and JSON network files"""

    verb = "network"
    requires_inputs = False

    def validate_params(self, **params) -> None:
        super().validate_params(**params)
        report = params.get("report")
        if not report:
            raise ConfigValidationError("network needs --report pointing at a saved connectedness JSON")
        if not pathlib.Path(report).is_file():
            raise ConfigValidationError(f"report file not found: {report}")

    def execute(self, report: str = None, **params) -> Dict[str, Any]:
        source = pathlib.Path(report)
        try:
            text = source.read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as e:
            raise DataFaultError(f"cannot read report {source}: {e}")
        loaded = report_from_json(text)
        network = build_network(loaded, self.config.edge_threshold)

        stem = loaded.label or source.stem
        self.write(f"{stem}.dot", emit_dot(network))
        self.write(f"{stem}.json", emit_json(network))
        self.log.info(f"Network '{stem}': {len(network.nodes)} nodes, {len(network.edges)} edges")

        summary = {
            "report": source.name,
            "label": loaded.label,
            "edge_threshold": self.config.edge_threshold,
            "n_edges": len(network.edges),
            "n_bold": sum(1 for e in network.edges if e.emphasis == "bold"),
        }
        self.write_manifest(summary)
        return summary
