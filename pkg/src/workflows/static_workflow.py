#!/usr/bin/env python3
"""
Static Connectedness Workflow
=============================

Full-sample VAR, generalized FEVD connectedness table and network files,
preceded by the diagnostics battery.
"""

from typing import Any, Dict

from econometrics import reporting
from econometrics.connectedness import report_to_json, static_report
from econometrics.network import build_network, emit_dot, emit_json
from econometrics.var import fit_var, lag_criteria, write_var_snapshot
from workflows.diagnostics_workflow import DiagnosticsWorkflow


class StaticWorkflow(DiagnosticsWorkflow):
    """Diagnostics + full-sample VAR connectedness"""

    verb = "static"

    def execute(self, **params) -> Dict[str, Any]:
        panel = self.load_panel()
        summary = self.run_battery(panel)
        self.require_system(panel)

        lag, selection = self.resolve_lag(panel)
        if self.config.lag == "auto":
            self.write("lag_criteria.csv", lag_criteria(panel, self.config.p_max, self.config.intercept).to_csv(
                lineterminator="\n", float_format="%.17g"))
        est = fit_var(panel, lag, intercept=self.config.intercept)
        est.lag_selection = selection
        if not est.stable:
            self.log.warning(f"Static VAR({lag}) is not stable (spectral radius {est.spectral_radius:.4f})")

        report = static_report(est, self.config.horizon, label="static")
        network = build_network(report, self.config.edge_threshold)

        self.write("var_estimate.txt", write_var_snapshot(est))
        self.write("connectedness.txt", reporting.render_connectedness_text(
            report, title=f"Static VAR({lag}) connectedness, horizon {self.config.horizon}"))
        self.write("connectedness.csv", reporting.render_connectedness_csv(report))
        self.write("connectedness.json", report_to_json(report))
        self.write("pci.csv", reporting.render_pairwise_csv(report, "pci"))
        self.write("pii.csv", reporting.render_pairwise_csv(report, "pii"))
        self.write("network.dot", emit_dot(network))
        self.write("network.json", emit_json(network))

        self.log.info(f"Static TCI {report.tci:.2f}; givers: {', '.join(report.givers) or '-'}")
        summary.update({
            "lag_order": lag,
            "lag_selection": selection,
            "spectral_radius": est.spectral_radius,
            "stable": est.stable,
            "tci": report.tci,
        })
        self.write_manifest(summary)
        return summary
