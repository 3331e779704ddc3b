#!/usr/bin/env python3
"""
Dynamic Connectedness Workflow
==============================

TVP-VAR filter -> per-date connectedness -> time series, full-sample and
per-segment averaged tables, segment comparison and network files.
"""

from typing import Any, Dict

from core.errors import ConfigValidationError
from core.structures import SampleSplit
from econometrics import reporting
from econometrics.connectedness import average_report, dynamic_indices, report_to_json
from econometrics.data import split_panel
from econometrics.network import build_network, emit_dot, emit_json
from econometrics.tvp import TvpConfig, first_path_row, kalman_filter, path_to_csv
from workflows.base_workflow import BaseWorkflow


class DynamicWorkflow(BaseWorkflow):
    """Time-varying connectedness over the full sample and its segments"""

    verb = "dynamic"

    def tvp_config(self, lag: int) -> TvpConfig:
        return TvpConfig(
            kappa1=self.config.kappa1,
            kappa2=self.config.kappa2,
            prior_window=self.config.prior_window,
            lag_order=lag,
            inflation=self.config.inflation,
            prior_mode=self.config.prior_mode,
            intercept=self.config.intercept,
        )

    def check_first_segment(self, panel, breaks, tvp: TvpConfig) -> None:
        """The first segment must contain at least one filtered date"""
        row = first_path_row(tvp)
        if not breaks or row >= panel.n_obs:
            return
        first = panel.dates[row]
        if breaks[0] <= first:
            raise ConfigValidationError(
                f"break date {breaks[0]} is on or before the first dynamic date {first}; move it past the "
                f"prior window (prior_window={tvp.prior_window}, lag={tvp.lag_order}, prior_mode={tvp.prior_mode})"
            )

    def execute(self, **params) -> Dict[str, Any]:
        panel = self.load_panel()
        self.require_system(panel)

        breaks = self.config.resolved_break_dates()
        split = SampleSplit(tuple(breaks), tuple(self.config.segment_labels))
        split_panel(panel, split)  # rejects breaks outside the sample

        lag, selection = self.resolve_lag(panel)
        tvp = self.tvp_config(lag)
        self.check_first_segment(panel, breaks, tvp)
        with self.log.timed("TVP filter"):
            path = kalman_filter(panel, tvp, logger=self.log)
        with self.log.timed("per-date decompositions"):
            dynamic = dynamic_indices(
                path,
                self.config.horizon,
                workers=self.config.workers,
                fail_threshold=self.config.fail_threshold,
                logger=self.log,
            )

        self.write("tvp_path.csv", path_to_csv(path))
        self.write("tci.csv", reporting.series_csv(dynamic.tci_series().to_frame()))
        self.write("net.csv", reporting.series_csv(dynamic.net_frame()))
        self.write("from.csv", reporting.series_csv(dynamic.from_frame()))
        self.write("to.csv", reporting.series_csv(dynamic.to_frame()))
        self.write("npdc.csv", reporting.series_csv(dynamic.npdc_frame()))

        full = average_report(dynamic, label="full")
        bounds = [None] + list(breaks) + [None]
        segments = [
            average_report(dynamic, start, stop, label)
            for label, start, stop in zip(split.labels, bounds, bounds[1:])
        ]

        tcis: Dict[str, float] = {}
        for report in [full] + segments:
            self._write_report(report)
            tcis[report.label] = report.tci
        self.write("comparison.txt", reporting.render_comparison_text(segments))
        self.write("comparison.csv", reporting.render_comparison_csv(segments))

        summary = {
            "tickers": list(panel.tickers),
            "lag_order": lag,
            "lag_selection": selection,
            "horizon": self.config.horizon,
            "tvp": path.settings,
            "psd_repairs": path.psd_repairs,
            "dates": [dynamic.dates[0], dynamic.dates[-1]],
            "n_dates": len(dynamic.dates),
            "failed_dates": dynamic.failed_dates,
            "segments": list(split.labels),
            "tci": tcis,
            "final_tci": dynamic.reports[-1].tci,
        }
        self.write_manifest(summary)
        return summary

    def _write_report(self, report) -> None:
        title = f"TVP-VAR connectedness ({report.label}), horizon {report.horizon}"
        network = build_network(report, self.config.edge_threshold)
        self.write(f"reports/{report.label}.txt", reporting.render_connectedness_text(report, title=title))
        self.write(f"reports/{report.label}.csv", reporting.render_connectedness_csv(report))
        self.write(f"reports/{report.label}.json", report_to_json(report))
        self.write(f"reports/{report.label}_pci.csv", reporting.render_pairwise_csv(report, "pci"))
        self.write(f"reports/{report.label}_pii.csv", reporting.render_pairwise_csv(report, "pii"))
        self.write(f"networks/{report.label}.dot", emit_dot(network))
        self.write(f"networks/{report.label}.json", emit_json(network))
