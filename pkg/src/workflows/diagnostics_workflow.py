#!/usr/bin/env python3
"""
Diagnostics Workflow
====================

Descriptive statistics, ADF on levels and first differences, and AR(1)
Chow tests at every configured break date.
"""

import pathlib
from typing import Any, Dict, List, Optional

import numpy as np

from core.errors import InsufficientDataError
from core.structures import ReturnPanel, TransformTag
from econometrics import reporting
from econometrics.data import reconstruct_prices
from econometrics.diagnostics import adf_test, ar1_chow, break_in_range, describe
from workflows.base_workflow import BaseWorkflow


class DiagnosticsWorkflow(BaseWorkflow):
    """Pre-estimation battery over every input series"""

    verb = "diagnostics"

    def execute(self, **params) -> Dict[str, Any]:
        panel = self.load_panel()
        summary = self.run_battery(panel)
        self.write_manifest(summary)
        return summary

    def _levels(self, panel: ReturnPanel) -> np.ndarray:
        """Log levels for log-differenced columns, raw levels otherwise"""
        levels = reconstruct_prices(panel)
        for k, tag in enumerate(panel.transform_tags):
            if tag == TransformTag.LOG_DIFF.value:
                levels[:, k] = np.log(levels[:, k])
        return levels

    def run_battery(self, panel: ReturnPanel, base: Optional[pathlib.Path] = None) -> Dict[str, Any]:
        base = base or pathlib.Path(self.config.output_dir) / "diagnostics"
        max_lag = self.config.adf_max_lag if self.config.adf_max_lag is not None else "auto"
        spec = self.config.adf_spec

        stats = {t: describe(panel.column(t), self.config.q2_lags) for t in panel.tickers}

        levels = self._levels(panel)
        adf = {
            t: {
                "level": adf_test(levels[:, k], max_lag, spec),
                "difference": adf_test(panel.column(t), max_lag, spec),
            }
            for k, t in enumerate(panel.tickers)
        }

        chow_rows = []
        skipped: List[str] = []
        for break_date in self.config.resolved_break_dates():
            if not break_in_range(panel.dates, break_date):
                self.log.warning(f"Chow test at {break_date} skipped: outside {panel.dates[0]} .. {panel.dates[-1]}")
                skipped.append(break_date.isoformat())
                chow_rows.extend((t, break_date, None, "skipped: out of range") for t in panel.tickers)
                continue
            for t in panel.tickers:
                try:
                    chow_rows.append((t, break_date, ar1_chow(panel.column(t), panel.dates, break_date), "ok"))
                except InsufficientDataError as e:
                    self.log.warning(f"Chow test for {t} at {break_date} skipped: {e}")
                    chow_rows.append((t, break_date, None, "skipped: sub-sample too short"))

        self.write("descriptive.txt", reporting.render_descriptive_text(stats), base)
        self.write("descriptive.csv", reporting.render_descriptive_csv(stats), base)
        self.write("adf.txt", reporting.render_adf_text(adf), base)
        self.write("adf.csv", reporting.render_adf_csv(adf), base)
        self.write("chow.txt", reporting.render_chow_text(chow_rows), base)
        self.write("chow.csv", reporting.render_chow_csv(chow_rows), base)

        return {
            "tickers": list(panel.tickers),
            "n_obs": panel.n_obs,
            "sample": [panel.dates[0], panel.dates[-1]],
            "chow_skipped_breaks": skipped,
        }
