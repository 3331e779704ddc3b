#!/usr/bin/env python3
"""
Fixture Simulation Workflow
===========================

Writes a seeded synthetic price fixture and a ready-to-run config.
"""

from typing import Any, Dict, Optional, Sequence

from core.errors import ConfigValidationError
from econometrics.simulate import FIXTURE_TICKERS, generate_fixture
from workflows.base_workflow import BaseWorkflow


class SimulateWorkflow(BaseWorkflow):
    """Seeded VAR fixture generation"""

    verb = "simulate"
    requires_inputs = False

    def validate_params(self, **params) -> None:
        super().validate_params(**params)
        n_obs = params.get("n_obs") or 2100
        if n_obs < 50:
            raise ConfigValidationError(f"n_obs must be >= 50, got {n_obs}")

    def execute(self, n_obs: Optional[int] = None, tickers: Optional[Sequence[str]] = None, **params) -> Dict[str, Any]:
        tickers = list(tickers or FIXTURE_TICKERS)
        n_obs = n_obs or 2100
        config_path = generate_fixture(self.stage_dir, seed=self.config.seed, n_obs=n_obs, tickers=tickers, logger=self.log)
        self.written.extend(sorted(self.stage_dir.glob("*.csv")))
        self.written.append(config_path)
        summary = {"tickers": tickers, "n_obs": n_obs, "seed": self.config.seed, "config_file": config_path.name}
        self.write_manifest(summary)
        return summary
