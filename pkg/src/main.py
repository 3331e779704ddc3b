#!/usr/bin/env python3
"""
SpilloverScope - Main Entry Point
=================================

Config-file driven CLI over the connectedness pipeline:

    python src/main.py --config run.json diagnostics
    python src/main.py --config run.json static --lag 1
    python src/main.py --config run.json dynamic --kappa1 0.99 --workers 4
    python src/main.py network --report output/static/connectedness.json
    python src/main.py --output-dir fixtures simulate --seed 7

Exit codes: 0 success, 2 configuration, 3 data, 4 numerical, 1 internal.
"""

import sys
import json
import argparse
import pathlib
from dataclasses import fields
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from core.config import RunConfig
from core.errors import ConfigValidationError, SpilloverError
from utils.logger import get_logger
from workflows import (
    workflow_registry,
    WorkflowResult,
    DiagnosticsWorkflow,
    StaticWorkflow,
    DynamicWorkflow,
    NetworkWorkflow,
    SimulateWorkflow,
)

# args attribute -> RunConfig field
FLAG_FIELDS = {
    "start": "start_date",
    "end": "end_date",
    "lag": "lag",
    "p_max": "p_max",
    "horizon": "horizon",
    "break_dates": "break_dates",
    "segment_labels": "segment_labels",
    "edge_threshold": "edge_threshold",
    "seed": "seed",
    "workers": "workers",
    "kappa1": "kappa1",
    "kappa2": "kappa2",
    "prior_window": "prior_window",
    "inflation": "inflation",
    "prior_mode": "prior_mode",
    "fail_threshold": "fail_threshold",
    "q2_lags": "q2_lags",
    "adf_max_lag": "adf_max_lag",
    "adf_spec": "adf_spec",
    "log_level": "log_level",
}

# Config-file keys that may be null
NULLABLE_KEYS = {"start_date", "end_date", "adf_max_lag", "output_dir", "log_file"}
# Set by the loader, never by the file
RESERVED_KEYS = {"base_path", "config_dir"}


class SpilloverSystem:
    """Main system orchestrator"""

    def __init__(self, config: RunConfig = None):
        self.config = config or RunConfig()
        self.log = get_logger(log_file=self.config.log_file, level=self.config.log_level)
        self._register_workflows()

    def _register_workflows(self) -> None:
        """Register all pipeline verbs"""
        workflows = [
            ('diagnostics', DiagnosticsWorkflow),
            ('static', StaticWorkflow),
            ('dynamic', DynamicWorkflow),
            ('network', NetworkWorkflow),
            ('simulate', SimulateWorkflow)
        ]
        for verb, workflow_class in workflows:
            workflow_registry.register(verb, workflow_class)
            self.log.debug(f"Registered workflow: {verb}")

    def run(self, verb: str, **params) -> WorkflowResult:
        """Execute one verb against the current configuration"""
        workflow = workflow_registry.get_workflow(verb, config=self.config, logger=self.log)
        if workflow is None:
            error = ConfigValidationError(
                f"unknown verb '{verb}' (available: {', '.join(workflow_registry.list_workflows())})"
            )
            return WorkflowResult(success=False, errors=[error.to_line(verb)], category=error.category,
                                  exit_code=error.exit_code)
        self.log.info(f"Running '{verb}' with output in {self.config.output_dir}")
        return workflow.start_execution(**params)

    def list_capabilities(self) -> Dict[str, Any]:
        """List system capabilities"""
        return {
            "verbs": workflow_registry.list_workflows(),
            "config": self.config.to_dict(),
        }


def _lag_arg(value: str) -> Union[int, str]:
    if value == "auto":
        return value
    try:
        lag = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"lag must be 'auto' or a positive integer, got '{value}'")
    if lag < 1:
        raise argparse.ArgumentTypeError(f"lag must be >= 1, got {lag}")
    return lag


def create_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spillover", description="SpilloverScope - TVP-VAR volatility spillover connectedness")
    parser.add_argument("--config", type=Path, help="Path to a JSON run configuration file.")
    parser.add_argument("--output-dir", type=Path, help="Output directory (overrides config and SPILLOVER_OUTPUT_DIR).")
    parser.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="Console log level.")
    parser.add_argument("--log-file", type=Path, help="Run log file (kept outside the output tree).")

    # Shared estimation flags
    estimation = argparse.ArgumentParser(add_help=False)
    estimation.add_argument("--start", help="First date (YYYY-MM-DD), inclusive.")
    estimation.add_argument("--end", help="Last date (YYYY-MM-DD), inclusive.")
    estimation.add_argument("--lag", type=_lag_arg, help="VAR lag order or 'auto' (BIC).")
    estimation.add_argument("--p-max", type=int, help="Largest lag considered by 'auto'.")
    estimation.add_argument("--horizon", type=int, help="Forecast horizon H of the decomposition.")
    estimation.add_argument("--no-intercept", action="store_true", help="Estimate VARs without a constant.")
    estimation.add_argument("--break-date", dest="break_dates", action="append", help="Sample break date; repeat for several.")
    estimation.add_argument("--segment-label", dest="segment_labels", action="append", help="Label per segment, in order.")
    estimation.add_argument("--edge-threshold", type=float, help="Quantile of pair weights drawn bold.")

    diagnostics = argparse.ArgumentParser(add_help=False)
    diagnostics.add_argument("--q2-lags", type=int, help="Ljung-Box lags on squared returns.")
    diagnostics.add_argument("--adf-max-lag", type=int, help="Largest ADF lag (default floor(12 (T/100)^0.25)).")
    diagnostics.add_argument("--adf-spec", choices=["constant", "constant_trend", "none"], help="ADF deterministic terms.")

    tvp = argparse.ArgumentParser(add_help=False)
    tvp.add_argument("--kappa1", type=float, help="State forgetting factor in (0, 1].")
    tvp.add_argument("--kappa2", type=float, help="Covariance decay factor in (0, 1].")
    tvp.add_argument("--prior-window", type=int, help="Rows in the OLS prior window.")
    tvp.add_argument("--inflation", type=float, help="Prior state covariance inflation factor.")
    tvp.add_argument("--prior-mode", choices=["window", "full_sample"], help="Where the OLS prior comes from.")
    tvp.add_argument("--workers", type=int, help="Threads for per-date decompositions.")
    tvp.add_argument("--fail-threshold", type=float, help="Tolerated fraction of failed per-date decompositions.")

    subparsers = parser.add_subparsers(dest="command", required=True, help="Available commands")
    subparsers.add_parser("diagnostics", parents=[estimation, diagnostics],
                          help="Descriptive statistics, ADF and Chow tables.")
    subparsers.add_parser("static", parents=[estimation, diagnostics],
                          help="Diagnostics plus full-sample VAR connectedness and network.")
    subparsers.add_parser("dynamic", parents=[estimation, tvp],
                          help="TVP-VAR dynamic connectedness, segment tables and networks.")

    network_parser = subparsers.add_parser("network", help="Re-emit network files from a saved report JSON.")
    network_parser.add_argument("--report", type=Path, required=True, help="connectedness JSON written by static/dynamic.")
    network_parser.add_argument("--edge-threshold", type=float, help="Quantile of pair weights drawn bold.")

    simulate_parser = subparsers.add_parser("simulate", help="Write a seeded synthetic price fixture and config.")
    simulate_parser.add_argument("--n-obs", type=int, help="Business days to simulate (default 2100).")
    simulate_parser.add_argument("--tickers", nargs="+", help="Subset of the fixture tickers.")
    simulate_parser.add_argument("--seed", type=int, help="Random seed.")

    return parser


def load_config(config_file: Path = None) -> RunConfig:
    """Load and validate configuration from file.

    Unknown keys are reported and ignored; wrong types fail fast.
    """
    if not config_file:
        return RunConfig(config_dir=Path.cwd())

    config_file = Path(config_file)
    if not config_file.is_file():
        raise ConfigValidationError(f"Configuration file not found: {config_file}")

    try:
        with open(config_file, 'r', encoding='utf-8') as f:
            config_data = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigValidationError(f"Invalid JSON in configuration file {config_file}: {e}")
    except OSError as e:
        raise ConfigValidationError(f"Failed to read configuration file {config_file}: {e}")
    if not isinstance(config_data, dict):
        raise ConfigValidationError(f"Configuration file {config_file} must hold a JSON object")

    defaults = RunConfig()
    known = {f.name for f in fields(RunConfig)} - RESERVED_KEYS
    invalid_keys: List[str] = []
    type_errors: List[str] = []
    accepted: Dict[str, Any] = {}

    for key, value in config_data.items():
        if key not in known:
            invalid_keys.append(key)
            continue

        current_value = getattr(defaults, key)
        if value is None and key in NULLABLE_KEYS:
            accepted[key] = None
        elif key == "lag":
            if isinstance(value, bool) or not isinstance(value, (int, str)):
                type_errors.append(f"{key}: Expected int or 'auto', got {type(value).__name__}")
            else:
                accepted[key] = value
        elif key == "series":
            if not isinstance(value, list) or not all(isinstance(s, dict) for s in value):
                type_errors.append(f"{key}: Expected a list of objects")
            else:
                accepted[key] = value
        # Special handling for Path objects
        elif key in ("output_dir", "log_file") or isinstance(current_value, pathlib.Path):
            if not isinstance(value, str):
                type_errors.append(f"{key}: Expected path string, got {type(value).__name__}")
            else:
                accepted[key] = Path(value)
        # Handle None (uninitialized) attributes
        elif current_value is None:
            if isinstance(value, bool) or not isinstance(value, int):
                type_errors.append(f"{key}: Expected int, got {type(value).__name__}")
            else:
                accepted[key] = value
        elif isinstance(value, bool) != isinstance(current_value, bool):
            type_errors.append(f"{key}: Expected {type(current_value).__name__}, got {type(value).__name__}")
        elif not isinstance(value, type(current_value)):
            # Allow int -> float conversion
            if isinstance(current_value, float) and isinstance(value, int):
                accepted[key] = float(value)
            else:
                type_errors.append(
                    f"{key}: Expected {type(current_value).__name__}, got {type(value).__name__}"
                )
        else:
            accepted[key] = value

    if invalid_keys:
        get_logger("spillover.config").warning(
            f"Unknown configuration keys (ignored): {', '.join(invalid_keys)}"
        )
    if type_errors:
        raise ConfigValidationError("Configuration type errors: " + "; ".join(type_errors))

    try:
        return RunConfig(config_dir=config_file.resolve().parent, **accepted)
    except (TypeError, ValueError) as e:
        raise ConfigValidationError(f"Invalid configuration in {config_file}: {e}")


def apply_overrides(config: RunConfig, args: argparse.Namespace) -> RunConfig:
    """Flags > SPILLOVER_OUTPUT_DIR > file > defaults"""
    config.apply_output_env()
    if getattr(args, "output_dir", None):
        config.output_dir = Path(args.output_dir).resolve()
    if getattr(args, "log_file", None):
        config.log_file = Path(args.log_file).resolve()
    for attr, field_name in FLAG_FIELDS.items():
        value = getattr(args, attr, None)
        if value is not None:
            setattr(config, field_name, value)
    if getattr(args, "no_intercept", False):
        config.intercept = False
    return config


def workflow_params(args: argparse.Namespace) -> Dict[str, Any]:
    if args.command == "network":
        return {"report": str(args.report)}
    if args.command == "simulate":
        return {"n_obs": args.n_obs, "tickers": args.tickers}
    return {}


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point"""
    parser = create_parser()
    args = parser.parse_args(argv)
    verb = args.command

    try:
        config = apply_overrides(load_config(args.config), args)
    except SpilloverError as e:
        print(e.to_line(verb), file=sys.stderr)
        return e.exit_code

    system = SpilloverSystem(config)
    try:
        result = system.run(verb, **workflow_params(args))
    except KeyboardInterrupt:
        print("\nOperation cancelled by user")
        return 130

    if result.success:
        print(f"{verb}: completed in {result.execution_time:.2f}s, output in {Path(config.output_dir) / verb}")
        return 0
    print(result.errors[0], file=sys.stderr)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
