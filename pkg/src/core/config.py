#!/usr/bin/env python3
"""
Configuration Management for SpilloverScope
===========================================

Centralized run configuration: inputs, estimation choices (lag, horizon,
forgetting factors, prior), sample split and output options.
"""

import os
import pathlib
from dataclasses import dataclass, field
from datetime import date
from typing import Any, Dict, List, Optional, Union

from core.errors import ConfigValidationError

OUTPUT_DIR_ENV_VAR = "SPILLOVER_OUTPUT_DIR"

VALID_TRANSFORMS = ("log_diff", "plain_diff")
VALID_PRIOR_MODES = ("window", "full_sample")
VALID_ADF_SPECS = ("constant", "constant_trend", "none")


def parse_date(value: Union[str, date, None], field_name: str = "date") -> Optional[date]:
    """ISO-8601 string (or date) to date; None passes through."""
    if value is None or isinstance(value, date):
        return value
    try:
        return date.fromisoformat(str(value).strip())
    except ValueError as e:
        raise ConfigValidationError(f"{field_name}: cannot parse '{value}' as YYYY-MM-DD ({e})")


@dataclass
class SeriesSpec:
    """Column mapping for one input price file"""
    ticker: str
    path: pathlib.Path
    date_column: str = "date"
    price_column: str = "close"
    date_format: str = "%Y-%m-%d"
    transform: str = "log_diff"

    def __post_init__(self):
        self.path = pathlib.Path(self.path)


@dataclass
class RunConfig:
    """Run configuration for every CLI verb"""

    # Core paths
    base_path: pathlib.Path = field(default_factory=lambda: pathlib.Path(__file__).resolve().parent.parent.parent)
    config_dir: Optional[pathlib.Path] = None  # Directory relative input paths resolve against
    output_dir: Optional[pathlib.Path] = None  # If None, defaults to base_path / "output"
    log_file: Optional[pathlib.Path] = None
    log_level: str = "INFO"

    # Inputs
    series: List[SeriesSpec] = field(default_factory=list)
    start_date: Optional[str] = "2015-01-06"
    end_date: Optional[str] = "2023-06-29"

    # VAR
    lag: Union[int, str] = "auto"
    p_max: int = 5
    horizon: int = 10
    intercept: bool = True

    # TVP-VAR
    kappa1: float = 0.99
    kappa2: float = 0.96
    prior_window: int = 200
    inflation: float = 4.0
    prior_mode: str = "window"

    # Sample split
    break_dates: List[str] = field(default_factory=lambda: ["2020-02-20"])
    segment_labels: List[str] = field(default_factory=list)

    # Diagnostics
    q2_lags: int = 20
    adf_max_lag: Optional[int] = None  # None = floor(12 * (T/100)^0.25)
    adf_spec: str = "constant"

    # Output / execution
    edge_threshold: float = 0.75
    seed: int = 42
    workers: int = 1
    fail_threshold: float = 0.01

    def __post_init__(self):
        if self.config_dir is None:
            self.config_dir = self.base_path
        self.series = [s if isinstance(s, SeriesSpec) else SeriesSpec(**s) for s in self.series]
        for spec in self.series:
            if not spec.path.is_absolute():
                spec.path = self.config_dir / spec.path

        if self.output_dir and not pathlib.Path(self.output_dir).is_absolute():
            self.output_dir = pathlib.Path.cwd() / self.output_dir
        elif not self.output_dir:
            self.output_dir = self.base_path / "output"
        self.output_dir = pathlib.Path(self.output_dir)

        if self.log_file and not pathlib.Path(self.log_file).is_absolute():
            self.log_file = self.base_path / self.log_file
        elif not self.log_file:
            self.log_file = self.base_path / "spillover.log"

    def apply_output_env(self) -> None:
        """Let SPILLOVER_OUTPUT_DIR replace the configured output directory."""
        env_output = os.environ.get(OUTPUT_DIR_ENV_VAR)
        if env_output:
            self.output_dir = pathlib.Path(env_output).resolve()

    @property
    def tickers(self) -> List[str]:
        return [s.ticker for s in self.series]

    def resolved_break_dates(self) -> List[date]:
        return [parse_date(d, "break_dates") for d in self.break_dates]

    def validate(self, require_inputs: bool = True) -> None:
        """Fail fast on out-of-range settings. Raises ConfigValidationError."""
        problems: List[str] = []

        start = parse_date(self.start_date, "start_date")
        end = parse_date(self.end_date, "end_date")
        if start and end and end < start:
            problems.append(f"end_date {end} is before start_date {start}")

        for name in ("kappa1", "kappa2"):
            value = getattr(self, name)
            if not (0.0 < value <= 1.0):
                problems.append(f"{name} must lie in (0, 1], got {value}")
        if self.horizon < 1:
            problems.append(f"horizon must be >= 1, got {self.horizon}")
        if not (0.0 <= self.edge_threshold <= 1.0):
            problems.append(f"edge_threshold must lie in [0, 1], got {self.edge_threshold}")
        if isinstance(self.lag, str):
            if self.lag != "auto":
                problems.append(f"lag must be 'auto' or a positive integer, got '{self.lag}'")
        elif isinstance(self.lag, bool) or not isinstance(self.lag, int) or self.lag < 1:
            problems.append(f"lag must be 'auto' or a positive integer, got {self.lag!r}")
        if self.p_max < 1:
            problems.append(f"p_max must be >= 1, got {self.p_max}")
        if self.prior_window < 2:
            problems.append(f"prior_window must be >= 2, got {self.prior_window}")
        if not (self.inflation == 0 or self.inflation >= 1):
            problems.append(f"inflation must be 0 (no scaling) or >= 1, got {self.inflation}")
        if self.prior_mode not in VALID_PRIOR_MODES:
            problems.append(f"prior_mode must be one of {VALID_PRIOR_MODES}, got '{self.prior_mode}'")
        if self.adf_spec not in VALID_ADF_SPECS:
            problems.append(f"adf_spec must be one of {VALID_ADF_SPECS}, got '{self.adf_spec}'")
        if self.q2_lags < 1:
            problems.append(f"q2_lags must be >= 1, got {self.q2_lags}")
        if self.workers < 1:
            problems.append(f"workers must be >= 1, got {self.workers}")
        if not (0.0 <= self.fail_threshold <= 1.0):
            problems.append(f"fail_threshold must lie in [0, 1], got {self.fail_threshold}")

        breaks = []
        for raw in self.break_dates:
            try:
                breaks.append(parse_date(raw, "break_dates"))
            except ConfigValidationError as e:
                problems.append(str(e))
        if any(b2 <= b1 for b1, b2 in zip(breaks, breaks[1:])):
            problems.append("break_dates must be strictly increasing")
        if self.segment_labels and len(self.segment_labels) != len(self.break_dates) + 1:
            problems.append("segment_labels needs exactly one label per segment (len(break_dates) + 1)")

        if require_inputs:
            if not self.series:
                problems.append("no input series configured")
            seen = set()
            for spec in self.series:
                if spec.ticker in seen:
                    problems.append(f"duplicate ticker '{spec.ticker}'")
                seen.add(spec.ticker)
                if spec.transform not in VALID_TRANSFORMS:
                    problems.append(f"{spec.ticker}: transform must be one of {VALID_TRANSFORMS}")
                if not spec.path.exists():
                    problems.append(f"{spec.ticker}: input file not found: {spec.path}")

        if problems:
            raise ConfigValidationError("; ".join(problems))

    def to_dict(self) -> Dict[str, Any]:
        """Resolved configuration for the run manifest.

        Machine-specific locations (base_path, config_dir, log_file) are left
        out so manifests compare equal across checkouts.
        """
        result: Dict[str, Any] = {}
        for field_name in self.__dataclass_fields__:
            if field_name in ("base_path", "config_dir", "log_file", "output_dir"):
                continue
            value = getattr(self, field_name)
            if field_name == "series":
                result[field_name] = [
                    {
                        "ticker": s.ticker,
                        "path": s.path.name,
                        "date_column": s.date_column,
                        "price_column": s.price_column,
                        "date_format": s.date_format,
                        "transform": s.transform,
                    }
                    for s in value
                ]
            elif isinstance(value, pathlib.Path):
                result[field_name] = str(value)
            else:
                result[field_name] = value
        return result
