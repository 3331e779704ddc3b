#!/usr/bin/env python3
"""
Base Workflow for SpilloverScope
================================

Abstract base class for the pipeline verbs, the result container they
return and the registry the CLI dispatches through.
"""

import pathlib
import time
from abc import ABC, abstractmethod
from typing import Any, Dict, List, Optional, Tuple

from core.config import RunConfig, parse_date
from core.errors import ConfigValidationError, InternalError, SpilloverError
from core.structures import ReturnPanel
from econometrics.data import build_panel, panel_to_csv
from econometrics.var import select_lag
from utils.file_utils import write_text_file
from utils.logger import RunLogger, get_logger
from utils.serialization import dumps


class WorkflowResult:
    """Standardized workflow result container"""

    def __init__(self, success: bool = False, data: Dict[str, Any] = None,
                 errors: list = None, execution_time: float = 0,
                 category: Optional[str] = None, exit_code: int = 0):
        self.success = success
        self.data = data or {}
        self.errors = errors or []
        self.execution_time = execution_time
        self.category = category
        self.exit_code = exit_code

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary format"""
        return {
            'success': self.success,
            'data': self.data,
            'errors': self.errors,
            'category': self.category,
            'exit_code': self.exit_code,
            'execution_time': self.execution_time
        }

    def add_error(self, error: str) -> None:
        """Add an error to the result"""
        self.errors.append(error)
        self.success = False


class BaseWorkflow(ABC):
    """Abstract base class for pipeline workflows"""

    verb: str = "base"
    requires_inputs: bool = True

    def __init__(self, config: RunConfig = None, logger: RunLogger = None):
        self.config = config or RunConfig()
        self.log = logger or get_logger()
        self.start_time = None
        self.written: List[pathlib.Path] = []

    @abstractmethod
    def execute(self, **params) -> Dict[str, Any]:
        """Run the verb; returns manifest data. Raise SpilloverError on failure."""

    def validate_params(self, **params) -> None:
        """Raise ConfigValidationError when the run cannot start"""
        self.config.validate(require_inputs=self.requires_inputs)

    def start_execution(self, **params) -> WorkflowResult:
        """Validate, execute and time the workflow, mapping failures onto exit codes"""
        self.start_time = time.time()
        self.written = []
        self.log.log_stage(f"{self.verb} ({self.__class__.__name__})")

        try:
            self.validate_params(**params)
            data = self.execute(**params)
            elapsed = time.time() - self.start_time
            self.log.info(f"Workflow '{self.verb}' completed in {elapsed:.2f}s, {len(self.written)} file(s) written")
            return WorkflowResult(success=True, data=data, execution_time=elapsed)
        except SpilloverError as e:
            e.stage = e.stage or self.verb
            self.log.error(f"Workflow '{self.verb}' failed [{e.category}]: {e}")
            return WorkflowResult(success=False, errors=[e.to_line(self.verb)], category=e.category,
                                  exit_code=e.exit_code, execution_time=time.time() - self.start_time)
        except Exception as e:
            self.log.exception(f"Workflow '{self.verb}' crashed: {e}")
            line = InternalError(f"{type(e).__name__}: {e}").to_line(self.verb)
            return WorkflowResult(success=False, errors=[line], category="internal",
                                  exit_code=1, execution_time=time.time() - self.start_time)

    # ---------------------------------------------------------------- shared steps

    @property
    def stage_dir(self) -> pathlib.Path:
        return pathlib.Path(self.config.output_dir) / self.verb

    def write(self, relative: str, text: str, base: Optional[pathlib.Path] = None) -> pathlib.Path:
        """Write one output file below the verb's directory (or ``base``)"""
        path = write_text_file((base or self.stage_dir) / relative, text, self.log)
        self.written.append(path)
        return path

    def write_manifest(self, data: Dict[str, Any]) -> pathlib.Path:
        """Resolved configuration plus run facts; no timestamps so reruns match"""
        base = pathlib.Path(self.config.output_dir)
        manifest = {
            "verb": self.verb,
            "config": self.config.to_dict(),
            **data,
            "files": sorted(p.relative_to(base).as_posix() for p in self.written if base in p.parents),
        }
        return write_text_file(self.stage_dir / "manifest.json", dumps(manifest), self.log)

    def load_panel(self) -> ReturnPanel:
        """Aligned return panel, also written to the stage as panel.csv"""
        panel = build_panel(
            self.config.series,
            start=parse_date(self.config.start_date, "start_date"),
            end=parse_date(self.config.end_date, "end_date"),
            logger=self.log,
        )
        self.write("panel.csv", panel_to_csv(panel))
        return panel

    def require_system(self, panel: ReturnPanel) -> None:
        if panel.n_vars < 2:
            raise ConfigValidationError(
                f"connectedness needs at least two series, got {panel.n_vars} ({', '.join(panel.tickers)})"
            )

    def resolve_lag(self, panel: ReturnPanel) -> Tuple[int, str]:
        """Configured lag, or the BIC choice over 1..p_max"""
        if self.config.lag == "auto":
            chosen = select_lag(panel, self.config.p_max, self.config.intercept, logger=self.log)
            return chosen, f"bic (p_max={self.config.p_max})"
        return int(self.config.lag), "fixed"


class WorkflowRegistry:
    """Registry mapping CLI verbs to workflow classes"""

    def __init__(self):
        self._workflows = {}

    def register(self, verb: str, workflow_class: type) -> None:
        """Register a workflow"""
        self._workflows[verb] = workflow_class

    def get_workflow(self, verb: str, **kwargs) -> Optional[BaseWorkflow]:
        """Get a workflow instance"""
        if verb not in self._workflows:
            return None
        return self._workflows[verb](**kwargs)

    def list_workflows(self) -> List[str]:
        """List all registered verbs"""
        return list(self._workflows.keys())


# Global registry instance
workflow_registry = WorkflowRegistry()
