#!/usr/bin/env python3
"""
Logging System for SpilloverScope
=================================

One run log per invocation. The file handler records DEBUG with call-site
detail; the console follows --log-level on stdout, because stderr carries
only the final error line. Wall-clock values appear here and nowhere in
the output tree.
"""

import sys
import time
import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Dict, Iterator, Optional, Tuple

FILE_FORMAT = "%(asctime)s | %(levelname)-8s | %(name)s | %(funcName)s:%(lineno)d | %(message)s"
CONSOLE_FORMAT = "%(asctime)s | %(levelname)-8s | %(message)s"


class RunLogger:
    """Pipeline logger: plain levels plus stage banners, progress and timings"""

    def __init__(self, log_file: Optional[Path] = None, level: str = "INFO", name: str = "spillover"):
        self.log_file = Path(log_file) if log_file else None
        self.name = name
        self.level = level.upper()
        self.logger = self._attach_handlers()
        self._progress_marks: Dict[str, int] = {}

    def _attach_handlers(self) -> logging.Logger:
        logger = logging.getLogger(self.name)
        logger.setLevel(logging.DEBUG)
        logger.propagate = False
        for handler in list(logger.handlers):
            handler.close()
        logger.handlers.clear()

        if self.log_file:
            try:
                self.log_file.parent.mkdir(parents=True, exist_ok=True)
                file_handler = logging.FileHandler(self.log_file, mode="a", encoding="utf-8")
            except OSError as e:
                print(f"Warning: run log {self.log_file} unavailable ({e}); console only", file=sys.stderr)
            else:
                file_handler.setLevel(logging.DEBUG)
                file_handler.setFormatter(logging.Formatter(FILE_FORMAT))
                logger.addHandler(file_handler)

        console = logging.StreamHandler(sys.stdout)
        console.setLevel(getattr(logging, self.level, logging.INFO))
        console.setFormatter(logging.Formatter(CONSOLE_FORMAT))
        logger.addHandler(console)
        return logger

    def debug(self, msg: str, *args, **kwargs):
        self.logger.debug(str(msg), *args, **kwargs)

    def info(self, msg: str, *args, **kwargs):
        self.logger.info(str(msg), *args, **kwargs)

    def warning(self, msg: str, *args, **kwargs):
        self.logger.warning(str(msg), *args, **kwargs)

    def error(self, msg: str, *args, exc_info: bool = False, **kwargs):
        """Pass exc_info=True inside except blocks for the traceback"""
        self.logger.error(str(msg), *args, exc_info=exc_info, **kwargs)

    def exception(self, msg: str, *args, **kwargs):
        self.logger.exception(str(msg), *args, **kwargs)

    def log_stage(self, title: str):
        """Banner opening a verb in the run log"""
        rule = "=" * 70
        self.info(f"\n{rule}\n{title}\n{rule}")

    def progress(self, label: str, done: int, total: int, step: int = 10):
        """INFO line each time ``done`` crosses another ``step`` percent of ``total``."""
        if total <= 0:
            return
        mark = min(100, done * 100 // total) // step * step
        if done == 0:
            self._progress_marks[label] = 0
            return
        if mark > self._progress_marks.get(label, 0):
            self._progress_marks[label] = mark
            self.info(f"{label}: {mark}% ({done}/{total})")

    @contextmanager
    def timed(self, label: str) -> Iterator[None]:
        """Log the wall time of the enclosed block at DEBUG"""
        started = time.perf_counter()
        try:
            yield
        finally:
            self.debug(f"{label} took {time.perf_counter() - started:.3f}s")


_LOGGERS: Dict[Tuple[str, Optional[str], str], RunLogger] = {}


def get_logger(name: str = "spillover", log_file: Optional[Path] = None, level: str = "INFO") -> RunLogger:
    """Shared RunLogger per (name, log file, console level)

    Args:
        name: Logger name shown in the run log
        log_file: Run log path (None: console only)
        level: Console level; the file always records DEBUG
    """
    key = (name, str(log_file) if log_file else None, level.upper())
    if key not in _LOGGERS:
        _LOGGERS[key] = RunLogger(log_file=log_file, level=level, name=name)
    return _LOGGERS[key]


LIBRARY_LEVEL = "WARNING"


def library_logger(name: str) -> RunLogger:
    """Fallback for library calls made without a run logger: console at WARNING, no file"""
    return get_logger(name=name, level=LIBRARY_LEVEL)
