"""
File System Utilities for SpilloverScope
========================================

Deterministic text output: UTF-8, '\\n' newlines, parents created on demand,
fixed significant-digit number rendering.
"""

import math
import pathlib
from typing import Any, Optional

GenericLogger = Any


def ensure_directory(dir_path: pathlib.Path, logger: Optional[GenericLogger] = None) -> pathlib.Path:
    """Create ``dir_path`` (and parents) if missing; a file in the way raises NotADirectoryError."""
    dir_path = pathlib.Path(dir_path)
    if dir_path.exists() and not dir_path.is_dir():
        raise NotADirectoryError(f"output path exists but is not a directory: {dir_path}")
    if not dir_path.exists():
        dir_path.mkdir(parents=True, exist_ok=True)
        if logger:
            logger.debug(f"Created directory: {dir_path}")
    return dir_path


def write_text_file(path: pathlib.Path, text: str, logger: Optional[GenericLogger] = None) -> pathlib.Path:
    """Write UTF-8 text with '\\n' newlines, creating parent directories."""
    path = pathlib.Path(path)
    ensure_directory(path.parent, logger)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    if logger:
        logger.debug(f"Wrote {path} ({len(text)} chars)")
    return path


def format_sig(value: float, digits: int = 12) -> str:
    """Fixed significant-digit rendering; non-finite values as 'nan'/'inf'/'-inf'."""
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    text = f"{value:.{digits}g}"
    return "0" if text == "-0" else text
