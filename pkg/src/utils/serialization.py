#!/usr/bin/env python3
"""
Serialization Utilities for SpilloverScope
==========================================

Custom JSON encoding for the numeric structures used in the project.
Floats go through Python's repr, so decoding reproduces them exactly.
"""

import json
from dataclasses import is_dataclass, fields
from datetime import datetime, date
from enum import Enum
from pathlib import Path
from typing import Any

import numpy as np


class CustomJsonEncoder(json.JSONEncoder):
    """Custom JSON Encoder for project-specific data structures."""
    def default(self, o: Any) -> Any:
        if is_dataclass(o) and not isinstance(o, type):
            # Shallow field walk: asdict() would deep-copy large arrays first
            return {f.name: getattr(o, f.name) for f in fields(o)}
        elif isinstance(o, np.ndarray):
            return o.tolist()
        elif isinstance(o, np.integer):
            return int(o)
        elif isinstance(o, np.floating):
            return float(o)
        elif isinstance(o, np.bool_):
            return bool(o)
        elif isinstance(o, (datetime, date)):
            return o.isoformat()
        elif isinstance(o, Enum):
            return o.value
        elif isinstance(o, Path):
            return str(o)

        # Let the base class default method raise the TypeError for other types
        return super().default(o)


def dumps(obj: Any, indent: int = 2) -> str:
    """Deterministic JSON text (insertion-ordered keys, trailing newline)."""
    return json.dumps(obj, cls=CustomJsonEncoder, indent=indent, allow_nan=True) + "\n"
