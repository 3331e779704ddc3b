"""
Core Components for SpilloverScope
==================================

Configuration, domain data structures and the error hierarchy shared by
every pipeline stage.
"""

from .config import RunConfig, SeriesSpec
from .errors import (
    SpilloverError,
    ConfigValidationError,
    DataFaultError,
    NumericalFailureError,
)
from .structures import ReturnPanel, VarEstimate, TvpPath, ConnectednessReport, SpilloverNetwork

__all__ = [
    'RunConfig',
    'SeriesSpec',
    'SpilloverError',
    'ConfigValidationError',
    'DataFaultError',
    'NumericalFailureError',
    'ReturnPanel',
    'VarEstimate',
    'TvpPath',
    'ConnectednessReport',
    'SpilloverNetwork'
]
