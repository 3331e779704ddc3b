"""
Econometrics Package for SpilloverScope
=======================================

Ingest, diagnostics, static and time-varying VAR estimation,
variance-decomposition connectedness and network export.
"""

from .data import build_panel, load_csv, align, to_returns, split_panel
from .var import fit_var, select_lag, ma_coefficients
from .tvp import TvpConfig, init_prior, kalman_filter, snapshot
from .connectedness import gfevd, indices, dynamic_indices, average_report
from .network import build_network, emit_dot, emit_json

__all__ = [
    'build_panel',
    'load_csv',
    'align',
    'to_returns',
    'split_panel',
    'fit_var',
    'select_lag',
    'ma_coefficients',
    'TvpConfig',
    'init_prior',
    'kalman_filter',
    'snapshot',
    'gfevd',
    'indices',
    'dynamic_indices',
    'average_report',
    'build_network',
    'emit_dot',
    'emit_json'
]
