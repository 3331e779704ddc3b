"""
Workflows Package for SpilloverScope
====================================

One workflow per CLI verb, registered in ``workflow_registry``.
"""

from .base_workflow import BaseWorkflow, WorkflowResult, WorkflowRegistry, workflow_registry
from .diagnostics_workflow import DiagnosticsWorkflow
from .static_workflow import StaticWorkflow
from .dynamic_workflow import DynamicWorkflow
from .network_workflow import NetworkWorkflow
from .simulate_workflow import SimulateWorkflow

__all__ = [
    'BaseWorkflow',
    'WorkflowResult',
    'WorkflowRegistry',
    'workflow_registry',
    'DiagnosticsWorkflow',
    'StaticWorkflow',
    'DynamicWorkflow',
    'NetworkWorkflow',
    'SimulateWorkflow'
]
