"""TFIM ground-state physics: kernel quadrature, exact correlators, ED oracle."""

from __future__ import annotations

from .base import (
    G_CRITICAL,
    CorrelatorTable,
    GroundStateObservables,
    Kernel,
    KernelSpec,
    Method,
    QuadratureConfig,
)
from .exact import correlator_table, magnetization, mx_moments, mx_moments_from_table
from .oracle import (
    EDSolution,
    ed_mx_moments,
    ed_xx_correlator,
    ground_state,
    size_extrapolated,
)
from .quadrature import DEFAULT_CONFIG, g_integral, l_integral

__all__ = [
    "G_CRITICAL",
    "DEFAULT_CONFIG",
    "CorrelatorTable",
    "GroundStateObservables",
    "EDSolution",
    "Kernel",
    "KernelSpec",
    "Method",
    "QuadratureConfig",
    "correlator_table",
    "ed_mx_moments",
    "ed_xx_correlator",
    "g_integral",
    "ground_state",
    "l_integral",
    "magnetization",
    "mx_moments",
    "mx_moments_from_table",
    "size_extrapolated",
]
