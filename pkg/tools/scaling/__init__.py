"""Exponent registry: get_mode(name) returns the sweep behind a SweepSpec mode."""

from __future__ import annotations

from .base import FIGURE_SIZES, WINDOW_MARGIN, FitResult, Mode, SweepSpec
from .fit import fit_power_law, fit_with_offset
from .sweeps import (
    DEFAULT_CONTEXT,
    SweepContext,
    distance_curve,
    distance_exponent_curve,
    distance_size_scaling,
    distance_sweep,
    leading_exponent,
    leading_sweep,
    qfi_curve,
    qfi_size_scaling,
    qfi_sweep,
    subleading_curves,
    subleading_exponent,
    subleading_sweep,
)


def _single(grid: tuple[float, ...], name: str) -> float:
    if len(grid) != 1:
        raise ValueError(f"mode needs a single {name}, got {len(grid)} values")
    return grid[0]


def _qfi(spec: SweepSpec, ctx: SweepContext):
    return qfi_sweep(spec.sizes, ctx)


def _d2(spec: SweepSpec, ctx: SweepContext):
    g_rho = _single(spec.g_rho_grid, "g_rho")
    g_sigma = _single(spec.g_sigma_grid, "g_sigma")
    return distance_sweep(g_rho, g_sigma, spec.sizes, ctx)


def _subleading(spec: SweepSpec, ctx: SweepContext):
    return subleading_sweep(spec.g_sigma_grid, spec.L, ctx)


def _leading(spec: SweepSpec, ctx: SweepContext):
    g_sigma = _single(spec.g_sigma_grid, "g_sigma")
    return leading_sweep(spec.g_rho_grid, g_sigma, spec.L, ctx)


_REGISTRY = {
    Mode.QFI_VS_L: _qfi,
    Mode.D2_VS_L: _d2,
    Mode.SUBLEADING_VS_G: _subleading,
    Mode.LEADING_VS_G: _leading,
}


def get_mode(name: str):
    key = (name or "").strip().lower()
    try:
        return _REGISTRY[Mode(key)]
    except ValueError:
        raise ValueError(
            f"unknown mode '{key}'; valid: {', '.join(available())}"
        ) from None


def available() -> list:
    return sorted(mode.value for mode in _REGISTRY)


def run_sweep(spec: SweepSpec, ctx: SweepContext = DEFAULT_CONTEXT):
    """(rows, FitResult) for a validated SweepSpec."""
    return get_mode(spec.mode.value)(spec, ctx.with_tol(spec.quad_tol))


__all__ = [
    "FIGURE_SIZES",
    "WINDOW_MARGIN",
    "FitResult",
    "Mode",
    "SweepContext",
    "SweepSpec",
    "available",
    "distance_curve",
    "distance_exponent_curve",
    "distance_size_scaling",
    "fit_power_law",
    "fit_with_offset",
    "get_mode",
    "leading_exponent",
    "qfi_curve",
    "qfi_size_scaling",
    "run_sweep",
    "subleading_curves",
    "subleading_exponent",
]
