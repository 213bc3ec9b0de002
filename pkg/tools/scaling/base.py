"""Fit results and sweep descriptions for the exponent extractions."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

# System sizes behind the size-scaling figures.
FIGURE_SIZES = (20, 40, 80, 120, 150, 200, 250, 300, 350, 400, 450, 500, 600, 700)
MIN_POINTS = 3
# Makes "<<" operational: xi < L / margin (thermodynamic) or xi > margin * L.
WINDOW_MARGIN = 10.0


class Mode(str, Enum):
    QFI_VS_L = "qfi"
    D2_VS_L = "d2"
    SUBLEADING_VS_G = "subleading"
    LEADING_VS_G = "leading"


@dataclass(frozen=True)
class FitResult:
    """OLS of ln y on ln x: y ~ amplitude * x**exponent (+ offset)."""

    exponent: float
    amplitude: float
    stderr: float
    r_squared: float
    window: tuple[float, float]
    n_points: int
    offset: float = 0.0

    def as_row(self) -> dict:
        return {
            "exponent": self.exponent,
            "amplitude": self.amplitude,
            "stderr": self.stderr,
            "r_squared": self.r_squared,
            "window_min": self.window[0],
            "window_max": self.window[1],
            "n_points": self.n_points,
            "offset": self.offset,
        }


def _as_grid(value) -> tuple[float, ...]:
    if isinstance(value, (int, float)):
        return (float(value),)
    return tuple(float(v) for v in value)


@dataclass(frozen=True)
class SweepSpec:
    mode: Mode
    sizes: tuple[int, ...] = FIGURE_SIZES
    g_rho: float | tuple[float, ...] = 1.0
    g_sigma: float | tuple[float, ...] = 1.0
    L: int = 700
    quad_tol: float = 1e-12

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        if any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise ValueError(f"sizes must be strictly increasing: {sizes}")
        for name in ("g_rho", "g_sigma"):
            grid = _as_grid(getattr(self, name))
            if any(v <= 0 for v in grid):
                raise ValueError(f"{name} grid must be strictly positive")
            if any(b <= a for a, b in zip(grid, grid[1:])):
                raise ValueError(f"{name} grid must be sorted and distinct")
        if self.L < 2:
            raise ValueError(f"L must be >= 2, got {self.L}")
        if not self.quad_tol > 0:
            raise ValueError("quad_tol must be > 0")
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "sizes", sizes)

    @property
    def g_rho_grid(self) -> tuple[float, ...]:
        return _as_grid(self.g_rho)

    @property
    def g_sigma_grid(self) -> tuple[float, ...]:
        return _as_grid(self.g_sigma)
