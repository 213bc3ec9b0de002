"""Value types shared by the TFIM modules: quadrature settings, kernel
descriptors, correlator tables and ground-state observables.

Couplings follow H = -J sum sx sx - h sum sz with J = 1 and g = h/J; the
critical point is g = 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

G_CRITICAL = 1.0


class Kernel(str, Enum):
    L_KERNEL = "L"
    G_KERNEL = "G"


class Method(str, Enum):
    LEVINSON_MINORS = "LEVINSON_MINORS"
    LU_PER_N = "LU_PER_N"


@dataclass(frozen=True)
class KernelSpec:
    """One kernel integral: L(n) or G(m) at coupling g."""

    harmonic_index: int
    coupling_g: float
    kind: Kernel = Kernel.G_KERNEL

    def __post_init__(self):
        if self.coupling_g < 0:
            raise ValueError(f"coupling g must be >= 0, got {self.coupling_g!r}")


@dataclass(frozen=True)
class QuadratureConfig:
    """Composite Gauss-Legendre settings.

    `panels` is the minimum panel count; the rule adds panels for high
    harmonics and doubles them on each refinement until two successive
    estimates agree within `target_abs_tol`.
    """

    nodes_per_panel: int = 32
    panels: int = 8
    target_abs_tol: float = 1e-12
    refinement_limit: int = 6

    def __post_init__(self):
        if self.nodes_per_panel < 8:
            raise ValueError("nodes_per_panel must be >= 8")
        if self.panels < 1:
            raise ValueError("panels must be >= 1")
        if not self.target_abs_tol > 0:
            raise ValueError("target_abs_tol must be > 0")
        if self.refinement_limit < 1:
            raise ValueError("refinement_limit must be >= 1")

    def with_tol(self, tol: float) -> QuadratureConfig:
        return replace(self, target_abs_tol=tol)

    def doubled(self) -> QuadratureConfig:
        return replace(self, nodes_per_panel=2 * self.nodes_per_panel)


@dataclass(frozen=True)
class CorrelatorTable:
    """C(n) = <sx_0 sx_n> of the infinite chain for n = 1..n_max."""

    g: float
    n_max: int
    values: tuple[float, ...]
    tol: float
    method: Method = Method.LEVINSON_MINORS

    def __post_init__(self):
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")
        if len(self.values) != self.n_max:
            raise ValueError(
                f"expected {self.n_max} correlator values, got {len(self.values)}"
            )

    def at(self, n: int) -> float:
        """C(n), 1-based."""
        if not 1 <= n <= self.n_max:
            raise IndexError(f"n={n} outside 1..{self.n_max}")
        return self.values[n - 1]

    def prefix(self, n_max: int) -> CorrelatorTable:
        if n_max > self.n_max:
            raise ValueError(f"table holds n <= {self.n_max}, asked for {n_max}")
        return replace(self, n_max=n_max, values=self.values[:n_max])


@dataclass(frozen=True)
class GroundStateObservables:
    """<Mx> and <Mx^2> of one ground state on a ring of L sites."""

    g: float
    L: int
    mx_mean: float
    mx2_mean: float
    # How the moments were obtained; informational only.
    source: str = field(default="exact", compare=False)

    @property
    def variance(self) -> float:
        return self.mx2_mean - self.mx_mean * self.mx_mean

    @property
    def g_tilde(self) -> float:
        return self.g - G_CRITICAL
