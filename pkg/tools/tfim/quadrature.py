"""Kernel integrals on [0, pi] behind the Toeplitz correlators.

    G(m) = 1/pi int_0^pi [cos(km)(g + cos k) - sin(km) sin k] / w(k) dk
    L(n) = 1/pi int_0^pi cos(nk) / sqrt(1 + 1/g^2 + (2/g) cos k) dk

with w(k) = sqrt(1 + g^2 + 2g cos k). Both are evaluated by composite
Gauss-Legendre with exactly rounded (fsum) accumulation. Near g = 1 the only
difficult point is k = pi, where w vanishes; the integrands are written with
w^2 = (1 - g)^2 + 4g cos^2(k/2) and the G numerator as
(g - 1) cos(km) + 2 cos(k(m + 1/2)) cos(k/2), which stay accurate there.
"""

from __future__ import annotations

import logging
import math
from functools import lru_cache

import numpy as np

from errors import NonConvergence, SingularIntegrand

from .base import Kernel, KernelSpec, QuadratureConfig

logger = logging.getLogger("qwd")

DEFAULT_CONFIG = QuadratureConfig()

# L(n) alone diverges logarithmically at g = 1; refuse inside this band.
SINGULAR_BAND = 0.1
# Above this coupling the first-order 1/g expansion is exact to ~1e-12.
LARGE_G = 1e6
# Harmonics per panel: ceil(|m|/4) panels keeps >= 8 nodes per period.
HARMONICS_PER_PANEL = 4
GRADING_RATIO = 0.25
MAX_GRADING_LEVELS = 40


@lru_cache(maxsize=None)
def _legendre(nodes: int) -> tuple[np.ndarray, np.ndarray]:
    t, w = np.polynomial.legendre.leggauss(nodes)
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


def panel_breakpoints(
    m: int, g: float, cfg: QuadratureConfig, level: int = 0
) -> np.ndarray:
    """Panel edges on [0, pi] for harmonic m at refinement `level`.

    Uniform panels, doubled per level, plus geometric grading into the last
    panel when the k = pi feature (width |1 - g|) is narrower than a panel.
    """
    count = max(cfg.panels, math.ceil(abs(m) / HARMONICS_PER_PANEL)) * 2**level
    edges = np.linspace(0.0, math.pi, count + 1)
    width = math.pi / count
    delta = abs(1.0 - g)
    if 0.0 < delta < width:
        floor = max(delta * GRADING_RATIO, 1e-15)
        levels = math.ceil(math.log(width / floor) / -math.log(GRADING_RATIO))
        levels = min(max(levels, 1), MAX_GRADING_LEVELS)
        graded = math.pi - width * GRADING_RATIO ** np.arange(1, levels + 1)
        edges = np.concatenate([edges[:-1], graded, [math.pi]])
    return edges


def _integrand(spec: KernelSpec):
    m, g = spec.harmonic_index, spec.coupling_g

    if spec.kind is Kernel.G_KERNEL:

        def combined(k):
            half = np.cos(0.5 * k)
            numerator = (g - 1.0) * np.cos(m * k) + 2.0 * np.cos((m + 0.5) * k) * half
            return numerator / np.sqrt((1.0 - g) ** 2 + 4.0 * g * half * half)

        return combined

    def rescaled(k):
        # g / w(k): the written L-form with the 1/g factors cleared.
        half = np.cos(0.5 * k)
        return g * np.cos(m * k) / np.sqrt((1.0 - g) ** 2 + 4.0 * g * half * half)

    return rescaled


def _composite(f, edges: np.ndarray, nodes: int) -> float:
    t, w = _legendre(nodes)
    left = edges[:-1, None]
    right = edges[1:, None]
    half = 0.5 * (right - left)
    k = half * t + 0.5 * (left + right)
    return math.fsum(((half * w) * f(k)).ravel()) / math.pi


def integrate_kernel(spec: KernelSpec, cfg: QuadratureConfig = DEFAULT_CONFIG):
    """(value, error estimate) for one kernel integral, by panel doubling."""
    f = _integrand(spec)
    m, g = spec.harmonic_index, spec.coupling_g
    previous = _composite(f, panel_breakpoints(m, g, cfg), cfg.nodes_per_panel)
    error = math.inf
    for level in range(1, cfg.refinement_limit + 1):
        current = _composite(
            f, panel_breakpoints(m, g, cfg, level), cfg.nodes_per_panel
        )
        error = abs(current - previous)
        if error <= cfg.target_abs_tol:
            return current, error
        logger.debug(
            "%s(%d) at g=%r: delta %.3g at level %d",
            spec.kind.value,
            m,
            g,
            error,
            level,
        )
        previous = current
    raise NonConvergence(
        f"quadrature: {spec.kind.value}({m}) at g={g!r} did not reach "
        f"{cfg.target_abs_tol:g} in {cfg.refinement_limit} refinements "
        f"(last delta {error:.3g})"
    )


def l_integral(n: int, g: float, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    if n < 0:
        raise ValueError(f"harmonic index must be >= 0, got {n}")
    spec = KernelSpec(n, g, Kernel.L_KERNEL)
    if g == 0.0:
        return 0.0
    if abs(g - 1.0) < SINGULAR_BAND:
        raise SingularIntegrand(
            f"quadrature: L({n}) diverges at g = 1 (g={g!r}); use g_integral"
        )
    if g > LARGE_G:
        return (1.0 if n == 0 else 0.0) - (0.5 / g if n == 1 else 0.0)
    return integrate_kernel(spec, cfg)[0]


def g_integral(m: int, g: float, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    spec = KernelSpec(m, g, Kernel.G_KERNEL)
    if g == 0.0:
        return 1.0 if m == -1 else 0.0
    if g > LARGE_G:
        return (
            (1.0 if m == 0 else 0.0)
            + (0.5 / g if m == -1 else 0.0)
            - (0.5 / g if m == 1 else 0.0)
        )
    return integrate_kernel(spec, cfg)[0]


def g_integrals(ms, g: float, cfg: QuadratureConfig = DEFAULT_CONFIG) -> tuple:
    return tuple(g_integral(m, g, cfg) for m in ms)
