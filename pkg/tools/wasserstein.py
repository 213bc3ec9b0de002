"""Order-2 quantum Wasserstein distance between pure ground states, O = Mx.

For pure states the optimal coupling is not needed:
    D(rho, sigma)^2 = 1/2 <O^2>_rho + 1/2 <O^2>_sigma - <O>_rho <O>_sigma
and the self-distance is the variance, F_Q / 4.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from errors import NegativeVariance, SizeMismatch
from tfim.base import G_CRITICAL, GroundStateObservables

logger = logging.getLogger("qwd")

VARIANCE_SLACK = 1e-9


@dataclass(frozen=True)
class DistanceResult:
    d_squared: float
    term_rho: float
    term_sigma: float
    cross: float
    g_rho: float
    g_sigma: float
    L: int

    @property
    def per_site_sq(self) -> float:
        """D^2 / L^2."""
        return self.d_squared / (self.L * self.L)

    @property
    def g_tilde_rho(self) -> float:
        return self.g_rho - G_CRITICAL

    @property
    def g_tilde_sigma(self) -> float:
        return self.g_sigma - G_CRITICAL


def distance_squared(
    a: GroundStateObservables, b: GroundStateObservables
) -> DistanceResult:
    if a.L != b.L:
        raise SizeMismatch(f"wasserstein: states live on L={a.L} and L={b.L}")
    term_rho = 0.5 * a.mx2_mean
    term_sigma = 0.5 * b.mx2_mean
    cross = a.mx_mean * b.mx_mean
    return DistanceResult(
        d_squared=term_rho + term_sigma - cross,
        term_rho=term_rho,
        term_sigma=term_sigma,
        cross=cross,
        g_rho=a.g,
        g_sigma=b.g,
        L=a.L,
    )


def qfi(a: GroundStateObservables) -> float:
    """Quantum Fisher information of Mx, 4 D(rho, rho)^2."""
    self_distance = distance_squared(a, a).d_squared
    if self_distance < -VARIANCE_SLACK:
        raise NegativeVariance(
            f"wasserstein: Var(Mx) = {self_distance:.3g} < 0 at g={a.g!r}, "
            f"L={a.L}; the correlator table is inconsistent"
        )
    if self_distance < 0:
        logger.debug("clamping Var(Mx)=%.3g to zero at g=%r", self_distance, a.g)
        return 0.0
    return 4.0 * self_distance
