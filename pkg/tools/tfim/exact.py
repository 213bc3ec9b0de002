"""Infinite-chain TFIM quantities and their assembly on a periodic ring.

C(n) = <sx_0 sx_n> is the n-th leading principal minor of the Toeplitz
matrix T[i, j] = G(i - j - 1) (diagonal G(-1), first column G(-1), G(0), ...,
first row G(-1), G(-2), ...). All minors come from one chain: the two-sided
Levinson recursion gives det T_{k+1} = det T_k * eps_{k+1} in O(n^2).
"""

from __future__ import annotations

import logging
import math

import numpy as np
import scipy.linalg

from errors import RecursionBreakdown

from .base import CorrelatorTable, GroundStateObservables, Method, QuadratureConfig
from .quadrature import DEFAULT_CONFIG, g_integrals

logger = logging.getLogger("qwd")

PIVOT_FLOOR = 1e-13
CLAMP_FLOOR = 1e-15


def magnetization(g: float) -> float:
    """Spontaneous order parameter <Mx>/L, used at every L."""
    if g < 0:
        raise ValueError(f"coupling g must be >= 0, got {g!r}")
    if g >= 1.0:
        return 0.0
    return (1.0 - g * g) ** 0.125


def toeplitz_kernel(
    g: float, n_max: int, cfg: QuadratureConfig = DEFAULT_CONFIG
) -> tuple[np.ndarray, np.ndarray]:
    """(first column, first row) of the n_max x n_max correlator matrix."""
    ms = range(-n_max, n_max - 1)
    kernel = dict(zip(ms, g_integrals(ms, g, cfg)))
    column = np.array([kernel[i - 1] for i in range(n_max)])
    row = np.array([kernel[-j - 1] for j in range(n_max)])
    return column, row


def levinson_minors(
    column: np.ndarray, row: np.ndarray, floor: float = PIVOT_FLOOR
) -> np.ndarray:
    """det T_1 .. det T_n of a (non-symmetric) Toeplitz matrix.

    forward solves T_k f = eps_k e_1 with f[0] = 1, backward solves
    T_k b = delta_k e_k with b[-1] = 1.
    """
    n_max = len(column)
    minors = np.empty(n_max)
    forward = np.ones(1)
    backward = np.ones(1)
    eps = delta = det = float(column[0])
    minors[0] = det
    for k in range(1, n_max):
        pivot = min(abs(eps), abs(delta))
        if pivot < floor:
            raise RecursionBreakdown(
                f"tfim_exact: minor-chain pivot {pivot:.3g} at order {k} "
                f"is within {floor:g} of zero"
            )
        alpha = float(np.dot(column[k:0:-1], forward))
        beta = float(np.dot(row[1 : k + 1], backward))
        grown = np.append(forward, 0.0)
        shifted = np.insert(backward, 0, 0.0)
        forward = grown - (alpha / delta) * shifted
        backward = shifted - (beta / eps) * grown
        eps, delta = eps - alpha * beta / delta, delta - alpha * beta / eps
        det *= eps
        minors[k] = det
    return minors


def pivoted_minors(column: np.ndarray, row: np.ndarray) -> np.ndarray:
    """Leading minors one at a time by LU with partial pivoting (O(n^4) total)."""
    matrix = scipy.linalg.toeplitz(column, row)
    return np.array(
        [scipy.linalg.det(matrix[:n, :n]) for n in range(1, len(column) + 1)]
    )


def _clamp(minors: np.ndarray, g: float) -> np.ndarray:
    values = np.array(minors, dtype=float)
    tiny = (np.abs(values) < CLAMP_FLOOR) & (values != 0.0)
    if tiny.any():
        logger.warning(
            "clamped %d correlator values below %g to zero (g=%r, %d negative)",
            int(tiny.sum()),
            CLAMP_FLOOR,
            g,
            int(np.count_nonzero(values[tiny] < 0)),
        )
        values[tiny] = 0.0
    return values


def correlator_table(
    g: float,
    n_max: int,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    method: Method = Method.LEVINSON_MINORS,
    fallback: bool = True,
) -> CorrelatorTable:
    if g < 0:
        raise ValueError(f"coupling g must be >= 0, got {g!r}")
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    column, row = toeplitz_kernel(g, n_max, cfg)

    minors = None
    if method is Method.LEVINSON_MINORS:
        try:
            minors = levinson_minors(column, row)
        except RecursionBreakdown as exc:
            if not fallback:
                raise
            logger.warning("%s; pivoted elimination for g=%r", exc, g)
            method = Method.LU_PER_N
    if minors is None:
        minors = pivoted_minors(column, row)

    values = _clamp(minors, g)
    rising = np.diff(values) > 10 * cfg.target_abs_tol
    if rising.any():
        logger.warning(
            "C(n) increases at %d steps for g=%r (first at n=%d)",
            int(rising.sum()),
            g,
            int(np.argmax(rising)) + 2,
        )
    return CorrelatorTable(
        g=g,
        n_max=n_max,
        values=tuple(float(v) for v in values),
        tol=cfg.target_abs_tol,
        method=method,
    )


def mx_moments_from_table(table: CorrelatorTable, L: int) -> GroundStateObservables:
    """Ring moments with minimal-image separations min(d, L - d)."""
    if L < 2:
        raise ValueError(f"ring needs L >= 2, got {L}")
    if table.n_max < L // 2:
        raise ValueError(f"L={L} needs C(n) up to {L // 2}, table has {table.n_max}")
    pairs = math.fsum(table.values[min(d, L - d) - 1] for d in range(1, L))
    return GroundStateObservables(
        g=table.g,
        L=L,
        mx_mean=L * magnetization(table.g),
        mx2_mean=L * (1.0 + pairs),
    )


def mx_moments(
    g: float,
    L: int,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    source=correlator_table,
) -> GroundStateObservables:
    """<Mx> and <Mx^2> on a ring of L sites.

    `source(g, n_max, cfg)` supplies the table; a store.TableStore.fetch slots
    in here to reuse cached tables.
    """
    if L < 2:
        raise ValueError(f"ring needs L >= 2, got {L}")
    return mx_moments_from_table(source(g, L // 2, cfg), L)
