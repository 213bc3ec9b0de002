"""Parameter sweeps and the exponent extractions built on them.

One correlator table per coupling, computed at the largest n_max a sweep
needs and reused for every L through the prefix property. Tables are
independent, so they go through the context's `mapper` (builtin `map`, or an
executor's `map` owned by the CLI). Keys are sorted before mapping and
results are matched back by key, so rows never depend on the parallelism.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, replace
from functools import partial
from typing import Callable

from errors import AssumptionViolation, InsufficientPoints, WindowEmpty
from tfim.base import G_CRITICAL, CorrelatorTable, QuadratureConfig
from tfim.exact import correlator_table, mx_moments_from_table
from tfim.quadrature import DEFAULT_CONFIG
from wasserstein import distance_squared, qfi

from .base import MIN_POINTS, WINDOW_MARGIN, FitResult
from .fit import fit_power_law

logger = logging.getLogger("qwd")

QFI_EXPONENT = 7 / 4
# A_rho for the fully ordered reference state.
SUBLEADING_CONSTANT = 0.5
LOCAL_TERM = 0.5


@dataclass(frozen=True)
class SweepContext:
    """Where tables come from and how they are scheduled."""

    cfg: QuadratureConfig = DEFAULT_CONFIG
    source: Callable = correlator_table
    mapper: Callable = map
    margin: float = WINDOW_MARGIN

    def with_tol(self, quad_tol: float | None) -> SweepContext:
        if quad_tol is None or quad_tol == self.cfg.target_abs_tol:
            return self
        return replace(self, cfg=self.cfg.with_tol(quad_tol))

    def tables(self, gs, n_max: int) -> dict[float, CorrelatorTable]:
        keys = sorted({float(g) for g in gs})
        fetch = partial(self.source, n_max=n_max, cfg=self.cfg)
        tables = list(self.mapper(fetch, keys))
        logger.info("computed %d correlator tables (n_max=%d)", len(keys), n_max)
        return dict(zip(keys, tables))


DEFAULT_CONTEXT = SweepContext()


def _check_sizes(sizes) -> list[int]:
    sizes = sorted(int(L) for L in sizes)
    odd = [L for L in sizes if L % 2 or L < 2]
    if odd:
        raise ValueError(f"scaling: sizes must be even and >= 2, got {odd}")
    return sizes


def _size_fit(rows, column: str) -> FitResult:
    return fit_power_law([(row["L"], row[column]) for row in rows])


# -- rows ------------------------------------------------------------------


def qfi_curve(g_grid, sizes, ctx: SweepContext = DEFAULT_CONTEXT) -> list[dict]:
    """F_Q and F_Q / L^{7/4} for every (g, L)."""
    sizes = _check_sizes(sizes)
    tables = ctx.tables(g_grid, max(sizes) // 2)
    rows = []
    for g in sorted(tables):
        for L in sizes:
            obs = mx_moments_from_table(tables[g], L)
            value = qfi(obs)
            rows.append(
                {
                    "g": g,
                    "L": L,
                    "mx_mean": obs.mx_mean,
                    "mx2_mean": obs.mx2_mean,
                    "qfi": value,
                    "qfi_scaled": value / L**QFI_EXPONENT,
                }
            )
    return rows


def _distance_row(table_rho, table_sigma, L: int) -> dict:
    result = distance_squared(
        mx_moments_from_table(table_rho, L), mx_moments_from_table(table_sigma, L)
    )
    return {
        "L": L,
        "g_rho": result.g_rho,
        "g_sigma": result.g_sigma,
        "term_rho": result.term_rho,
        "term_sigma": result.term_sigma,
        "cross": result.cross,
        "d_squared": result.d_squared,
        "d_squared_per_site": result.per_site_sq,
    }


def distance_rows(
    g_rho_set, g_sigma_grid, sizes, ctx: SweepContext = DEFAULT_CONTEXT
) -> list[dict]:
    """D^2 for every (g_rho, g_sigma, L) combination."""
    sizes = _check_sizes(sizes)
    tables = ctx.tables(list(g_rho_set) + list(g_sigma_grid), max(sizes) // 2)
    return [
        _distance_row(tables[float(a)], tables[float(b)], L)
        for a in sorted(g_rho_set)
        for b in sorted(g_sigma_grid)
        for L in sizes
    ]


def distance_curve(
    g_rho_set, g_sigma_grid, L: int, ctx: SweepContext = DEFAULT_CONTEXT
) -> list[dict]:
    """D^2/L^2 against g_sigma, one curve per g_rho."""
    return distance_rows(g_rho_set, g_sigma_grid, [L], ctx)


def subleading_curves(
    g_sigma_grid, sizes, ctx: SweepContext = DEFAULT_CONTEXT, include_local=True
) -> list[dict]:
    """(D^2/L^2 - 1/2) L against g_sigma - 1, with rho fully ordered (g = 0).

    A point enters only if its correlation length 1/(g - 1) is below L/margin.
    Without the local term the on-site contribution 1/2 is removed as well.
    """
    sizes = _check_sizes(sizes)
    tables = ctx.tables([0.0] + list(g_sigma_grid), max(sizes) // 2)
    rows = []
    for L in sizes:
        for g in sorted(float(g) for g in g_sigma_grid):
            g_tilde = g - G_CRITICAL
            if g_tilde <= 0 or 1.0 / g_tilde >= L / ctx.margin:
                continue
            row = _distance_row(tables[0.0], tables[g], L)
            value = (row["d_squared_per_site"] - SUBLEADING_CONSTANT) * L
            if not include_local:
                value -= LOCAL_TERM
            row["g_tilde"] = g_tilde
            row["subleading"] = value
            rows.append(row)
    return rows


def leading_rows(
    g_rho_grid, g_sigma: float, L: int, ctx: SweepContext = DEFAULT_CONTEXT
) -> list[dict]:
    """D^2/L^2 against 1 - g_rho for ordered rho and a fixed disordered sigma.

    `leading` drops half of Var(Mx)_rho and half of <Mx^2>_sigma from D^2,
    leaving (<Mx>_rho^2 / 2 - <Mx>_rho <Mx>_sigma) / L^2.
    """
    inside = sorted(float(g) for g in g_rho_grid if g < G_CRITICAL)
    if not inside:
        return []
    tables = ctx.tables(inside + [g_sigma], _check_sizes([L])[0] // 2)
    rows = []
    for g in inside:
        row = _distance_row(tables[g], tables[float(g_sigma)], L)
        mx_rho = mx_moments_from_table(tables[g], L).mx_mean
        row["g_tilde"] = g - G_CRITICAL
        row["ordered_distance"] = G_CRITICAL - g
        row["leading"] = (0.5 * mx_rho * mx_rho - row["cross"]) / (L * L)
        rows.append(row)
    return rows


def distance_exponent_curve(
    g_tildes, sizes, ctx: SweepContext = DEFAULT_CONTEXT
) -> list[dict]:
    """Size exponent of D^2 for pairs g_rho = 1 - t, g_sigma = 1 + t, per t."""
    ts = sorted(float(t) for t in g_tildes)
    if any(t < 0 or t >= G_CRITICAL for t in ts):
        raise ValueError(f"scaling: reduced couplings must lie in [0, 1), got {ts}")
    sizes = _check_sizes(sizes)
    couplings = [G_CRITICAL - t for t in ts] + [G_CRITICAL + t for t in ts]
    tables = ctx.tables(couplings, max(sizes) // 2)
    rows = []
    for t in ts:
        points = [
            _distance_row(tables[G_CRITICAL - t], tables[G_CRITICAL + t], L)
            for L in sizes
        ]
        fit = _size_fit(points, "d_squared")
        rows.append({"g_tilde": t, **fit.as_row()})
    return rows


# -- exponent extractions ----------------------------------------------------


def qfi_sweep(sizes, ctx: SweepContext = DEFAULT_CONTEXT):
    if len(sizes) < MIN_POINTS:
        raise InsufficientPoints(
            f"scaling: need >= {MIN_POINTS} sizes for a fit, got {len(sizes)}"
        )
    rows = qfi_curve([G_CRITICAL], sizes, ctx)
    return rows, _size_fit(rows, "qfi")


def distance_sweep(
    g_rho: float, g_sigma: float, sizes, ctx: SweepContext = DEFAULT_CONTEXT
):
    for name, g in (("g_rho", g_rho), ("g_sigma", g_sigma)):
        if not 0 < g < 2:
            raise ValueError(f"scaling: {name} must lie in (0, 2), got {g!r}")
    if len(sizes) < MIN_POINTS:
        raise InsufficientPoints(
            f"scaling: need >= {MIN_POINTS} sizes for a fit, got {len(sizes)}"
        )
    g_tilde = max(abs(g_rho - G_CRITICAL), abs(g_sigma - G_CRITICAL))
    if g_tilde > 0 and 1.0 / g_tilde < ctx.margin * max(sizes):
        message = (
            f"correlation length {1.0 / g_tilde:.3g} is not >> L={max(sizes)} "
            f"(margin {ctx.margin:g}); the critical size scaling does not apply"
        )
        logger.warning("%s", message)
        warnings.warn(message, AssumptionViolation, stacklevel=2)
    rows = distance_rows([g_rho], [g_sigma], sizes, ctx)
    return rows, _size_fit(rows, "d_squared")


def subleading_sweep(
    g_sigma_grid, L: int, ctx: SweepContext = DEFAULT_CONTEXT, include_local=True
):
    rows = subleading_curves(g_sigma_grid, [L], ctx, include_local=include_local)
    if not rows:
        raise WindowEmpty(
            f"scaling: no g_sigma in the grid has 1/(g-1) < L/{ctx.margin:g} "
            f"at L={L}"
        )
    fit = fit_power_law([(row["g_tilde"], row["subleading"]) for row in rows])
    return rows, fit


def leading_sweep(
    g_rho_grid, g_sigma: float, L: int, ctx: SweepContext = DEFAULT_CONTEXT
):
    if g_sigma <= G_CRITICAL:
        raise ValueError(f"scaling: g_sigma must be disordered (> 1), got {g_sigma!r}")
    rows = leading_rows(g_rho_grid, g_sigma, L, ctx)
    if not rows:
        raise WindowEmpty("scaling: no g_rho in the grid lies in the ordered phase")
    fit = fit_power_law([(row["ordered_distance"], row["leading"]) for row in rows])
    return rows, fit


def qfi_size_scaling(sizes, ctx: SweepContext = DEFAULT_CONTEXT) -> FitResult:
    """Fit F_Q(g=1, L) against L; the expected exponent is 7/4."""
    return qfi_sweep(sizes, ctx)[1]


def distance_size_scaling(
    g_rho: float, g_sigma: float, sizes, ctx: SweepContext = DEFAULT_CONTEXT
) -> FitResult:
    """Fit D^2(rho, sigma) against L.

    Warns with AssumptionViolation when 1/g_tilde is not margin times larger
    than the biggest size.
    """
    return distance_sweep(g_rho, g_sigma, sizes, ctx)[1]


def subleading_exponent(
    g_sigma_grid, L: int, ctx: SweepContext = DEFAULT_CONTEXT, include_local=True
) -> FitResult:
    """Fit (D^2/L^2 - 1/2) L against g_sigma - 1; expected exponent -3/4."""
    return subleading_sweep(g_sigma_grid, L, ctx, include_local)[1]


def leading_exponent(
    g_rho_grid, g_sigma: float, L: int, ctx: SweepContext = DEFAULT_CONTEXT
) -> FitResult:
    """Fit the g_rho-dependent part of D^2/L^2 against 1 - g_rho; expected 1/4."""
    return leading_sweep(g_rho_grid, g_sigma, L, ctx)[1]
