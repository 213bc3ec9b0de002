import logging
import math
from unittest.mock import MagicMock

import numpy as np
import pytest
import scipy.linalg

import tfim.exact as exact
from errors import RecursionBreakdown
from tfim.base import CorrelatorTable, Method
from tfim.exact import (
    correlator_table,
    levinson_minors,
    magnetization,
    mx_moments,
    mx_moments_from_table,
    pivoted_minors,
    toeplitz_kernel,
)

# -- magnetization -----------------------------------------------------------


def test_magnetization_values():
    assert magnetization(0.0) == 1.0
    assert magnetization(0.6) == pytest.approx(0.64**0.125)
    assert magnetization(1.0) == 0.0
    assert magnetization(3.0) == 0.0


def test_magnetization_rejects_negative_coupling():
    with pytest.raises(ValueError):
        magnetization(-0.5)


# -- Toeplitz minors ---------------------------------------------------------


def test_levinson_matches_determinants_of_a_generic_toeplitz():
    column = np.array([4.0, 1.0, 0.5, 0.2, 0.1])
    row = np.array([4.0, 2.0, 0.3, 0.1, -0.2])
    matrix = scipy.linalg.toeplitz(column, row)
    expected = [np.linalg.det(matrix[:n, :n]) for n in range(1, 6)]
    assert levinson_minors(column, row) == pytest.approx(expected, rel=1e-12)


def test_levinson_breaks_down_on_a_vanishing_pivot():
    column = np.array([0.0, 1.0, 0.0])
    with pytest.raises(RecursionBreakdown, match="order 1"):
        levinson_minors(column, column)
    assert pivoted_minors(column, column) == pytest.approx([0.0, -1.0, 0.0])


def test_kernel_layout(cfg):
    column, row = toeplitz_kernel(0.0, 4, cfg)
    assert list(column) == [1.0, 0.0, 0.0, 0.0]
    assert list(row) == [1.0, 0.0, 0.0, 0.0]


@pytest.mark.parametrize("g", [0.5, 1.0, 1.5])
def test_levinson_agrees_with_pivoted_elimination(g, cfg):
    column, row = toeplitz_kernel(g, 12, cfg)
    fast = levinson_minors(column, row)
    slow = pivoted_minors(column, row)
    assert np.max(np.abs(fast - slow)) < 1e-10


# -- correlator tables -------------------------------------------------------


def test_fully_ordered_chain_is_perfectly_correlated(cfg):
    table = correlator_table(0.0, 10, cfg)
    assert table.values == (1.0,) * 10
    assert table.method is Method.LEVINSON_MINORS


def test_nearest_neighbour_at_criticality(cfg):
    assert correlator_table(1.0, 1, cfg).at(1) == pytest.approx(2 / math.pi, abs=1e-8)


def test_critical_correlator_decays_monotonically(cfg):
    values = np.array(correlator_table(1.0, 20, cfg).values)
    assert np.all(values > 0)
    assert np.all(np.diff(values) < 0)


def test_ordered_correlator_approaches_squared_order_parameter(cfg):
    g = 0.5
    assert correlator_table(g, 20, cfg).at(20) == pytest.approx(
        (1 - g * g) ** 0.25, abs=1e-8
    )


def test_large_coupling_nearest_neighbour(cfg):
    assert correlator_table(1e3, 3, cfg).at(1) == pytest.approx(5e-4, abs=1e-6)


def test_table_is_independent_of_its_length(cfg):
    short = correlator_table(0.7, 10, cfg)
    long = correlator_table(0.7, 30, cfg)
    assert short.values == pytest.approx(long.values[:10], abs=1e-12)
    assert long.prefix(10).values == pytest.approx(short.values, abs=1e-12)


def test_breakdown_falls_back_to_pivoted_elimination(monkeypatch, cfg, caplog):
    def broken(column, row, floor=exact.PIVOT_FLOOR):
        raise RecursionBreakdown("tfim_exact: minor-chain pivot 0 at order 3")

    monkeypatch.setattr(exact, "levinson_minors", broken)
    with caplog.at_level(logging.WARNING, logger="qwd"):
        table = correlator_table(1.5, 6, cfg)
    assert table.method is Method.LU_PER_N
    assert "pivoted elimination" in caplog.text
    assert table.values[0] == pytest.approx(exact.g_integrals([-1], 1.5, cfg)[0])

    with pytest.raises(RecursionBreakdown):
        correlator_table(1.5, 6, cfg, fallback=False)


def test_forced_pivoted_method(cfg):
    fast = correlator_table(1.2, 8, cfg)
    slow = correlator_table(1.2, 8, cfg, method=Method.LU_PER_N)
    assert slow.method is Method.LU_PER_N
    assert slow.values == pytest.approx(fast.values, abs=1e-10)


def test_tiny_values_are_clamped(caplog):
    with caplog.at_level(logging.WARNING, logger="qwd"):
        values = exact._clamp(np.array([1e-16, -1e-16, 0.5, 0.0]), 3.0)
    assert list(values) == [0.0, 0.0, 0.5, 0.0]
    assert "clamped 2 correlator values" in caplog.text


@pytest.mark.parametrize("g,n_max", [(-0.1, 4), (0.5, 0)])
def test_table_preconditions(g, n_max):
    with pytest.raises(ValueError):
        correlator_table(g, n_max)


def test_table_accessors():
    table = CorrelatorTable(g=1.5, n_max=3, values=(0.5, 0.25, 0.125), tol=1e-12)
    assert table.at(1) == 0.5
    assert table.at(3) == 0.125
    with pytest.raises(IndexError):
        table.at(0)
    with pytest.raises(ValueError):
        table.prefix(4)
    with pytest.raises(ValueError):
        CorrelatorTable(g=1.5, n_max=2, values=(0.5,), tol=1e-12)


# -- ring assembly -----------------------------------------------------------


def test_ring_moments_use_minimal_image_separations():
    table = CorrelatorTable(g=1.5, n_max=2, values=(0.5, 0.25), tol=1e-12)
    obs = mx_moments_from_table(table, 4)
    # separations 1, 2, 1 around the ring of four
    assert obs.mx2_mean == 4 * (1 + 0.5 + 0.25 + 0.5)
    assert obs.mx_mean == 0.0
    assert obs.variance == obs.mx2_mean


def test_ordered_ring_uses_the_thermodynamic_order_parameter():
    table = CorrelatorTable(g=0.0, n_max=3, values=(1.0, 1.0, 1.0), tol=1e-12)
    obs = mx_moments_from_table(table, 6)
    assert obs.mx_mean == 6.0
    assert obs.mx2_mean == 36.0
    assert obs.variance == 0.0


def test_ring_needs_a_long_enough_table():
    table = CorrelatorTable(g=1.5, n_max=2, values=(0.5, 0.25), tol=1e-12)
    with pytest.raises(ValueError):
        mx_moments_from_table(table, 6)
    with pytest.raises(ValueError):
        mx_moments_from_table(table, 1)


def test_mx_moments_asks_the_source_for_half_the_ring(cfg):
    table = CorrelatorTable(g=1.5, n_max=5, values=(0.1,) * 5, tol=1e-12)
    source = MagicMock(return_value=table)
    obs = mx_moments(1.5, 10, cfg, source=source)
    source.assert_called_once_with(1.5, 5, cfg)
    assert obs.L == 10
    assert obs.g_tilde == pytest.approx(0.5)


def test_disordered_ring_keeps_only_the_local_term(cfg):
    obs = mx_moments(1e6, 10, cfg)
    assert obs.mx_mean == 0.0
    assert obs.mx2_mean == pytest.approx(10.0, abs=1e-4)


def test_ring_sum_is_independent_of_summation_order(cfg):
    L = 200
    table = correlator_table(0.9, L // 2, cfg)
    obs = mx_moments_from_table(table, L)
    terms = [table.at(min(d, L - d)) for d in range(1, L)]
    backwards = 1.0
    for term in reversed(terms):
        backwards += term
    assert abs(obs.mx2_mean / L - backwards) < 1e-9


# -- long tables -------------------------------------------------------------


@pytest.mark.slow
def test_critical_correlator_decays_as_inverse_quarter_power(memo_source, cfg):
    table = memo_source(1.0, 400, cfg)
    scaled = [n**0.25 * table.at(n) for n in range(50, 401)]
    assert max(scaled) / min(scaled) - 1 < 0.05


@pytest.mark.slow
@pytest.mark.parametrize("g", [0.5, 0.9])
def test_ordered_correlator_clusters(g, memo_source, cfg):
    n_max = 200
    table = memo_source(g, n_max, cfg)
    gap = abs(table.at(n_max) - magnetization(g) ** 2)
    step = abs(table.at(n_max) - table.at(n_max - 1))
    assert gap < 10 * step + 1e-6


@pytest.mark.slow
def test_ring_moments_are_stable_under_a_tighter_tolerance(memo_source, cfg):
    L = 500
    loose = mx_moments(2.0, L, cfg, source=memo_source)
    tight = mx_moments(2.0, L, cfg.with_tol(1e-14), source=memo_source)
    assert abs(loose.mx2_mean / L - tight.mx2_mean / L) < 1e-6
