import statistics
import warnings
from concurrent.futures import ThreadPoolExecutor
from unittest.mock import MagicMock, call

import numpy as np
import pytest
from conftest import decaying_table

from errors import (
    AssumptionViolation,
    DegenerateAbscissa,
    InsufficientPoints,
    NonPositiveData,
    WindowEmpty,
)
from scaling import (
    FIGURE_SIZES,
    Mode,
    SweepContext,
    SweepSpec,
    available,
    distance_exponent_curve,
    distance_size_scaling,
    fit_power_law,
    fit_with_offset,
    get_mode,
    leading_exponent,
    qfi_curve,
    qfi_size_scaling,
    run_sweep,
    subleading_curves,
    subleading_exponent,
)
from scaling.sweeps import distance_rows, leading_rows


def synthetic(**kwargs):
    return SweepContext(source=decaying_table, **kwargs)


# -- fits --------------------------------------------------------------------


def test_exact_quadratic():
    fit = fit_power_law([(1, 1), (2, 4), (3, 9), (10, 100)])
    assert fit.exponent == pytest.approx(2.0, abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
    assert fit.window == (1.0, 10.0)
    assert fit.n_points == 4


def test_synthetic_power_law():
    x = np.geomspace(1e-3, 0.1, 9)
    fit = fit_power_law(zip(x, 5 * x**-0.75))
    assert fit.exponent == pytest.approx(-0.75, abs=1e-10)
    assert fit.amplitude == pytest.approx(5.0, abs=1e-10)
    assert fit.stderr >= 0


def test_rescaling_moves_only_the_amplitude():
    x = np.array([20.0, 40.0, 80.0, 160.0])
    y = 0.3 * x**1.7 * (1 + 0.01 * np.sin(x))
    base = fit_power_law(zip(x, y))
    scaled = fit_power_law(zip(x, 2 * y))
    assert scaled.exponent == pytest.approx(base.exponent, rel=1e-12)
    assert scaled.amplitude == pytest.approx(2 * base.amplitude, rel=1e-12)


def test_random_exponents_are_recovered():
    rng = np.random.default_rng(11)
    x = np.geomspace(0.5, 500, 12)
    for p in rng.uniform(-3, 3, 25):
        fit = fit_power_law(zip(x, 1.7 * x**p))
        assert abs(fit.exponent - p) < 1e-9
        assert 0.0 <= fit.r_squared <= 1.0


@pytest.mark.parametrize(
    "points,error",
    [
        ([(1, 1), (2, 2)], InsufficientPoints),
        ([(1, 1), (2, -2), (3, 3)], NonPositiveData),
        ([(0, 1), (2, 2), (3, 3)], NonPositiveData),
        ([(1, 1), (2, float("nan")), (3, 3)], NonPositiveData),
        ([(2, 1), (2, 2), (2, 3)], DegenerateAbscissa),
    ],
)
def test_fit_preconditions(points, error):
    with pytest.raises(error):
        fit_power_law(points)


def test_offset_fit_on_the_order_parameter_form():
    x = np.geomspace(3e-3, 3e-2, 12)
    g = 1 - x
    fit = fit_with_offset(zip(x, 0.5 * (1 - g * g) ** 0.25))
    assert fit.exponent == pytest.approx(0.25, abs=0.01)


def test_offset_fit_moves_towards_the_true_exponent():
    x = np.geomspace(3e-3, 3e-2, 12)
    points = list(zip(x, 0.3 + 2 * x**0.25))
    plain = fit_power_law(points)
    offset = fit_with_offset(points)
    assert offset.offset > 0
    assert plain.exponent < offset.exponent < 0.25


# -- sweep descriptions ------------------------------------------------------


def test_sweep_spec_defaults_and_coercion():
    spec = SweepSpec(mode="qfi")
    assert spec.mode is Mode.QFI_VS_L
    assert spec.sizes == FIGURE_SIZES
    assert spec.g_rho_grid == (1.0,)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"sizes": (20, 40, 40)},
        {"sizes": (40, 20, 80)},
        {"g_rho": (0.0, 0.5)},
        {"g_sigma": (1.2, 1.1)},
        {"L": 1},
        {"quad_tol": 0.0},
    ],
)
def test_sweep_spec_validation(kwargs):
    with pytest.raises(ValueError):
        SweepSpec(mode=Mode.D2_VS_L, **kwargs)


def test_unknown_mode():
    assert available() == ["d2", "leading", "qfi", "subleading"]
    with pytest.raises(ValueError, match="valid: d2, leading"):
        get_mode("chi")
    with pytest.raises(ValueError):
        SweepSpec(mode="chi")


# -- orchestration -----------------------------------------------------------


def test_tables_are_requested_once_per_coupling_in_sorted_order():
    source = MagicMock(side_effect=decaying_table)
    ctx = SweepContext(source=source)
    tables = ctx.tables([1.5, 0.5, 1.5], 4)
    assert sorted(tables) == [0.5, 1.5]
    assert source.call_args_list == [
        call(0.5, n_max=4, cfg=ctx.cfg),
        call(1.5, n_max=4, cfg=ctx.cfg),
    ]


def test_one_table_serves_every_size():
    source = MagicMock(side_effect=decaying_table)
    rows = qfi_curve([1.0], [4, 8, 16], SweepContext(source=source))
    source.assert_called_once_with(1.0, n_max=8, cfg=SweepContext().cfg)
    assert [row["L"] for row in rows] == [4, 8, 16]
    for row in rows:
        assert row["qfi_scaled"] == row["qfi"] / row["L"] ** 1.75


def test_too_few_sizes_fail_before_any_work():
    source = MagicMock(side_effect=decaying_table)
    with pytest.raises(InsufficientPoints):
        qfi_size_scaling([20, 40], SweepContext(source=source))
    source.assert_not_called()


def test_odd_sizes_are_refused():
    with pytest.raises(ValueError, match="even"):
        qfi_size_scaling([20, 41, 80], synthetic())


def test_parallel_mapping_gives_identical_rows():
    serial = distance_rows([0.2, 0.6], [1.3, 1.8], [10, 20], synthetic())
    with ThreadPoolExecutor(max_workers=4) as pool:
        parallel = distance_rows(
            [0.2, 0.6], [1.3, 1.8], [10, 20], synthetic(mapper=pool.map)
        )
    assert parallel == serial


def test_equal_couplings_reduce_to_the_fisher_information():
    sizes = [10, 20, 40]
    ctx = synthetic()
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        d2 = distance_size_scaling(1.0, 1.0, sizes, ctx)
    qfi_fit = qfi_size_scaling(sizes, ctx)
    assert d2.exponent == pytest.approx(qfi_fit.exponent, rel=1e-12)


def test_short_correlation_length_is_flagged():
    with pytest.warns(AssumptionViolation, match="correlation length"):
        fit = distance_size_scaling(0.9, 1.1, [10, 20, 40], synthetic())
    assert fit.n_points == 3


def test_distance_scaling_coupling_range():
    with pytest.raises(ValueError):
        distance_size_scaling(0.0, 1.0, [10, 20, 40], synthetic())
    with pytest.raises(ValueError):
        distance_size_scaling(1.0, 2.5, [10, 20, 40], synthetic())


def test_subleading_window_keeps_short_correlation_lengths():
    rows = subleading_curves([1.05, 1.2, 1.5, 2.0], [100], synthetic())
    assert [row["g_sigma"] for row in rows] == [1.2, 1.5, 2.0]
    assert all(row["g_rho"] == 0.0 for row in rows)


def test_subleading_local_term():
    ctx = synthetic()
    kept = subleading_curves([1.5], [100], ctx)[0]["subleading"]
    dropped = subleading_curves([1.5], [100], ctx, include_local=False)[0]
    assert kept - dropped["subleading"] == pytest.approx(0.5, abs=1e-12)


def test_subleading_empty_window():
    with pytest.raises(WindowEmpty):
        subleading_exponent([0.5, 1.001], 100, synthetic())


def test_leading_needs_a_disordered_reference():
    with pytest.raises(ValueError):
        leading_exponent([0.9, 0.95, 0.99], 0.8, 100, synthetic())
    with pytest.raises(WindowEmpty):
        leading_exponent([1.1, 1.2, 1.3], 10.0, 100, synthetic())


def test_leading_fits_only_ordered_couplings():
    fit = leading_exponent([0.7, 0.8, 0.9, 1.2], 10.0, 100, synthetic())
    assert fit.n_points == 3
    assert fit.window == pytest.approx((0.1, 0.3))


def test_leading_rows_keep_half_the_squared_order_parameter():
    rows = leading_rows([0.5, 0.9], 10.0, 100, synthetic())
    assert [row["g_rho"] for row in rows] == [0.5, 0.9]
    for row in rows:
        g = row["g_rho"]
        assert row["cross"] == 0.0
        assert row["leading"] == pytest.approx(0.5 * (1 - g * g) ** 0.25, rel=1e-12)


def test_leading_exponent_near_the_transition():
    grid = 1 - np.geomspace(3e-3, 3e-2, 12)
    fit = leading_exponent(grid, 10.0, 100, synthetic())
    # (1 + g)^(1/4) bends the pure quarter power slightly
    assert fit.exponent == pytest.approx(0.2485, abs=1e-3)
    assert fit.offset == 0.0


def test_distance_exponent_curve_rows():
    rows = distance_exponent_curve([0.1, 0.01], [10, 20, 40], synthetic())
    assert [row["g_tilde"] for row in rows] == [0.01, 0.1]
    assert all(row["n_points"] == 3 for row in rows)
    with pytest.raises(ValueError):
        distance_exponent_curve([1.0], [10, 20, 40], synthetic())


def test_run_sweep_dispatch():
    rows, fit = run_sweep(SweepSpec(mode="qfi", sizes=(4, 8, 16)), synthetic())
    assert len(rows) == 3
    assert fit.n_points == 3
    with pytest.raises(ValueError, match="single g_rho"):
        run_sweep(SweepSpec(mode="d2", g_rho=(0.9, 0.95)), synthetic())


# -- reproduction at desk scale ----------------------------------------------


@pytest.mark.slow
def test_fisher_information_exponent(memo_source):
    ctx = SweepContext(source=memo_source)
    fit = qfi_size_scaling(FIGURE_SIZES, ctx)
    assert 1.72 <= fit.exponent <= 1.78

    rows = qfi_curve([1.0], FIGURE_SIZES, ctx)
    collapsed = [row["qfi_scaled"] for row in rows if row["L"] >= 150]
    median = statistics.median(collapsed)
    assert max(abs(v - median) / median for v in collapsed) < 0.05


@pytest.mark.slow
def test_subleading_exponent(memo_source):
    ctx = SweepContext(source=memo_source)
    grid = 1 + np.geomspace(0.02, 0.2, 12)
    fit = subleading_exponent(grid, 700, ctx)
    assert -0.78 <= fit.exponent <= -0.71


@pytest.mark.slow
def test_subleading_exponent_holds_at_twice_the_size(memo_source):
    ctx = SweepContext(source=memo_source)
    grid = 1 + np.geomspace(0.02, 0.2, 12)
    fits = [subleading_exponent(grid, L, ctx) for L in (700, 1400)]
    assert all(-0.78 <= fit.exponent <= -0.71 for fit in fits)
    smaller, larger = (abs(fit.exponent + 0.75) for fit in fits)
    assert larger <= smaller + 1e-3


@pytest.mark.slow
def test_dropping_the_local_term_steepens_the_subleading_fit(memo_source):
    ctx = SweepContext(source=memo_source)
    grid = 1 + np.geomspace(0.02, 0.2, 12)
    kept = subleading_exponent(grid, 700, ctx)
    dropped = subleading_exponent(grid, 700, ctx, include_local=False)
    assert dropped.exponent == pytest.approx(-0.798, abs=0.01)
    assert kept.exponent - dropped.exponent > 10 * kept.stderr


@pytest.mark.slow
def test_leading_exponent(memo_source):
    ctx = SweepContext(source=memo_source)
    grid = 1 - np.geomspace(3e-3, 3e-2, 12)
    fit = leading_exponent(grid, 10.0, 500, ctx)
    assert 0.23 <= fit.exponent <= 0.27


@pytest.mark.slow
def test_distance_exponent_departs_from_the_critical_value(memo_source):
    ctx = SweepContext(source=memo_source)
    rows = distance_exponent_curve([1e-5, 1e-3, 1e-1], FIGURE_SIZES, ctx)
    exponents = [row["exponent"] for row in rows]
    assert 1.73 <= exponents[0] <= 1.80
    assert exponents == sorted(exponents)
    assert exponents[-1] < 2.0
