#!/usr/bin/env python3
"""Quantum Wasserstein distances between TFIM ground states.

Every operation is a subcommand; `reproduce` emits the data table behind
each figure, with defaults read from figures.yaml. Data goes to stdout (or
--output) as CSV or JSON, logs go to stderr. Exit codes: 0 success, 2 bad
flags, 3 numerical or storage failure, 1 anything unexpected.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path

import numpy as np
import typer
import yaml

from errors import IoFailure, QwdError, WindowEmpty
from scaling import (
    FIGURE_SIZES,
    FitResult,
    Mode,
    SweepContext,
    SweepSpec,
    distance_curve,
    distance_exponent_curve,
    fit_power_law,
    qfi_curve,
    run_sweep,
    subleading_curves,
)
from scaling.sweeps import leading_sweep
from store import DEFAULT_CACHE_DIR, TableStore
from tfim import (
    DEFAULT_CONFIG,
    G_CRITICAL,
    correlator_table,
    ed_mx_moments,
    ed_xx_correlator,
    ground_state,
    mx_moments_from_table,
)
from tfim.base import Method
from wasserstein import distance_squared, qfi

logger = logging.getLogger("qwd")

EXIT_NUMERICAL = 3
FIGURES_FILE = Path(__file__).with_name("figures.yaml")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


@dataclass(frozen=True)
class RunConfig:
    fmt: OutputFormat = OutputFormat.CSV
    parallelism: int = 1
    quad_tol: float = 1e-12
    cache_dir: Path = Path(DEFAULT_CACHE_DIR)
    no_cache: bool = False
    figures: Path = FIGURES_FILE
    output: Path | None = None

    def __post_init__(self):
        if self.parallelism < 1:
            raise ValueError(f"parallelism must be >= 1, got {self.parallelism}")
        if not self.quad_tol > 0:
            raise ValueError(f"quad-tol must be > 0, got {self.quad_tol!r}")


app = typer.Typer(
    name="qwd",
    help="Order-2 quantum Wasserstein distance between TFIM ground states.",
    no_args_is_help=True,
    add_completion=False,
    pretty_exceptions_enable=False,
)
reproduce_app = typer.Typer(
    help="Data tables behind the figures; defaults come from figures.yaml.",
    no_args_is_help=True,
)
app.add_typer(reproduce_app, name="reproduce")


def env_bool(name: str, default: bool = False) -> bool:
    return os.environ.get(name, str(default)).strip().lower() in ("1", "true", "yes")


def parse_grid(value) -> tuple[float, ...]:
    """'a,b,c', 'lin:start:stop:count', 'log:start:stop:count', or YAML numbers."""
    if isinstance(value, (int, float)):
        return (float(value),)
    if isinstance(value, (list, tuple)):
        return tuple(float(v) for v in value)
    text = str(value).strip()
    kind, _, spacing = text.partition(":")
    if kind in ("lin", "log") and spacing:
        start, stop, count = spacing.split(":")
        space = np.linspace if kind == "lin" else np.geomspace
        return tuple(float(v) for v in space(float(start), float(stop), int(count)))
    return tuple(float(v) for v in text.split(",") if v.strip())


def _grid(value, flag: str) -> tuple[float, ...]:
    try:
        grid = parse_grid(value)
    except ValueError as exc:
        raise typer.BadParameter(f"{value!r}: {exc}", param_hint=flag) from exc
    if not grid:
        raise typer.BadParameter("empty grid", param_hint=flag)
    return grid


def _sizes(value, flag: str = "--sizes") -> tuple[int, ...]:
    grid = _grid(value, flag)
    if any(v != int(v) for v in grid):
        raise typer.BadParameter(
            f"sizes must be integers, got {value!r}", param_hint=flag
        )
    return tuple(sorted(int(v) for v in grid))


def _run(ctx: typer.Context) -> RunConfig:
    return ctx.obj


@contextmanager
def numerical_failures():
    try:
        yield
    except QwdError as exc:
        logger.error("%s", exc)
        raise typer.Exit(code=EXIT_NUMERICAL) from exc


@contextmanager
def sweep_context(run: RunConfig):
    """The SweepContext for this run; owns the worker pool when parallel."""
    source = correlator_table if run.no_cache else TableStore(run.cache_dir).fetch
    base = SweepContext(cfg=DEFAULT_CONFIG.with_tol(run.quad_tol), source=source)
    if run.parallelism == 1:
        yield base
        return
    with ProcessPoolExecutor(max_workers=run.parallelism) as pool:
        yield replace(base, mapper=pool.map)


def load_figures(path: Path) -> dict:
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except (OSError, yaml.YAMLError) as exc:
        raise IoFailure(f"cli: cannot load figure defaults {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise IoFailure(f"cli: {path} is not a mapping of figure names")
    return data


def _figure(run: RunConfig, name: str) -> dict:
    figures = load_figures(run.figures)
    if name not in figures:
        raise IoFailure(f"cli: {run.figures} has no section '{name}'")
    section = dict(figures[name])
    stated = set(section.pop("stated", []))
    for key in sorted(set(section) - stated):
        logger.info("%s: %s=%s is a chosen default", name, key, section[key])
    return section


# -- output ----------------------------------------------------------------


def _cell(value):
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, float):
        return repr(value)
    return value


def render(rows: list[dict], fit: FitResult | None, fmt: OutputFormat) -> str:
    columns = list(rows[0]) if rows else []
    table = [{name: row[name] for name in columns} for row in rows]
    if fmt is OutputFormat.JSON:
        plain = [
            {k: v.value if isinstance(v, Enum) else v for k, v in row.items()}
            for row in table
        ]
        payload = {"rows": plain, "fit": fit.as_row() if fit else None}
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for row in table:
        writer.writerow({name: _cell(value) for name, value in row.items()})
    if fit:
        fields = " ".join(f"{k}={_cell(v)}" for k, v in fit.as_row().items())
        buf.write(f"# fit {fields}\n")
    return buf.getvalue()


def emit(run: RunConfig, rows: list[dict], fit: FitResult | None = None) -> None:
    text = render(rows, fit, run.fmt)
    if run.output is None:
        typer.echo(text, nl=False)
        return
    try:
        run.output.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cli: cannot write {run.output}: {exc}") from exc
    logger.info("wrote %d rows to %s", len(rows), run.output)


# -- global options ----------------------------------------------------------


@app.callback()
def configure(
    ctx: typer.Context,
    fmt: OutputFormat = typer.Option(
        OutputFormat.CSV, "--format", envvar="QWD_FORMAT", help="Output format."
    ),
    parallelism: int = typer.Option(
        1, "--parallelism", envvar="QWD_PARALLELISM", help="Worker processes."
    ),
    quad_tol: float = typer.Option(
        1e-12, "--quad-tol", envvar="QWD_QUAD_TOL", help="Quadrature tolerance."
    ),
    cache_dir: Path = typer.Option(
        Path(DEFAULT_CACHE_DIR),
        "--cache-dir",
        envvar="QWD_CACHE_DIR",
        help="Correlator table cache.",
    ),
    no_cache: bool = typer.Option(
        False, "--no-cache", help="Compute every table (env QWD_NO_CACHE)."
    ),
    log_level: str = typer.Option(
        "INFO", "--log-level", envvar="QWD_LOG_LEVEL", help="DEBUG, INFO, ..."
    ),
    figures: Path = typer.Option(
        FIGURES_FILE, "--figures", envvar="QWD_FIGURES", help="Figure defaults."
    ),
    output: Path | None = typer.Option(None, "--output", "-o", help="Write here."),
) -> None:
    level = log_level.strip().upper()
    if level not in LOG_LEVELS:
        raise typer.BadParameter(
            f"{level} is not one of {', '.join(LOG_LEVELS)}", param_hint="--log-level"
        )
    logging.basicConfig(
        level=getattr(logging, level),
        format="%(asctime)s %(levelname)s %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
        stream=sys.stderr,
    )
    logger.setLevel(level)
    try:
        ctx.obj = RunConfig(
            fmt=fmt,
            parallelism=parallelism,
            quad_tol=quad_tol,
            cache_dir=cache_dir,
            no_cache=no_cache or env_bool("QWD_NO_CACHE"),
            figures=figures,
            output=output,
        )
    except ValueError as exc:
        raise typer.BadParameter(str(exc)) from exc


# -- single-point commands ---------------------------------------------------


def _table(sweep: SweepContext, g: float, n_max: int):
    return sweep.source(g, n_max, cfg=sweep.cfg)


@app.command()
def correlator(
    ctx: typer.Context,
    g: float = typer.Option(..., "--g", min=0.0, help="Coupling g = h/J."),
    n_max: int = typer.Option(..., "--n-max", min=1, help="Largest separation."),
    method: Method = typer.Option(Method.LEVINSON_MINORS, "--method"),
):
    """C(n) = <sx_0 sx_n> for n = 1..n_max."""
    run = _run(ctx)
    with numerical_failures(), sweep_context(run) as sweep:
        if method is Method.LEVINSON_MINORS:
            table = _table(sweep, g, n_max)
        else:
            table = correlator_table(g, n_max, sweep.cfg, method=method)
        rows = [
            {"g": table.g, "n": n, "value": table.at(n), "method": table.method}
            for n in range(1, table.n_max + 1)
        ]
        emit(run, rows)


@app.command()
def observables(
    ctx: typer.Context,
    g: float = typer.Option(..., "--g", min=0.0),
    length: int = typer.Option(..., "--L", min=2, help="Ring size."),
):
    """<Mx> and <Mx^2> on a ring of L sites."""
    run = _run(ctx)
    with numerical_failures(), sweep_context(run) as sweep:
        obs = mx_moments_from_table(_table(sweep, g, length // 2), length)
        rows = [
            {
                "g": obs.g,
                "L": obs.L,
                "mx_mean": obs.mx_mean,
                "mx2_mean": obs.mx2_mean,
                "variance": obs.variance,
            }
        ]
        emit(run, rows)


@app.command()
def distance(
    ctx: typer.Context,
    g_rho: float = typer.Option(..., "--g-rho", min=0.0),
    g_sigma: float = typer.Option(..., "--g-sigma", min=0.0),
    length: int = typer.Option(..., "--L", min=2),
):
    """D(rho, sigma)^2 and its terms."""
    run = _run(ctx)
    with numerical_failures(), sweep_context(run) as sweep:
        n_max = length // 2
        result = distance_squared(
            mx_moments_from_table(_table(sweep, g_rho, n_max), length),
            mx_moments_from_table(_table(sweep, g_sigma, n_max), length),
        )
        rows = [
            {
                "L": result.L,
                "g_rho": result.g_rho,
                "g_sigma": result.g_sigma,
                "term_rho": result.term_rho,
                "term_sigma": result.term_sigma,
                "cross": result.cross,
                "d_squared": result.d_squared,
                "d_squared_per_site": result.per_site_sq,
            }
        ]
        emit(run, rows)


@app.command(name="qfi")
def qfi_command(
    ctx: typer.Context,
    g: float = typer.Option(..., "--g", min=0.0),
    length: int = typer.Option(..., "--L", min=2),
):
    """Quantum Fisher information of Mx, 4 Var(Mx)."""
    run = _run(ctx)
    with numerical_failures(), sweep_context(run) as sweep:
        obs = mx_moments_from_table(_table(sweep, g, length // 2), length)
        emit(run, [{"g": obs.g, "L": obs.L, "qfi": qfi(obs)}])


@app.command()
def oracle(
    ctx: typer.Context,
    g: float = typer.Option(..., "--g", min=0.0),
    length: int = typer.Option(..., "--L", min=2, help="At most 14 sites."),
    open_chain: bool = typer.Option(False, "--open", help="Open boundaries."),
):
    """Exact-diagonalization moments and correlators next to the exact C(n)."""
    run = _run(ctx)
    with numerical_failures(), sweep_context(run) as sweep:
        sol = ground_state(length, g, periodic=not open_chain)
        mx, mx2 = ed_mx_moments(sol)
        table = _table(sweep, g, length // 2)
        rows = [
            {
                "L": sol.L,
                "g": sol.g,
                "periodic": sol.periodic,
                "energy": sol.energy,
                "degenerate": sol.degenerate,
                "mx_mean": mx,
                "mx2_mean": mx2,
                "n": n,
                "c_ed": ed_xx_correlator(sol, n),
                "c_exact": table.at(n),
            }
            for n in range(1, length // 2 + 1)
        ]
        emit(run, rows)


@app.command()
def fit(
    ctx: typer.Context,
    mode: Mode = typer.Option(..., "--mode"),
    sizes: str = typer.Option(",".join(map(str, FIGURE_SIZES)), "--sizes"),
    g_rho: str = typer.Option("1", "--g-rho", help="Value or grid."),
    g_sigma: str = typer.Option("1", "--g-sigma", help="Value or grid."),
    length: int = typer.Option(700, "--L", min=2, help="Size for g sweeps."),
):
    """Sweep and power-law fit; grids take 'a,b,c' or 'log:start:stop:count'."""
    run = _run(ctx)
    try:
        spec = SweepSpec(
            mode=mode,
            sizes=_sizes(sizes),
            g_rho=_grid(g_rho, "--g-rho"),
            g_sigma=_grid(g_sigma, "--g-sigma"),
            L=length,
            quad_tol=run.quad_tol,
        )
    except ValueError as exc:
        raise typer.BadParameter(str(exc)) from exc
    with numerical_failures(), sweep_context(run) as sweep:
        try:
            rows, result = run_sweep(spec, sweep)
        except ValueError as exc:
            raise typer.BadParameter(str(exc)) from exc
        emit(run, rows, result)


# -- figure pipelines --------------------------------------------------------


@reproduce_app.command()
def fig1(
    ctx: typer.Context,
    length: int | None = typer.Option(None, "--L", min=2),
    g_rho: str | None = typer.Option(None, "--g-rho", help="Chosen default."),
    g_sigma: str | None = typer.Option(None, "--g-sigma", help="Chosen default."),
):
    """D^2/L^2 against g_sigma for several g_rho."""
    run = _run(ctx)
    with numerical_failures():
        section = _figure(run, "fig1")
        length = length or int(section["L"])
        rho = _grid(g_rho or section["g_rho"], "--g-rho")
        sigma = _grid(g_sigma or section["g_sigma"], "--g-sigma")
        with sweep_context(run) as sweep:
            emit(run, distance_curve(rho, sigma, length, sweep))


@reproduce_app.command()
def fig2a(
    ctx: typer.Context,
    sizes: str | None = typer.Option(None, "--sizes"),
    g: str | None = typer.Option(None, "--g", help="Chosen default."),
):
    """F_Q / L^{7/4} against g; the fit line is the g = 1 size scaling."""
    run = _run(ctx)
    with numerical_failures():
        section = _figure(run, "fig2a")
        size_list = _sizes(sizes or section["sizes"])
        grid = _grid(g or section["g"], "--g")
        with sweep_context(run) as sweep:
            rows = qfi_curve(grid, size_list, sweep)
        critical = [(r["L"], r["qfi"]) for r in rows if r["g"] == G_CRITICAL]
        emit(run, rows, fit_power_law(critical) if critical else None)


@reproduce_app.command()
def fig2b(
    ctx: typer.Context,
    sizes: str | None = typer.Option(None, "--sizes"),
    g_tilde: str | None = typer.Option(None, "--g-tilde", help="Chosen default."),
):
    """Size exponent of D^2 for g_rho = 1 - t, g_sigma = 1 + t."""
    run = _run(ctx)
    with numerical_failures():
        section = _figure(run, "fig2b")
        size_list = _sizes(sizes or section["sizes"])
        ts = _grid(g_tilde or section["g_tilde"], "--g-tilde")
        with sweep_context(run) as sweep:
            emit(run, distance_exponent_curve(ts, size_list, sweep))


@reproduce_app.command()
def fig3a(
    ctx: typer.Context,
    length: int | None = typer.Option(None, "--L", min=2, help="Size of the fit."),
    sizes: str | None = typer.Option(None, "--sizes", help="Extra curve sizes."),
    g_tilde: str | None = typer.Option(None, "--g-tilde", help="Chosen default."),
):
    """(D^2/L^2 - 1/2) L against g_sigma - 1 with g_rho = 0."""
    run = _run(ctx)
    with numerical_failures():
        section = _figure(run, "fig3a")
        length = length or int(section["L"])
        size_list = sorted({*_sizes(sizes or section["sizes"]), length})
        ts = _grid(g_tilde or section["g_tilde"], "--g-tilde")
        g_sigma = [G_CRITICAL + t for t in ts]
        with sweep_context(run) as sweep:
            rows = subleading_curves(g_sigma, size_list, sweep)
        at = [(r["g_tilde"], r["subleading"]) for r in rows if r["L"] == length]
        if not at:
            raise WindowEmpty(f"cli: no g_sigma satisfies the window at L={length}")
        emit(run, rows, fit_power_law(at))


@reproduce_app.command()
def fig3b(
    ctx: typer.Context,
    length: int | None = typer.Option(None, "--L", min=2),
    g_sigma: float | None = typer.Option(None, "--g-sigma", min=0.0),
    g_tilde: str | None = typer.Option(None, "--g-tilde", help="Chosen default."),
):
    """D^2/L^2 against 1 - g_rho with sigma deep in the disordered phase."""
    run = _run(ctx)
    with numerical_failures():
        section = _figure(run, "fig3b")
        length = length or int(section["L"])
        g_sigma = g_sigma if g_sigma is not None else float(section["g_sigma"])
        ts = _grid(g_tilde or section["g_tilde"], "--g-tilde")
        with sweep_context(run) as sweep:
            rows, result = leading_sweep(
                [G_CRITICAL - t for t in ts], g_sigma, length, sweep
            )
        emit(run, rows, result)


def run(argv: list[str] | None = None) -> int:
    try:
        app(args=argv, prog_name="qwd")
    except SystemExit as exc:
        if exc.code is None:
            return 0
        return exc.code if isinstance(exc.code, int) else 1
    return 0


def main() -> int:
    try:
        return run(sys.argv[1:])
    except Exception:
        logger.exception("unexpected failure")
        return 1


if __name__ == "__main__":
    sys.exit(main())
