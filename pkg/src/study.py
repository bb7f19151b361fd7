"""
Convergence Studies

Parameter sweeps over a base run configuration. Each sweep value builds its
own problem and solver, runs one solve and becomes one row of the result;
rows are written to CSV in sweep order, with one residual history file per
run next to the table.
"""

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from config import CONTINUATION_FACTOR, CSV_FLOAT_FORMAT, HISTORY_CSV_HEADER, STUDY_CSV_HEADER
from src.errors import ConfigError, DivergenceError
from src.mesh import build_hierarchy, coarse_size_for, level_size
from src.mgcycle import CycleSpec, MultigridSolver, SolveReport, convergence_rate  # noqa: F401 (re-exported)
from src.problem import ModelProblem, build_problem
from src.run_config import RunConfig, check_consistency, parse_value
from src.smoother import SmootherSpec, estimate_contraction, setup
from src.stencil import GridFunction, assemble, factorize
from src.validation import sanitize_value_token

NUMERIC_AXES = ("anisotropy", "levels", "smoothing_steps")


@dataclass(frozen=True, eq=False)
class StartVectorStrategy:
    tag: str = "zero"
    source: Optional[GridFunction] = None

    def __post_init__(self):
        if self.tag not in ("zero", "nested", "continuation"):
            raise ValueError(f"Invalid start: must be one of {{zero, nested, continuation}} (got {self.tag!r})")
        if self.tag == "continuation" and self.source is None:
            raise ValueError("Invalid start: continuation needs a source solution")


def make_start_vector(
    strategy: StartVectorStrategy,
    problem: ModelProblem,
    solver: Optional[MultigridSolver] = None,
) -> GridFunction:
    finest = problem.hierarchy.finest

    if strategy.tag == "zero":
        return GridFunction.zeros(finest)

    if strategy.tag == "continuation":
        source = strategy.source
        if source.values.shape != finest.shape:
            raise ValueError(
                f"Invalid start: continuation source of shape {source.values.shape} "
                f"does not match the finest grid {finest.shape}"
            )
        return GridFunction(finest, source.values.copy())

    # Nested: exact solve on level 1, then prolong and smooth once per level
    if solver is None:
        solver = MultigridSolver(problem, CycleSpec())
    levels = problem.levels

    rhs = [problem.rhs.values]
    for level in range(levels, 1, -1):
        rhs.append(solver.transfers[level - 1].restrict(rhs[-1]))
    rhs.reverse()

    factor = solver.coarse_factor or factorize(problem.operator(1))
    u = factor.solve(rhs[0])
    for level in range(2, levels + 1):
        u = solver.transfers[level - 1].prolong(u)
        u = solver.state(level).smooth(u, rhs[level - 1], solver.spec.omega)

    return GridFunction(finest, u)


def solve_continuation_source(config: RunConfig) -> GridFunction:
    """Solution of the same problem with alpha reduced by CONTINUATION_FACTOR."""
    source_config = config.with_value("alpha", config.alpha / CONTINUATION_FACTOR)
    problem = build_problem(source_config.hierarchy(), source_config.anisotropy())
    solver = MultigridSolver(problem, source_config.cycle_spec())
    try:
        return solver.solve().solution
    except DivergenceError as e:
        return e.report.solution


def start_strategy_for(config: RunConfig) -> StartVectorStrategy:
    if config.start == "continuation":
        return StartVectorStrategy("continuation", solve_continuation_source(config))
    return StartVectorStrategy(config.start)


def smoother_rate_sweep(
    kind: str,
    sizes: Sequence[int],
    omega: float,
    smoother_omega: Optional[float] = None,
    iterations: int = 100,
) -> List[float]:
    """Contraction estimates of one smoother on isotropic Cartesian n x n grids."""
    rates = []
    for n in sizes:
        grid = build_hierarchy(1, (n, n)).finest
        state = setup(SmootherSpec(kind, smoother_omega), assemble(grid))
        rates.append(estimate_contraction(state, omega, iterations))
    return rates


def mesh_dependence_ratios(rates: Sequence[float]) -> List[float]:
    """(1 - rho(h)) / (1 - rho(h/2)) for consecutive halvings."""
    return [(1.0 - coarse) / (1.0 - fine) for coarse, fine in zip(rates[:-1], rates[1:])]


@dataclass
class StudyConfig:
    axis: str
    values: List[str]
    base: RunConfig = field(default_factory=RunConfig)
    output: Optional[str] = None

    def __post_init__(self):
        if not self.values:
            raise ConfigError("values", "a study needs at least one sweep value")
        parse_value("sweep", self.axis)


@dataclass
class StudyRow:
    sweep_value: str
    cycles: int
    final_rel_residual: float
    mean_rate: float
    converged: bool
    wall_ms: float
    history: List[float] = field(default_factory=list)


@dataclass
class StudyResult:
    axis: str
    rows: List[StudyRow]

    def column(self, name: str) -> list:
        return [getattr(row, name) for row in self.rows]


def config_for_value(axis: str, token: str, base: RunConfig) -> RunConfig:
    """Run configuration of one sweep value."""
    if axis == "anisotropy":
        config = base.with_value("alpha", parse_value("alpha", token))
        config.beta = 1.0
    elif axis == "levels":
        levels = parse_value("levels", token)
        try:
            coarse = tuple(
                coarse_size_for(level_size(base.levels, n), levels) for n in base.coarse_n
            )
        except ValueError as e:
            raise ConfigError("values", str(e)) from e
        config = base.with_value("levels", levels)
        config.coarse_n = coarse
    elif axis == "smoothing_steps":
        steps = parse_value("pre_steps", token)
        config = base.with_value("pre_steps", steps)
        config.post_steps = steps
    elif axis == "coordinates":
        config = base.with_value("coords", parse_value("coords", token))
    elif axis == "smoother":
        config = base.with_value("smoother", parse_value("smoother", token))
        config.smoother_omega = None
    elif axis == "start_vector":
        config = base.with_value("start", parse_value("start", token))
    else:
        raise ConfigError("sweep", f"unknown sweep axis {axis!r}")

    check_consistency(config)
    return config


def run_single(config: RunConfig) -> SolveReport:
    """
    One solve of a configuration.

    Divergence is returned as a report with status "diverged", never raised.
    """
    problem = build_problem(config.hierarchy(), config.anisotropy())
    solver = MultigridSolver(problem, config.cycle_spec())
    u0 = make_start_vector(start_strategy_for(config), problem, solver)
    try:
        return solver.solve(u0=u0)
    except DivergenceError as e:
        return e.report


def _row(token: str, config: RunConfig, report: SolveReport) -> StudyRow:
    cycles = report.iterations if report.converged else config.max_cycles
    return StudyRow(
        sweep_value=token,
        cycles=cycles,
        final_rel_residual=report.final_relative_residual,
        mean_rate=report.mean_rate,
        converged=report.converged,
        wall_ms=report.wall_time * 1000.0 if config.timing else 0.0,
        history=list(report.residual_history),
    )


def _format_sweep_value(axis: str, token: str) -> str:
    if axis in NUMERIC_AXES:
        return CSV_FLOAT_FORMAT % float(token)
    return token


def write_study_csv(path: str, result: StudyResult):
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(STUDY_CSV_HEADER)
        for row in result.rows:
            writer.writerow([
                _format_sweep_value(result.axis, row.sweep_value),
                row.cycles,
                CSV_FLOAT_FORMAT % row.final_rel_residual,
                CSV_FLOAT_FORMAT % row.mean_rate,
                "true" if row.converged else "false",
                CSV_FLOAT_FORMAT % row.wall_ms,
            ])


def history_path(output: str, token: str) -> Path:
    return Path(output).parent / f"history_{sanitize_value_token(token)}.csv"


def write_history_csv(path, history: Sequence[float]):
    cycles = np.arange(len(history))
    np.savetxt(
        path,
        np.column_stack([cycles, np.asarray(history, dtype=float)]),
        fmt=["%d", CSV_FLOAT_FORMAT],
        delimiter=",",
        header=HISTORY_CSV_HEADER,
        comments="",
        encoding="utf-8",
    )


def run_study(config: StudyConfig) -> StudyResult:
    # All sweep values are checked before the first solve
    runs = [(token, config_for_value(config.axis, token, config.base)) for token in config.values]

    rows = []
    for token, run in runs:
        rows.append(_row(token, run, run_single(run)))

    result = StudyResult(axis=config.axis, rows=rows)

    if config.output:
        write_study_csv(config.output, result)
        for row in rows:
            write_history_csv(history_path(config.output, row.sweep_value), row.history)

    return result
