#!/usr/bin/env python3
"""
Anisotropic Multigrid Solver
Main CLI Entry Point

    main.py solve  [--key value ...]   one multigrid solve, per-cycle residual trace
    main.py study  --sweep AXIS --values V1,V2,...   convergence study to CSV
    main.py probe  [--key value ...]   smoother contraction estimate

Exit codes: 0 converged (probe < 1), 1 config or IO error, 2 max_cycles
reached, 3 diverged, 4 probe estimate >= 1.
"""

import argparse
import sys
from typing import Dict, List, Optional

from config import (
    APP_NAME,
    APP_VERSION,
    EXIT_CONFIG_ERROR,
    EXIT_DIVERGED,
    EXIT_MAX_CYCLES,
    EXIT_NOT_CONTRACTIVE,
    EXIT_OK,
)
from src.errors import ConfigError, DivergenceError
from src.mgcycle import MultigridSolver, SolveReport
from src.problem import build_problem
from src.run_config import CONFIG_KEYS, RunConfig, load_run_config
from src.smoother import estimate_contraction, setup
from src.stencil import assemble
from src.study import (
    StudyConfig,
    make_start_vector,
    run_study,
    start_strategy_for,
    write_history_csv,
)
from src.ui import (
    print_banner,
    print_config,
    print_cycle_line,
    print_error,
    print_info,
    print_probe_result,
    print_section_header,
    print_solve_summary,
    print_study_table,
    print_success,
    print_warning,
    set_quiet,
)


class MultigridCLI:
    def __init__(self, config: RunConfig):
        self.config = config

    def _write_history(self, report: SolveReport):
        if self.config.out:
            write_history_csv(self.config.out, report.residual_history)
            print_info(f"Residual history written to {self.config.out}")

    def cmd_solve(self) -> int:
        config = self.config
        print_config(config.as_dict())

        problem = build_problem(config.hierarchy(), config.anisotropy())
        solver = MultigridSolver(problem, config.cycle_spec())
        u0 = make_start_vector(start_strategy_for(config), problem, solver)

        print_section_header(f"SOLVE ({config.cycle}-cycle, {len(problem.hierarchy)} levels)")
        try:
            report = solver.solve(u0=u0, on_cycle=print_cycle_line)
        except DivergenceError as e:
            print_error(f"Diverged: {e}")
            if e.report is not None:
                self._write_history(e.report)
            return EXIT_DIVERGED

        print_solve_summary(report)
        self._write_history(report)

        if report.converged:
            print_success(f"Converged in {report.iterations} cycles")
            return EXIT_OK

        print_warning(f"Stopped after max_cycles = {config.max_cycles} without reaching tol = {config.tol:g}")
        return EXIT_MAX_CYCLES

    def cmd_study(self) -> int:
        config = self.config
        if config.sweep is None:
            raise ConfigError("sweep", "required for the study command")
        if not config.values:
            raise ConfigError("values", "required for the study command")

        print_config(config.as_dict())
        study = StudyConfig(axis=config.sweep, values=list(config.values), base=config, output=config.out)

        print_section_header(f"STUDY: {config.sweep}")
        result = run_study(study)
        print_study_table(result.axis, result.rows)

        diverged = [row.sweep_value for row in result.rows if not row.converged]
        if diverged:
            print_warning(f"Not converged for: {', '.join(diverged)}")
        if config.out:
            print_success(f"Study written to {config.out}")
        return EXIT_OK

    def cmd_probe(self) -> int:
        config = self.config
        print_config(config.as_dict())

        grid = config.hierarchy().finest
        op = assemble(grid, config.anisotropy())
        state = setup(config.smoother_spec(), op)
        estimate = estimate_contraction(state, config.omega, config.probe_iterations, config.seed)

        print_probe_result(config.smoother, config.omega, estimate)
        return EXIT_OK if estimate < 1.0 else EXIT_NOT_CONTRACTIVE


COMMANDS = {
    "solve": MultigridCLI.cmd_solve,
    "study": MultigridCLI.cmd_study,
    "probe": MultigridCLI.cmd_probe,
}


def build_parser() -> argparse.ArgumentParser:
    options = argparse.ArgumentParser(add_help=False)
    options.add_argument("--config", metavar="PATH", help="key = value config file (flags override it)")
    options.add_argument("--quiet", action="store_true", help="only cycle lines, warnings and errors")
    for key, (_, value_range) in CONFIG_KEYS.items():
        options.add_argument(f"--{key}", metavar="VALUE", default=None, help=value_range)

    parser = argparse.ArgumentParser(
        prog="main.py",
        description=f"{APP_NAME} v{APP_VERSION}",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("solve", parents=[options], help="run one multigrid solve")
    commands.add_parser("study", parents=[options], help="run a convergence study")
    commands.add_parser("probe", parents=[options], help="estimate a smoother's contraction")
    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, str]:
    return {key: getattr(args, key) for key in CONFIG_KEYS if getattr(args, key) is not None}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    set_quiet(args.quiet)
    print_banner()

    try:
        config = load_run_config(args.config, _overrides(args))
        return COMMANDS[args.command](MultigridCLI(config))
    except ValueError as e:
        print_error(str(e))
        return EXIT_CONFIG_ERROR
    except OSError as e:
        print_error(f"I/O error: {e}")
        return EXIT_CONFIG_ERROR
    except KeyboardInterrupt:
        print_info("Interrupted")
        return EXIT_CONFIG_ERROR


if __name__ == "__main__":
    sys.exit(main())
