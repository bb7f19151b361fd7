"""
Multigrid Engine

MG(l, u0, g): m pre-smoothing steps, defect restriction, p recursive
coarse solves from a zero start, correction u <- u + omega_l P u_c, n
post-smoothing steps. Level 1 is solved directly (or by smoothing when the
coarse solver is set to "smoother"). V, W and F cycles share the recursion;
the outer loop runs cycles on the finest level until the relative residual
target is met.
"""

import time
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from config import (
    DEFAULT_COARSE_STEPS,
    DEFAULT_CORRECTION_OMEGA,
    DEFAULT_CYCLE,
    DEFAULT_MAX_CYCLES,
    DEFAULT_OMEGA,
    DEFAULT_POST_STEPS,
    DEFAULT_PRE_STEPS,
    DEFAULT_TOL,
    DIVERGENCE_FACTOR,
)
from src.errors import DivergenceError
from src.mesh import GridHierarchy
from src.problem import ModelProblem
from src.smoother import SmootherSpec, SmootherState, setup
from src.stencil import (
    BandedCholesky,
    GridFunction,
    StencilOperator,
    apply_values,
    check_level,
    factorize,
)
from src.transfer import GridTransfer, build_transfer

CYCLE_RECURSIONS = {"V": 1, "W": 2}

Visit = Tuple[int, str]


@dataclass(frozen=True)
class CycleSpec:
    cycle: str = DEFAULT_CYCLE
    pre_steps: int = DEFAULT_PRE_STEPS
    post_steps: int = DEFAULT_POST_STEPS
    correction_omega: Union[float, str] = DEFAULT_CORRECTION_OMEGA
    smoother: SmootherSpec = field(default_factory=SmootherSpec)
    omega: float = DEFAULT_OMEGA
    tolerance: float = DEFAULT_TOL
    max_cycles: int = DEFAULT_MAX_CYCLES
    coarse_solver: str = "direct"
    coarse_steps: int = DEFAULT_COARSE_STEPS

    def __post_init__(self):
        if self.cycle not in ("V", "W", "F"):
            raise ValueError(f"Invalid cycle: must be one of {{V, W, F}} (got {self.cycle!r})")
        if self.pre_steps < 0 or self.post_steps < 0:
            raise ValueError("Invalid pre_steps/post_steps: must be >= 0")
        if self.pre_steps + self.post_steps < 1:
            raise ValueError("Invalid pre_steps/post_steps: at least one smoothing step per level visit")
        if isinstance(self.correction_omega, str):
            if self.correction_omega != "adaptive":
                raise ValueError(
                    f"Invalid correction_omega: must be a number or 'adaptive' (got {self.correction_omega!r})"
                )
        elif not self.correction_omega > 0:
            raise ValueError(f"Invalid correction_omega: must be > 0 (got {self.correction_omega})")
        if not self.omega > 0:
            raise ValueError(f"Invalid omega: must be > 0 (got {self.omega})")
        if not self.tolerance > 0:
            raise ValueError(f"Invalid tol: must be > 0 (got {self.tolerance})")
        if self.max_cycles < 1:
            raise ValueError(f"Invalid max_cycles: must be >= 1 (got {self.max_cycles})")
        if self.coarse_solver not in ("direct", "smoother"):
            raise ValueError(f"Invalid coarse_solver: must be 'direct' or 'smoother' (got {self.coarse_solver!r})")
        if self.coarse_steps < 1:
            raise ValueError(f"Invalid coarse_steps: must be >= 1 (got {self.coarse_steps})")

    @property
    def adaptive(self) -> bool:
        return self.correction_omega == "adaptive"

    @property
    def recursions(self) -> int:
        return CYCLE_RECURSIONS.get(self.cycle, 1)


@dataclass
class SolveReport:
    iterations: int
    residual_history: List[float]
    convergence_factors: List[float]
    converged: bool
    wall_time: float
    reference_norm: float
    status: str = "converged"
    solution: Optional[GridFunction] = None

    @property
    def relative_history(self) -> List[float]:
        if self.reference_norm == 0.0:
            return [0.0 for _ in self.residual_history]
        return [r / self.reference_norm for r in self.residual_history]

    @property
    def final_relative_residual(self) -> float:
        return self.relative_history[-1]

    @property
    def initial_relative_residual(self) -> float:
        return self.relative_history[0]

    @property
    def mean_rate(self) -> float:
        if len(self.residual_history) < 2:
            return 0.0
        return convergence_rate(self.residual_history)


def convergence_rate(history: Sequence[float]) -> float:
    """
    Geometric-mean per-cycle factor (r_K / r_0)^(1/K).

    A zero residual anywhere in the history gives 0.
    """
    if len(history) < 2:
        raise ValueError(f"Invalid history: needs at least 2 entries (got {len(history)})")
    values = np.asarray(history, dtype=float)
    if np.any(values == 0.0):
        return 0.0
    cycles = len(values) - 1
    return float((values[-1] / values[0]) ** (1.0 / cycles))


def _factors(history: List[float]) -> List[float]:
    factors = []
    for previous, current in zip(history[:-1], history[1:]):
        factors.append(current / previous if previous > 0 else 0.0)
    return factors


def adaptive_omega_values(d: np.ndarray, correction: np.ndarray, op: StencilOperator) -> float:
    if not np.any(correction):
        return 1.0
    numerator = float(np.vdot(d, correction))
    denominator = float(np.vdot(apply_values(op, correction), correction))
    if denominator <= 0.0:
        raise RuntimeError(f"non-positive energy of coarse correction on level {op.grid.level}")
    return numerator / denominator


def adaptive_omega(d: GridFunction, correction_fine: GridFunction, op: StencilOperator) -> float:
    """
    Correction weight minimizing the energy norm of the error along the correction:

        omega_l = (d, c) / (A c, c)
    """
    check_level(op.grid, d)
    check_level(op.grid, correction_fine)
    return adaptive_omega_values(d.values, correction_fine.values, op)


def _visit_plan(level: int, cycle: str) -> List[Visit]:
    if level == 1:
        return [(1, "direct")]

    plan = [(level, "smooth")]
    if cycle == "F":
        plan += _visit_plan(level - 1, "F")
        if level - 1 > 1:
            plan += _visit_plan(level - 1, "V")
    else:
        for _ in range(CYCLE_RECURSIONS[cycle]):
            plan += _visit_plan(level - 1, cycle)
    plan.append((level, "smooth"))
    return plan


def merge_visits(visits: List[Visit]) -> List[Visit]:
    """Collapse consecutive visits to the same level into one."""
    merged: List[Visit] = []
    for visit in visits:
        if merged and merged[-1][0] == visit[0]:
            continue
        merged.append(visit)
    return merged


def cycle_schedule(levels: int, cycle: str) -> List[Visit]:
    if levels < 1:
        raise ValueError(f"Invalid levels: must be >= 1 (got {levels})")
    return merge_visits(_visit_plan(levels, cycle))


def fcycle_schedule(levels: int) -> List[Visit]:
    return cycle_schedule(levels, "F")


class MultigridSolver:
    """
    Per-solve multigrid state: smoother setups, coarse factorization and
    transfer operators for every level of a problem's hierarchy.
    """

    def __init__(self, problem: ModelProblem, spec: CycleSpec, record_trace: bool = False):
        self.problem = problem
        self.spec = spec
        self.hierarchy: GridHierarchy = problem.hierarchy
        self.operators = problem.operators
        self.trace: Optional[List[Visit]] = [] if record_trace else None

        levels = len(self.hierarchy)
        first_smoothed = 1 if spec.coarse_solver == "smoother" else 2
        self.states: List[Optional[SmootherState]] = [None] * levels
        for level in range(first_smoothed, levels + 1):
            self.states[level - 1] = setup(spec.smoother, self.operators[level - 1])

        self.coarse_factor: Optional[BandedCholesky] = None
        if spec.coarse_solver == "direct":
            self.coarse_factor = factorize(self.operators[0])

        self.transfers: List[Optional[GridTransfer]] = [None] * levels
        for level in range(2, levels + 1):
            self.transfers[level - 1] = build_transfer(self.hierarchy[level - 1], self.hierarchy[level])

    def state(self, level: int) -> SmootherState:
        state = self.states[level - 1]
        if state is None:
            raise ValueError(f"no smoother set up on level {level}")
        return state

    def _record(self, level: int, action: str):
        if self.trace is not None:
            self.trace.append((level, action))

    def _coarse_solve(self, u: np.ndarray, g: np.ndarray) -> np.ndarray:
        self._record(1, "direct")
        if self.coarse_factor is not None:
            return self.coarse_factor.solve(g)
        state = self.state(1)
        for _ in range(self.spec.coarse_steps):
            u = state.smooth(u, g, self.spec.omega)
        return u

    def _smooth(self, level: int, u: np.ndarray, g: np.ndarray, steps: int) -> np.ndarray:
        state = self.state(level)
        for _ in range(steps):
            u = state.smooth(u, g, self.spec.omega)
        return u

    def _cycle(self, level: int, u: np.ndarray, g: np.ndarray, cycle: str) -> np.ndarray:
        if level == 1:
            return self._coarse_solve(u, g)

        spec = self.spec
        op = self.operators[level - 1]
        transfer = self.transfers[level - 1]

        self._record(level, "smooth")
        u = self._smooth(level, u, g, spec.pre_steps)

        d = g - apply_values(op, u)
        g_coarse = transfer.restrict(d)
        u_coarse = np.zeros(transfer.coarse.shape)
        if cycle == "F":
            u_coarse = self._cycle(level - 1, u_coarse, g_coarse, "F")
            if level - 1 > 1:
                u_coarse = self._cycle(level - 1, u_coarse, g_coarse, "V")
        else:
            for _ in range(CYCLE_RECURSIONS[cycle]):
                u_coarse = self._cycle(level - 1, u_coarse, g_coarse, cycle)

        correction = transfer.prolong(u_coarse)
        if spec.adaptive:
            omega_l = adaptive_omega_values(d, correction, op)
        else:
            omega_l = float(spec.correction_omega)
        u = u + omega_l * correction

        self._record(level, "smooth")
        return self._smooth(level, u, g, spec.post_steps)

    def mg_cycle(self, level: int, u0: GridFunction, g: GridFunction) -> GridFunction:
        if level < 1 or level > len(self.hierarchy):
            raise ValueError(f"Invalid level: {level} outside 1..{len(self.hierarchy)}")
        grid = self.hierarchy[level]
        check_level(grid, u0)
        check_level(grid, g)
        return GridFunction(grid, self._cycle(level, u0.values.copy(), g.values, self.spec.cycle))

    def solve(
        self,
        b: Optional[GridFunction] = None,
        u0: Optional[GridFunction] = None,
        on_cycle: Optional[Callable[[int, float, Optional[float]], None]] = None,
    ) -> SolveReport:
        """
        Outer cycles on the finest level until ||r_k|| / ||b|| <= tolerance.

        Raises DivergenceError (carrying the partial report) when the residual
        exceeds DIVERGENCE_FACTOR times the reference or stops being finite.
        """
        spec = self.spec
        finest = self.hierarchy.finest
        op = self.operators[-1]
        levels = len(self.hierarchy)

        b = self.problem.rhs if b is None else b
        check_level(finest, b)
        u = np.zeros(finest.shape) if u0 is None else u0.values.copy()
        if u0 is not None:
            check_level(finest, u0)

        start = time.perf_counter()
        residual = float(np.linalg.norm(b.values - apply_values(op, u)))
        reference = float(np.linalg.norm(b.values))
        if reference == 0.0:
            reference = residual

        history = [residual]
        if on_cycle is not None:
            on_cycle(0, residual, None)

        def report(converged: bool, status: str) -> SolveReport:
            return SolveReport(
                iterations=len(history) - 1,
                residual_history=list(history),
                convergence_factors=_factors(history),
                converged=converged,
                wall_time=time.perf_counter() - start,
                reference_norm=reference,
                status=status,
                solution=GridFunction(finest, u),
            )

        if reference == 0.0 or residual <= spec.tolerance * reference:
            return report(True, "converged")

        for k in range(1, spec.max_cycles + 1):
            u = self._cycle(levels, u, b.values, spec.cycle)
            residual = float(np.linalg.norm(b.values - apply_values(op, u)))
            history.append(residual)
            if on_cycle is not None:
                on_cycle(k, residual, residual / history[-2] if history[-2] > 0 else 0.0)

            if not np.isfinite(residual) or residual > DIVERGENCE_FACTOR * reference:
                raise DivergenceError(
                    f"residual {residual:.3e} exceeded {DIVERGENCE_FACTOR:g} x reference after {k} cycles",
                    report(False, "diverged"),
                )
            if residual <= spec.tolerance * reference:
                return report(True, "converged")

        return report(False, "max_cycles")


def mg_cycle(
    level: int,
    u0: GridFunction,
    g: GridFunction,
    spec: CycleSpec,
    problem: ModelProblem,
) -> GridFunction:
    return MultigridSolver(problem, spec).mg_cycle(level, u0, g)


def solve(problem: ModelProblem, spec: CycleSpec, start: Optional[GridFunction] = None) -> SolveReport:
    """Solve the problem's finest-level system from ``start`` (zero when None)."""
    return MultigridSolver(problem, spec).solve(u0=start)
