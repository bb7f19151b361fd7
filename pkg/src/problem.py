"""
Model Problem - per-level operators and a manufactured discrete solution

u*(x, y) = sin(pi xi) sin(pi eta) over the computational coordinates, with
b = A u* computed discretely so the exact discrete solution is known at
every resolution.
"""

from dataclasses import dataclass
from typing import List

import numpy as np

from src.mesh import GridHierarchy, LevelGrid
from src.stencil import AnisotropySpec, GridFunction, StencilOperator, apply, assemble, check_level


def manufactured_solution(grid: LevelGrid) -> GridFunction:
    values = np.outer(np.sin(np.pi * grid.eta), np.sin(np.pi * grid.xi))
    return GridFunction(grid, values)


@dataclass(eq=False)
class ModelProblem:
    hierarchy: GridHierarchy
    aniso: AnisotropySpec
    operators: List[StencilOperator]
    rhs: GridFunction
    exact: GridFunction

    def operator(self, level: int) -> StencilOperator:
        """Operator of a 1-based level."""
        return self.operators[level - 1]

    @property
    def levels(self) -> int:
        return len(self.hierarchy)

    @property
    def finest_operator(self) -> StencilOperator:
        return self.operators[-1]

    def with_rhs(self, rhs: GridFunction) -> "ModelProblem":
        check_level(self.hierarchy.finest, rhs)
        return ModelProblem(self.hierarchy, self.aniso, self.operators, rhs, self.exact)


def build_problem(hierarchy: GridHierarchy, aniso: AnisotropySpec = AnisotropySpec()) -> ModelProblem:
    operators = [assemble(grid, aniso) for grid in hierarchy.levels]
    exact = manufactured_solution(hierarchy.finest)
    rhs = apply(operators[-1], exact)
    return ModelProblem(hierarchy=hierarchy, aniso=aniso, operators=operators, rhs=rhs, exact=exact)


def error_energy(op: StencilOperator, u: GridFunction, exact: GridFunction) -> float:
    """Energy norm (A e, e)^(1/2) of the error e = exact - u."""
    error = GridFunction(op.grid, exact.values - u.values)
    return float(np.sqrt(max(apply(op, error).dot(error), 0.0)))
