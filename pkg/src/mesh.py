"""
Structured Grid Hierarchies - graded tensor-product grids on the unit square

Grids are built on the finest level and inherited downward by taking every
second node, so all levels share one geometry and nest exactly.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Tuple

import numpy as np

from config import R_MIN, THETA_MIN


class CoordinateSystem(str, Enum):
    CARTESIAN = "cartesian"
    CYLINDRICAL = "cylindrical"
    SPHERICAL = "spherical"


@dataclass(frozen=True)
class GradingSpec:
    factor_x: float = 1.0
    factor_y: float = 1.0

    def __post_init__(self):
        for name in ("factor_x", "factor_y"):
            value = getattr(self, name)
            if not value > 0:
                raise ValueError(f"Invalid {name}: must be > 0 (got {value})")


@dataclass(frozen=True, eq=False)
class LevelGrid:
    level: int
    x_coords: np.ndarray
    y_coords: np.ndarray
    coord_system: CoordinateSystem = CoordinateSystem.CARTESIAN

    @property
    def nx(self) -> int:
        return len(self.x_coords) - 2

    @property
    def ny(self) -> int:
        return len(self.y_coords) - 2

    @property
    def shape(self) -> Tuple[int, int]:
        """Array shape of interior values: (ny, nx), x varies fastest."""
        return (self.ny, self.nx)

    @property
    def neq(self) -> int:
        return self.nx * self.ny

    @property
    def xi(self) -> np.ndarray:
        """Interior x nodes mapped back to the computational interval [0, 1]."""
        lo, hi = self.x_coords[0], self.x_coords[-1]
        return (self.x_coords[1:-1] - lo) / (hi - lo)

    @property
    def eta(self) -> np.ndarray:
        lo, hi = self.y_coords[0], self.y_coords[-1]
        return (self.y_coords[1:-1] - lo) / (hi - lo)

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape)


@dataclass(frozen=True, eq=False)
class GridHierarchy:
    levels: List[LevelGrid]
    grading: GradingSpec = field(default_factory=GradingSpec)

    def __post_init__(self):
        if len(self.levels) < 1:
            raise ValueError("Invalid levels: a hierarchy needs at least one grid")

    def __getitem__(self, level: int) -> LevelGrid:
        """Grid of a 1-based level (1 = coarsest)."""
        if level < 1 or level > len(self.levels):
            raise IndexError(f"level {level} outside 1..{len(self.levels)}")
        return self.levels[level - 1]

    def __len__(self) -> int:
        return len(self.levels)

    @property
    def finest(self) -> LevelGrid:
        return self.levels[-1]

    @property
    def coarsest(self) -> LevelGrid:
        return self.levels[0]

    @property
    def coord_system(self) -> CoordinateSystem:
        return self.finest.coord_system


def axis_extents(coords: CoordinateSystem) -> Tuple[Tuple[float, float], Tuple[float, float]]:
    """Physical (x, y) intervals the unit square maps onto."""
    coords = CoordinateSystem(coords)
    if coords == CoordinateSystem.CARTESIAN:
        return (0.0, 1.0), (0.0, 1.0)
    if coords == CoordinateSystem.CYLINDRICAL:
        return (R_MIN, 1.0), (0.0, 1.0)
    return (R_MIN, 1.0), (THETA_MIN, math.pi - THETA_MIN)


def grade_axis(n: int, factor: float) -> np.ndarray:
    """
    Node coordinates of a graded axis over [0, 1].

    The n + 1 cell widths form a geometric sequence with ratio ``factor``;
    factor = 1 is the equidistant axis with h = 1/(n + 1).

    Args:
        n: Interior point count
        factor: Ratio between adjacent cell widths

    Returns:
        n + 2 strictly increasing node coordinates, first 0 and last 1
    """
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"Invalid n: must be an integer >= 1 (got {n})")
    if not factor > 0:
        raise ValueError(f"Invalid factor: must be > 0 (got {factor})")

    cells = n + 1
    if factor == 1.0:
        return np.linspace(0.0, 1.0, cells + 1)

    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        widths = factor ** np.arange(cells, dtype=float)
        nodes = np.concatenate(([0.0], np.cumsum(widths)))
        nodes /= nodes[-1]
    nodes[-1] = 1.0
    _check_increasing(nodes, n, factor)
    return nodes


def _check_increasing(nodes: np.ndarray, n: int, factor: float):
    if not (np.all(np.isfinite(nodes)) and np.all(np.diff(nodes) > 0)):
        raise ValueError(
            f"Invalid factor: {factor:g} collapses the {n + 2} nodes of the axis "
            f"(smallest cell width below floating-point resolution)"
        )


def _map_axis(nodes: np.ndarray, extent: Tuple[float, float]) -> np.ndarray:
    lo, hi = extent
    mapped = lo + (hi - lo) * nodes
    mapped[0], mapped[-1] = lo, hi
    return mapped


def graded_nodes(n: int, factor: float, extent: Tuple[float, float]) -> np.ndarray:
    """grade_axis mapped onto a physical interval; raises ValueError if nodes merge there."""
    nodes = _map_axis(grade_axis(n, factor), extent)
    _check_increasing(nodes, n, factor)
    return nodes


def level_size(level: int, coarse_n: int) -> int:
    """Interior points of a 1-based level: 2^(level-1) (n0 + 1) - 1."""
    return 2 ** (level - 1) * (coarse_n + 1) - 1


def coarse_size_for(fine_n: int, levels: int) -> int:
    """
    Coarsest interior size giving ``fine_n`` points after ``levels`` - 1 refinements.

    Raises ValueError when the finest grid cannot be coarsened that often.
    """
    cells = fine_n + 1
    step = 2 ** (levels - 1)
    if cells % step != 0 or cells // step < 2:
        raise ValueError(
            f"Invalid levels: a grid with {fine_n} interior points cannot be coarsened into {levels} levels"
        )
    return cells // step - 1


def build_hierarchy(
    levels: int,
    coarse_n: Tuple[int, int],
    grading: GradingSpec = GradingSpec(),
    coords: CoordinateSystem = CoordinateSystem.CARTESIAN,
) -> GridHierarchy:
    if isinstance(levels, bool) or not isinstance(levels, int) or levels < 1:
        raise ValueError(f"Invalid levels: must be an integer >= 1 (got {levels})")

    nx0, ny0 = coarse_n
    for name, value in (("coarse_n x", nx0), ("coarse_n y", ny0)):
        if value < 1:
            raise ValueError(f"Invalid {name}: must be >= 1 (got {value})")

    coords = CoordinateSystem(coords)
    x_extent, y_extent = axis_extents(coords)

    x_fine = graded_nodes(level_size(levels, nx0), grading.factor_x, x_extent)
    y_fine = graded_nodes(level_size(levels, ny0), grading.factor_y, y_extent)

    grids = []
    for level in range(levels, 0, -1):
        stride = 2 ** (levels - level)
        grids.append(LevelGrid(
            level=level,
            x_coords=x_fine[::stride].copy(),
            y_coords=y_fine[::stride].copy(),
            coord_system=coords,
        ))

    grids.reverse()
    return GridHierarchy(levels=grids, grading=grading)


def is_nested(coarse: LevelGrid, fine: LevelGrid, atol: float = 1e-14) -> bool:
    """True when the coarse nodes are exactly the even-index nodes of the fine grid."""
    if fine.nx != 2 * coarse.nx + 1 or fine.ny != 2 * coarse.ny + 1:
        return False
    return bool(
        np.allclose(fine.x_coords[::2], coarse.x_coords, rtol=0.0, atol=atol)
        and np.allclose(fine.y_coords[::2], coarse.y_coords, rtol=0.0, atol=atol)
    )
