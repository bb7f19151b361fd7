"""
Five-point Stencil Operators - assembly, products and the coarse direct solve

Discretizes -alpha u_xx - beta u_yy in conservative flux form on graded
tensor grids, with the coordinate-system metric folded into the face fluxes.
Coefficients are stored as five arrays of shape (ny, nx): centre and the
north (y+1), south (y-1), east (x+1) and west (x-1) couplings.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg
import scipy.sparse

from src.errors import FactorizationError, LevelMismatchError
from src.mesh import CoordinateSystem, LevelGrid


@dataclass(frozen=True)
class AnisotropySpec:
    alpha: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        for name in ("alpha", "beta"):
            value = getattr(self, name)
            if not value > 0:
                raise ValueError(f"Invalid {name}: must be > 0 (got {value})")

    @property
    def ratio(self) -> float:
        return self.alpha / self.beta


@dataclass(eq=False)
class GridFunction:
    grid: LevelGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            if self.values.size == self.grid.neq:
                self.values = self.values.reshape(self.grid.shape)
            else:
                raise LevelMismatchError(
                    f"values of shape {self.values.shape} do not fit level {self.grid.level} "
                    f"with shape {self.grid.shape}"
                )

    @classmethod
    def zeros(cls, grid: LevelGrid) -> "GridFunction":
        return cls(grid, grid.zeros())

    def copy(self) -> "GridFunction":
        return GridFunction(self.grid, self.values.copy())

    def ravel(self) -> np.ndarray:
        return self.values.ravel()

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def dot(self, other: "GridFunction") -> float:
        check_level(self.grid, other)
        return float(np.vdot(self.values, other.values))


def check_level(grid: LevelGrid, u: GridFunction):
    if u.grid is grid:
        return
    if u.grid.level != grid.level or u.grid.shape != grid.shape:
        raise LevelMismatchError(
            f"grid function on level {u.grid.level} {u.grid.shape} used on level {grid.level} {grid.shape}"
        )


@dataclass(frozen=True, eq=False)
class StencilOperator:
    grid: LevelGrid
    c: np.ndarray
    n: np.ndarray
    s: np.ndarray
    e: np.ndarray
    w: np.ndarray
    aniso: AnisotropySpec = AnisotropySpec()

    @property
    def neq(self) -> int:
        return self.grid.neq

    @property
    def diagonally_dominant(self) -> bool:
        off = np.abs(self.n) + np.abs(self.s) + np.abs(self.e) + np.abs(self.w)
        return bool(np.all(self.c >= off * (1.0 - 1e-12)))

    def row_sums(self) -> np.ndarray:
        return self.c + self.n + self.s + self.e + self.w

    def to_sparse(self) -> scipy.sparse.csr_matrix:
        """Sparse matrix over row-major interior ordering k = j*nx + i."""
        nx = self.grid.nx
        diagonals = [self.c.ravel()]
        offsets = [0]
        if nx > 1:
            diagonals += [self.e.ravel()[:-1], self.w.ravel()[1:]]
            offsets += [1, -1]
        if self.grid.ny > 1:
            diagonals += [self.n.ravel()[:-nx], self.s.ravel()[nx:]]
            offsets += [nx, -nx]
        return scipy.sparse.diags(diagonals, offsets, shape=(self.neq, self.neq), format="csr")

    def to_dense(self) -> np.ndarray:
        return self.to_sparse().toarray()

    def bandwidth(self) -> int:
        if self.grid.ny > 1:
            return self.grid.nx
        return 1 if self.grid.nx > 1 else 0

    def to_banded(self) -> np.ndarray:
        """Upper banded storage as used by scipy.linalg.cholesky_banded."""
        u = self.bandwidth()
        matrix = self.to_sparse()
        ab = np.zeros((u + 1, self.neq))
        for d in range(u + 1):
            ab[u - d, d:] = matrix.diagonal(d)
        return ab


def _metric_weights(grid: LevelGrid):
    """
    Face weights of the x- and y-fluxes, broadcastable to (ny, nx).

    Returns (east, west, north, south).
    """
    x, y = grid.x_coords, grid.y_coords
    xi = x[1:-1][np.newaxis, :]
    yj = y[1:-1][:, np.newaxis]
    x_east = (0.5 * (x[1:-1] + x[2:]))[np.newaxis, :]
    x_west = (0.5 * (x[:-2] + x[1:-1]))[np.newaxis, :]
    y_north = (0.5 * (y[1:-1] + y[2:]))[:, np.newaxis]
    y_south = (0.5 * (y[:-2] + y[1:-1]))[:, np.newaxis]

    system = CoordinateSystem(grid.coord_system)
    if system == CoordinateSystem.CARTESIAN:
        one = np.ones((1, 1))
        return one, one, one, one

    if system == CoordinateSystem.CYLINDRICAL:
        # x = r, y = z: radial fluxes at the face radius, axial fluxes at the node radius
        return x_east, x_west, xi, xi

    # x = r, y = theta: r^2 sin(theta) times the Laplacian
    sin_node = np.sin(yj)
    return x_east ** 2 * sin_node, x_west ** 2 * sin_node, np.sin(y_north), np.sin(y_south)


def assemble(grid: LevelGrid, aniso: AnisotropySpec = AnisotropySpec()) -> StencilOperator:
    x, y = grid.x_coords, grid.y_coords
    hx = np.diff(x)
    hy = np.diff(y)
    if np.any(hx <= 0) or np.any(hy <= 0):
        raise ValueError(f"Invalid grid: level {grid.level} coordinates are not strictly increasing")

    hw = hx[:-1][np.newaxis, :]
    he = hx[1:][np.newaxis, :]
    hs = hy[:-1][:, np.newaxis]
    hn = hy[1:][:, np.newaxis]
    dx = 0.5 * (hw + he)
    dy = 0.5 * (hs + hn)

    g_east, g_west, g_north, g_south = _metric_weights(grid)

    # Reference cell area of the level; uniform Cartesian grids give the classic 1/h^2 stencil
    scale = ((x[-1] - x[0]) / (grid.nx + 1)) * ((y[-1] - y[0]) / (grid.ny + 1))

    shape = grid.shape
    e = np.broadcast_to(-aniso.alpha * g_east * dy / he, shape) / scale
    w = np.broadcast_to(-aniso.alpha * g_west * dy / hw, shape) / scale
    n = np.broadcast_to(-aniso.beta * g_north * dx / hn, shape) / scale
    s = np.broadcast_to(-aniso.beta * g_south * dx / hs, shape) / scale
    c = -(e + w + n + s)

    # Dirichlet boundary: couplings to boundary nodes leave the matrix but stay in c
    e, w, n, s = e.copy(), w.copy(), n.copy(), s.copy()
    e[:, -1] = 0.0
    w[:, 0] = 0.0
    n[-1, :] = 0.0
    s[0, :] = 0.0

    return StencilOperator(grid=grid, c=c, n=n, s=s, e=e, w=w, aniso=aniso)


def apply_values(op: StencilOperator, u: np.ndarray) -> np.ndarray:
    """A u on raw (ny, nx) arrays."""
    y = op.c * u
    y[:, :-1] += op.e[:, :-1] * u[:, 1:]
    y[:, 1:] += op.w[:, 1:] * u[:, :-1]
    y[:-1, :] += op.n[:-1, :] * u[1:, :]
    y[1:, :] += op.s[1:, :] * u[:-1, :]
    return y


def apply(op: StencilOperator, x: GridFunction) -> GridFunction:
    check_level(op.grid, x)
    return GridFunction(op.grid, apply_values(op, x.values))


def residual(op: StencilOperator, x: GridFunction, b: GridFunction) -> GridFunction:
    """Defect d = b - A x."""
    check_level(op.grid, x)
    check_level(op.grid, b)
    return GridFunction(op.grid, b.values - apply_values(op, x.values))


@dataclass(frozen=True, eq=False)
class BandedCholesky:
    grid: LevelGrid
    factor: np.ndarray

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        z = scipy.linalg.cho_solve_banded((self.factor, False), rhs.ravel())
        return z.reshape(self.grid.shape)


def factorize(op: StencilOperator) -> BandedCholesky:
    """Banded Cholesky factorization of an SPD stencil operator."""
    try:
        factor = scipy.linalg.cholesky_banded(op.to_banded(), lower=False)
    except np.linalg.LinAlgError as e:
        raise FactorizationError(f"banded Cholesky failed on level {op.grid.level}: {e}") from e
    return BandedCholesky(grid=op.grid, factor=factor)


def direct_solve(op: StencilOperator, b: GridFunction, factor: Optional[BandedCholesky] = None) -> GridFunction:
    check_level(op.grid, b)
    if factor is None:
        factor = factorize(op)
    return GridFunction(op.grid, factor.solve(b.values))
