"""
Grid Transfer Operators

Coordinate-aware bilinear prolongation and its row-normalized transpose as
restriction. Both are tensor products of 1-D operators, so graded grids get
interpolation weights from the actual node positions.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse

from src.mesh import LevelGrid, is_nested
from src.stencil import GridFunction, check_level


def prolongation_1d(coarse_nodes: np.ndarray, fine_nodes: np.ndarray) -> scipy.sparse.csr_matrix:
    """
    Linear interpolation between nested 1-D node sets, interior rows/columns only.

    Boundary coarse nodes carry the homogeneous Dirichlet value and are dropped.
    """
    nc = len(coarse_nodes) - 2
    nf = len(fine_nodes) - 2
    rows, cols, vals = [], [], []

    for f in range(1, nf + 1):
        if f % 2 == 0:
            rows.append(f - 1)
            cols.append(f // 2 - 1)
            vals.append(1.0)
            continue

        left, right = (f - 1) // 2, (f + 1) // 2
        width = coarse_nodes[right] - coarse_nodes[left]
        if left >= 1:
            rows.append(f - 1)
            cols.append(left - 1)
            vals.append((coarse_nodes[right] - fine_nodes[f]) / width)
        if right <= nc:
            rows.append(f - 1)
            cols.append(right - 1)
            vals.append((fine_nodes[f] - coarse_nodes[left]) / width)

    return scipy.sparse.csr_matrix((vals, (rows, cols)), shape=(nf, nc))


def restriction_1d(prolongation: scipy.sparse.csr_matrix) -> scipy.sparse.csr_matrix:
    """Transpose of the prolongation with unit row sums (constants map to constants)."""
    transposed = prolongation.T.tocsr()
    sums = np.asarray(transposed.sum(axis=1)).ravel()
    return scipy.sparse.diags(1.0 / sums) @ transposed


def _tensor_apply(my: scipy.sparse.csr_matrix, mx: scipy.sparse.csr_matrix, values: np.ndarray) -> np.ndarray:
    """(My kron Mx) applied to row-major values of shape (ny, nx)."""
    return np.asarray(my @ np.asarray(mx @ values.T).T)


@dataclass(frozen=True, eq=False)
class GridTransfer:
    coarse: LevelGrid
    fine: LevelGrid
    px: scipy.sparse.csr_matrix
    py: scipy.sparse.csr_matrix
    rx: scipy.sparse.csr_matrix
    ry: scipy.sparse.csr_matrix

    def prolong(self, values: np.ndarray) -> np.ndarray:
        return _tensor_apply(self.py, self.px, values)

    def restrict(self, values: np.ndarray) -> np.ndarray:
        return _tensor_apply(self.ry, self.rx, values)

    def prolongation_matrix(self) -> scipy.sparse.csr_matrix:
        return scipy.sparse.kron(self.py, self.px, format="csr")

    def restriction_matrix(self) -> scipy.sparse.csr_matrix:
        return scipy.sparse.kron(self.ry, self.rx, format="csr")


def build_transfer(coarse: LevelGrid, fine: LevelGrid) -> GridTransfer:
    if not is_nested(coarse, fine):
        raise ValueError(
            f"Invalid levels: level {coarse.level} {coarse.shape} is not nested in level {fine.level} {fine.shape}"
        )
    px = prolongation_1d(coarse.x_coords, fine.x_coords)
    py = prolongation_1d(coarse.y_coords, fine.y_coords)
    return GridTransfer(
        coarse=coarse,
        fine=fine,
        px=px,
        py=py,
        rx=restriction_1d(px),
        ry=restriction_1d(py),
    )


def restrict(fine: GridFunction, coarse_grid: LevelGrid, transfer: Optional[GridTransfer] = None) -> GridFunction:
    if transfer is None:
        transfer = build_transfer(coarse_grid, fine.grid)
    check_level(transfer.fine, fine)
    return GridFunction(coarse_grid, transfer.restrict(fine.values))


def prolong(coarse: GridFunction, fine_grid: LevelGrid, transfer: Optional[GridTransfer] = None) -> GridFunction:
    if transfer is None:
        transfer = build_transfer(coarse.grid, fine_grid)
    check_level(transfer.coarse, coarse)
    return GridFunction(fine_grid, transfer.prolong(coarse.values))
