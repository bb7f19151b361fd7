"""
Preconditioned Richardson Smoothers

    x <- x - omega * C^-1 (A x - b)

for the point (Richardson, Jacobi, Gauss-Seidel/SOR, ILU(0)) and line
(TRI, ADI, GSTRI, GSADI) choices of C. Every preconditioner is copied into
place and factorized once in setup(); applying it afterwards only runs
substitutions against the stored factors.

Line preconditioners in y run the x-line kernel on transposed views of the
operator and the defect, and transpose the result back.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional, Tuple

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from config import (
    DEFAULT_SMOOTHER_OMEGA,
    RICHARDSON_POWER_ITERATIONS,
    RICHARDSON_SAFETY,
)
from src.errors import FactorizationError
from src.stencil import GridFunction, StencilOperator, apply_values, check_level
from src.ui import print_warning
from src.validation import validate_smoother_omega


class SmootherKind(str, Enum):
    RICHARDSON = "richardson"
    JACOBI = "jacobi"
    GAUSS_SEIDEL = "gauss_seidel"
    SOR = "sor"
    ILU0 = "ilu0"
    TRI_X = "tri_x"
    TRI_Y = "tri_y"
    ADI = "adi"
    GSTRI_X = "gstri_x"
    GSTRI_Y = "gstri_y"
    GSADI = "gsadi"


@dataclass(frozen=True)
class SmootherSpec:
    kind: SmootherKind = SmootherKind.GAUSS_SEIDEL
    omega: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", SmootherKind(self.kind))
        is_valid, message = validate_smoother_omega(self.kind.value, self.omega)
        if not is_valid:
            raise ValueError(f"Invalid smoother_omega: {message}")

    @property
    def resolved_omega(self) -> Optional[float]:
        if self.omega is not None:
            return float(self.omega)
        return DEFAULT_SMOOTHER_OMEGA[self.kind.value]


@dataclass(frozen=True, eq=False)
class LineFactors:
    """
    Thomas-algorithm LU of a batch of tridiagonal lines (lines along axis 1).

    mult: elimination multipliers, piv: pivots, sup: super-diagonal.
    """
    mult: np.ndarray
    piv: np.ndarray
    sup: np.ndarray

    @property
    def size(self) -> int:
        return self.mult.size + self.piv.size + self.sup.size

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        y = np.array(rhs, dtype=float, copy=True)
        n = y.shape[1]
        for i in range(1, n):
            y[:, i] -= self.mult[:, i] * y[:, i - 1]
        y[:, n - 1] /= self.piv[:, n - 1]
        for i in range(n - 2, -1, -1):
            y[:, i] = (y[:, i] - self.sup[:, i] * y[:, i + 1]) / self.piv[:, i]
        return y

    def solve_line(self, line: int, rhs: np.ndarray) -> np.ndarray:
        rows = slice(line, line + 1)
        part = LineFactors(self.mult[rows], self.piv[rows], self.sup[rows])
        return part.solve(rhs[np.newaxis, :])[0]


def factor_lines(sub: np.ndarray, diag: np.ndarray, sup: np.ndarray) -> LineFactors:
    n = diag.shape[1]
    mult = np.zeros_like(diag, dtype=float)
    piv = np.empty_like(diag, dtype=float)
    piv[:, 0] = diag[:, 0]
    for i in range(1, n):
        mult[:, i] = sub[:, i] / piv[:, i - 1]
        piv[:, i] = diag[:, i] - mult[:, i] * sup[:, i - 1]

    if not np.all(piv > 0):
        raise FactorizationError("non-positive pivot in tridiagonal line factorization")

    return LineFactors(mult=mult, piv=piv, sup=np.array(sup, dtype=float, copy=True))


def _line_arrays(op: StencilOperator, direction: str) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """(sub, diag, sup, transverse-lower) with lines along axis 1."""
    if direction == "x":
        return op.w, op.c, op.e, op.s
    # Virtual transpose: y-lines become rows
    return op.s.T, op.c.T, op.n.T, op.w.T


class SmootherState:
    """
    Set-up preconditioner of one level.

    Immutable after construction; apply() and smooth() are pure.
    """

    def __init__(self, spec: SmootherSpec, op: StencilOperator):
        self.spec = spec
        self.op = op
        self.kind = spec.kind
        self.omega = spec.resolved_omega
        self.lambda_max: Optional[float] = None
        self.clamped = False
        self.workspace: Dict[str, np.ndarray] = {}
        self.lines: Dict[str, LineFactors] = {}
        self._factors: Dict[str, scipy.sparse.linalg.SuperLU] = {}

        builder = _SETUP[self.kind]
        builder(self)

    @property
    def neq(self) -> int:
        return self.op.neq

    @property
    def workspace_size(self) -> int:
        """Stored preconditioner entries (the operator's own arrays are not counted)."""
        size = sum(array.size for array in self.workspace.values())
        size += sum(factors.size for factors in self.lines.values())
        return size

    def apply(self, r: np.ndarray) -> np.ndarray:
        """z = C^-1 r on raw (ny, nx) arrays."""
        return _APPLY[self.kind](self, r)

    def smooth(self, x: np.ndarray, b: np.ndarray, omega_damp: float) -> np.ndarray:
        defect = b - apply_values(self.op, x)
        return x + omega_damp * self.apply(defect)


# --- setup ------------------------------------------------------------------

def _estimate_lambda_max(op: StencilOperator, iterations: int = RICHARDSON_POWER_ITERATIONS) -> float:
    rng = np.random.default_rng(0)
    v = rng.standard_normal(op.grid.shape)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(iterations):
        av = apply_values(op, v)
        lam = float(np.vdot(v, av))
        norm = np.linalg.norm(av)
        if norm == 0:
            break
        v = av / norm
    return lam


def _setup_richardson(state: SmootherState):
    lam = _estimate_lambda_max(state.op)
    state.lambda_max = lam
    requested = state.omega
    if requested is None:
        state.omega = RICHARDSON_SAFETY / lam
    elif requested > 1.0 / lam:
        state.omega = RICHARDSON_SAFETY / lam
        state.clamped = True
        print_warning(
            f"Richardson omega {requested:g} exceeds 1/lambda_max = {1.0 / lam:.4e}; "
            f"clamped to {state.omega:.4e}"
        )


def _setup_jacobi(state: SmootherState):
    pass


def _setup_gauss_seidel(state: SmootherState):
    op, omega = state.op, state.omega
    nx = op.grid.nx
    lower_w = omega * op.w
    lower_s = omega * op.s
    state.workspace = {"diag": op.c.copy(), "lower_w": lower_w, "lower_s": lower_s}

    diagonals = [op.c.ravel()]
    offsets = [0]
    if nx > 1:
        diagonals.append(lower_w.ravel()[1:])
        offsets.append(-1)
    if op.grid.ny > 1:
        diagonals.append(lower_s.ravel()[nx:])
        offsets.append(-nx)
    lower = scipy.sparse.diags(diagonals, offsets, shape=(op.neq, op.neq), format="csc")
    state._factors["lower"] = scipy.sparse.linalg.splu(lower, permc_spec="NATURAL")


def ilu0_factor(op: StencilOperator) -> Dict[str, np.ndarray]:
    """
    Zero-fill incomplete LU on the five-point pattern, A = L'U' + R.

    L' is unit lower with multipliers on the west and south diagonals; U'
    keeps the east and north couplings of A over the pivots d.
    """
    nx, neq = op.grid.nx, op.neq
    c = op.c.ravel().tolist()
    w = op.w.ravel().tolist()
    s = op.s.ravel().tolist()
    e = op.e.ravel().tolist()
    n = op.n.ravel().tolist()

    d = [0.0] * neq
    lw = [0.0] * neq
    ls = [0.0] * neq
    for k in range(neq):
        pivot = c[k]
        if k >= 1 and w[k] != 0.0:
            lw[k] = w[k] / d[k - 1]
            pivot -= lw[k] * e[k - 1]
        if k >= nx and s[k] != 0.0:
            ls[k] = s[k] / d[k - nx]
            pivot -= ls[k] * n[k - nx]
        if pivot <= 0.0:
            raise FactorizationError(f"non-positive ILU(0) pivot at row {k}")
        d[k] = pivot

    shape = op.grid.shape
    return {
        "lower_w": np.reshape(lw, shape),
        "lower_s": np.reshape(ls, shape),
        "pivot": np.reshape(d, shape),
        "upper_e": op.e.copy(),
        "upper_n": op.n.copy(),
    }


def _setup_ilu0(state: SmootherState):
    op = state.op
    nx = op.grid.nx
    factors = ilu0_factor(op)
    state.workspace = factors

    lower_diagonals, lower_offsets = [np.ones(op.neq)], [0]
    upper_diagonals, upper_offsets = [factors["pivot"].ravel()], [0]
    if nx > 1:
        lower_diagonals.append(factors["lower_w"].ravel()[1:])
        lower_offsets.append(-1)
        upper_diagonals.append(factors["upper_e"].ravel()[:-1])
        upper_offsets.append(1)
    if op.grid.ny > 1:
        lower_diagonals.append(factors["lower_s"].ravel()[nx:])
        lower_offsets.append(-nx)
        upper_diagonals.append(factors["upper_n"].ravel()[:-nx])
        upper_offsets.append(nx)

    shape = (op.neq, op.neq)
    lower = scipy.sparse.diags(lower_diagonals, lower_offsets, shape=shape, format="csc")
    upper = scipy.sparse.diags(upper_diagonals, upper_offsets, shape=shape, format="csc")
    state._factors["lower"] = scipy.sparse.linalg.splu(lower, permc_spec="NATURAL")
    state._factors["upper"] = scipy.sparse.linalg.splu(upper, permc_spec="NATURAL")


def _factor_direction(state: SmootherState, direction: str):
    sub, diag, sup, _ = _line_arrays(state.op, direction)
    omega = state.omega
    state.lines[direction] = factor_lines(omega * sub, omega * diag, omega * sup)


def _setup_tri_x(state: SmootherState):
    _factor_direction(state, "x")


def _setup_tri_y(state: SmootherState):
    _factor_direction(state, "y")


def _setup_both(state: SmootherState):
    _factor_direction(state, "x")
    _factor_direction(state, "y")


# --- application ------------------------------------------------------------

def _apply_richardson(state: SmootherState, r: np.ndarray) -> np.ndarray:
    return state.omega * r


def _apply_jacobi(state: SmootherState, r: np.ndarray) -> np.ndarray:
    return state.omega * r / state.op.c


def _apply_gauss_seidel(state: SmootherState, r: np.ndarray) -> np.ndarray:
    z = state._factors["lower"].solve(r.ravel())
    return z.reshape(r.shape)


def _apply_ilu0(state: SmootherState, r: np.ndarray) -> np.ndarray:
    y = state._factors["lower"].solve(r.ravel())
    z = state._factors["upper"].solve(y)
    return state.omega * z.reshape(r.shape)


def _line_solve(state: SmootherState, direction: str, r: np.ndarray) -> np.ndarray:
    factors = state.lines[direction]
    if direction == "x":
        return factors.solve(r)
    return factors.solve(r.T).T


def _line_gs_solve(state: SmootherState, direction: str, r: np.ndarray) -> np.ndarray:
    """Lines in lexicographic order, each seeing the already updated previous line."""
    factors = state.lines[direction]
    _, _, _, lower = _line_arrays(state.op, direction)
    rhs = r if direction == "x" else r.T
    omega = state.omega

    z = np.zeros_like(rhs, dtype=float)
    z[0] = factors.solve_line(0, rhs[0])
    for line in range(1, rhs.shape[0]):
        z[line] = factors.solve_line(line, rhs[line] - omega * lower[line] * z[line - 1])

    return z if direction == "x" else z.T


def _apply_tri_x(state: SmootherState, r: np.ndarray) -> np.ndarray:
    return _line_solve(state, "x", r)


def _apply_tri_y(state: SmootherState, r: np.ndarray) -> np.ndarray:
    return _line_solve(state, "y", r)


def _apply_gstri_x(state: SmootherState, r: np.ndarray) -> np.ndarray:
    return _line_gs_solve(state, "x", r)


def _apply_gstri_y(state: SmootherState, r: np.ndarray) -> np.ndarray:
    return _line_gs_solve(state, "y", r)


def _alternate(state: SmootherState, r: np.ndarray, sweep) -> np.ndarray:
    # x-sweep, then y-sweep on the defect left by the x-sweep
    z = sweep(state, "x", r)
    remaining = r - apply_values(state.op, z)
    return z + sweep(state, "y", remaining)


def _apply_adi(state: SmootherState, r: np.ndarray) -> np.ndarray:
    return _alternate(state, r, _line_solve)


def _apply_gsadi(state: SmootherState, r: np.ndarray) -> np.ndarray:
    return _alternate(state, r, _line_gs_solve)


_SETUP = {
    SmootherKind.RICHARDSON: _setup_richardson,
    SmootherKind.JACOBI: _setup_jacobi,
    SmootherKind.GAUSS_SEIDEL: _setup_gauss_seidel,
    SmootherKind.SOR: _setup_gauss_seidel,
    SmootherKind.ILU0: _setup_ilu0,
    SmootherKind.TRI_X: _setup_tri_x,
    SmootherKind.TRI_Y: _setup_tri_y,
    SmootherKind.ADI: _setup_both,
    SmootherKind.GSTRI_X: _setup_tri_x,
    SmootherKind.GSTRI_Y: _setup_tri_y,
    SmootherKind.GSADI: _setup_both,
}

_APPLY = {
    SmootherKind.RICHARDSON: _apply_richardson,
    SmootherKind.JACOBI: _apply_jacobi,
    SmootherKind.GAUSS_SEIDEL: _apply_gauss_seidel,
    SmootherKind.SOR: _apply_gauss_seidel,
    SmootherKind.ILU0: _apply_ilu0,
    SmootherKind.TRI_X: _apply_tri_x,
    SmootherKind.TRI_Y: _apply_tri_y,
    SmootherKind.ADI: _apply_adi,
    SmootherKind.GSTRI_X: _apply_gstri_x,
    SmootherKind.GSTRI_Y: _apply_gstri_y,
    SmootherKind.GSADI: _apply_gsadi,
}


# --- operations -------------------------------------------------------------

def setup(spec: SmootherSpec, op: StencilOperator) -> SmootherState:
    return SmootherState(spec, op)


def apply_preconditioner(state: SmootherState, r: GridFunction) -> GridFunction:
    check_level(state.op.grid, r)
    return GridFunction(state.op.grid, state.apply(r.values))


def smooth_step(state: SmootherState, x: GridFunction, b: GridFunction, omega_damp: float) -> GridFunction:
    if not omega_damp > 0:
        raise ValueError(f"Invalid omega: must be > 0 (got {omega_damp})")
    check_level(state.op.grid, x)
    check_level(state.op.grid, b)
    return GridFunction(state.op.grid, state.smooth(x.values, b.values, omega_damp))


def estimate_contraction(state: SmootherState, omega_damp: float, iterations: int = 100, seed: int = 0) -> float:
    """
    Power-iteration estimate of the spectral radius of B = I - omega C^-1 A.

    Runs smoothing steps with b = 0 from a random start and returns the last
    ratio of successive error norms.
    """
    if iterations < 10:
        raise ValueError(f"Invalid iterations: must be >= 10 (got {iterations})")
    if not omega_damp > 0:
        raise ValueError(f"Invalid omega: must be > 0 (got {omega_damp})")

    rng = np.random.default_rng(seed)
    x = rng.standard_normal(state.op.grid.shape)
    x /= np.linalg.norm(x)
    zero = np.zeros_like(x)

    ratio = 0.0
    for _ in range(iterations):
        x = state.smooth(x, zero, omega_damp)
        ratio = float(np.linalg.norm(x))
        if ratio == 0.0 or not np.isfinite(ratio):
            break
        x /= ratio
    return ratio
