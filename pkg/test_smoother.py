"""
Smoother tests: workspace table, dense oracles, contraction and mesh dependence
"""

import numpy as np
import pytest
import scipy.linalg

from config import DEFAULT_OMEGA, SMOOTHER_KINDS
from src.errors import LevelMismatchError
from src.mesh import GradingSpec, LevelGrid, build_hierarchy
from src.smoother import (
    SmootherSpec,
    apply_preconditioner,
    estimate_contraction,
    setup,
    smooth_step,
)
from src.stencil import GridFunction, StencilOperator, apply, assemble, direct_solve
from src.study import mesh_dependence_ratios, smoother_rate_sweep


def operator_on(n, coords="cartesian", grading=GradingSpec()):
    grid = build_hierarchy(1, n if isinstance(n, tuple) else (n, n), grading, coords).finest
    return assemble(grid)


def dense_parts(op):
    a = op.to_dense()
    nx = op.grid.nx
    d = np.diag(np.diag(a))
    lower = np.tril(a, -1)
    x_part = np.diag(np.diag(a, 1), 1) + np.diag(np.diag(a, -1), -1)
    y_part = np.diag(np.diag(a, nx), nx) + np.diag(np.diag(a, -nx), -nx)
    return a, d, lower, x_part, y_part


def dense_ilu0(a):
    pattern = a != 0
    lu = a.copy()
    n = len(a)
    for i in range(1, n):
        for k in range(i):
            if not pattern[i, k]:
                continue
            lu[i, k] /= lu[k, k]
            for j in range(k + 1, n):
                if pattern[i, j]:
                    lu[i, j] -= lu[i, k] * lu[k, j]
    return np.tril(lu, -1) + np.eye(n), np.triu(lu)


def dense_preconditioner_solve(kind, state, r):
    """z = C^-1 r from dense matrices."""
    op = state.op
    omega = state.omega
    a, d, lower, x_part, y_part = dense_parts(op)
    nx = op.grid.nx
    tx = d + x_part
    ty = d + y_part
    lower_x = np.tril(x_part)
    lower_y = np.tril(y_part)

    if kind == "richardson":
        return omega * r
    if kind == "jacobi":
        return omega * r / np.diag(a)
    if kind in ("gauss_seidel", "sor"):
        return scipy.linalg.solve_triangular(d + omega * lower, r, lower=True)
    if kind == "ilu0":
        l, u = dense_ilu0(a)
        return omega * np.linalg.solve(u, np.linalg.solve(l, r))
    if kind == "tri_x":
        return np.linalg.solve(omega * tx, r)
    if kind == "tri_y":
        return np.linalg.solve(omega * ty, r)
    if kind == "gstri_x":
        return np.linalg.solve(omega * (tx + lower_y), r)
    if kind == "gstri_y":
        return np.linalg.solve(omega * (ty + lower_x), r)
    if kind == "adi":
        z = np.linalg.solve(omega * tx, r)
        return z + np.linalg.solve(omega * ty, r - a @ z)
    if kind == "gsadi":
        z = np.linalg.solve(omega * (tx + lower_y), r)
        return z + np.linalg.solve(omega * (ty + lower_x), r - a @ z)
    raise AssertionError(kind)


MEMORY_TABLE = {
    "richardson": 0,
    "jacobi": 0,
    "tri_x": 3,
    "tri_y": 3,
    "adi": 6,
    "gstri_x": 3,
    "gstri_y": 3,
    "gsadi": 6,
    "ilu0": 5,
    "gauss_seidel": 3,
    "sor": 3,
}


@pytest.mark.parametrize("n", [3, 15])
@pytest.mark.parametrize("kind", SMOOTHER_KINDS)
def test_workspace_matches_memory_table(kind, n):
    op = operator_on(n)
    state = setup(SmootherSpec(kind), op)
    assert state.workspace_size == MEMORY_TABLE[kind] * op.neq


def test_memory_table_small_grid():
    op = operator_on(3)
    assert setup(SmootherSpec("jacobi", 0.7), op).workspace_size == 0
    assert setup(SmootherSpec("tri_x", 0.7), op).workspace_size == 27
    assert setup(SmootherSpec("gsadi", 0.7), op).workspace_size == 54


def test_jacobi_on_classic_stencil():
    op = operator_on(3)
    state = setup(SmootherSpec("jacobi"), op)
    z = apply_preconditioner(state, GridFunction(op.grid, np.ones(op.grid.shape)))
    np.testing.assert_allclose(z.values, 1.0 / 64.0)


def test_gauss_seidel_matches_forward_substitution():
    op = operator_on(3)
    state = setup(SmootherSpec("gauss_seidel", 1.0), op)
    r = np.random.default_rng(5).standard_normal(op.neq)
    a = op.to_dense()

    z = apply_preconditioner(state, GridFunction(op.grid, r))
    expected = scipy.linalg.solve_triangular(np.tril(a), r, lower=True)
    np.testing.assert_allclose(z.ravel(), expected, rtol=1e-12, atol=1e-14)


@pytest.mark.parametrize("kind", SMOOTHER_KINDS)
@pytest.mark.parametrize("coords, grading", [
    ("cartesian", GradingSpec()),
    ("cylindrical", GradingSpec(2.0, 1.0)),
    ("spherical", GradingSpec(1.0, 1.5)),
])
def test_preconditioner_matches_dense_oracle(kind, coords, grading):
    op = operator_on((5, 4), coords, grading)
    omega = {"sor": 1.4, "tri_x": 0.8, "adi": 0.9, "gsadi": 0.6}.get(kind)
    state = setup(SmootherSpec(kind, omega), op)
    r = np.random.default_rng(6).standard_normal(op.neq)

    z = apply_preconditioner(state, GridFunction(op.grid, r)).ravel()
    expected = dense_preconditioner_solve(kind, state, r)
    np.testing.assert_allclose(z, expected, rtol=1e-10, atol=1e-10 * np.abs(expected).max())


def transposed(op: StencilOperator) -> StencilOperator:
    grid = op.grid
    swapped = LevelGrid(grid.level, grid.y_coords, grid.x_coords, grid.coord_system)
    return StencilOperator(grid=swapped, c=op.c.T, n=op.e.T, s=op.w.T, e=op.n.T, w=op.s.T, aniso=op.aniso)


@pytest.mark.parametrize("kinds", [("tri_y", "tri_x"), ("gstri_y", "gstri_x")])
def test_y_lines_are_x_lines_of_the_transpose(kinds):
    y_kind, x_kind = kinds
    op = operator_on((5, 4), "spherical", GradingSpec(1.5, 2.0))
    r = np.random.default_rng(7).standard_normal(op.grid.shape)

    z_y = setup(SmootherSpec(y_kind, 0.9), op).apply(r)
    z_x = setup(SmootherSpec(x_kind, 0.9), transposed(op)).apply(r.T)
    np.testing.assert_array_equal(z_y, z_x.T)


def test_smooth_step_keeps_exact_solution():
    op = operator_on(7, "cylindrical", GradingSpec(2.0, 1.0))
    x_star = GridFunction(op.grid, np.random.default_rng(8).standard_normal(op.grid.shape))
    b = apply(op, x_star)

    for kind in SMOOTHER_KINDS:
        x = smooth_step(setup(SmootherSpec(kind), op), x_star, b, DEFAULT_OMEGA)
        np.testing.assert_allclose(x.values, x_star.values, atol=1e-12 * max(1.0, x_star.norm()))


def test_tri_x_is_exact_on_a_single_row():
    op = operator_on((7, 1))
    state = setup(SmootherSpec("tri_x", 1.0), op)
    b = GridFunction(op.grid, np.random.default_rng(9).standard_normal(op.grid.shape))

    x = smooth_step(state, GridFunction.zeros(op.grid), b, 1.0)
    np.testing.assert_allclose(x.values, direct_solve(op, b).values, rtol=1e-12)
    assert estimate_contraction(state, 1.0, iterations=20) <= 1e-6


def test_jacobi_step_matches_dense_iterate():
    hierarchy = build_hierarchy(1, (3, 3))
    op = assemble(hierarchy.finest)
    state = setup(SmootherSpec("jacobi"), op)
    grid = op.grid
    exact = np.outer(np.sin(np.pi * grid.eta), np.sin(np.pi * grid.xi)).ravel()
    a = op.to_dense()
    b = a @ exact

    x = smooth_step(state, GridFunction.zeros(grid), GridFunction(grid, b), 0.7)
    expected = 0.7 * b / np.diag(a)
    np.testing.assert_allclose(x.ravel(), expected, rtol=1e-14)


def test_jacobi_contraction_matches_eigenvalue():
    op = operator_on(7)
    state = setup(SmootherSpec("jacobi"), op)
    a = op.to_dense()
    iteration = np.eye(op.neq) - a / np.diag(a)[:, np.newaxis]
    rho = np.abs(np.linalg.eigvals(iteration)).max()

    estimate = estimate_contraction(state, 1.0, iterations=300)
    assert rho == pytest.approx(np.cos(np.pi / 8), abs=1e-12)
    assert estimate == pytest.approx(np.cos(np.pi / 8), abs=1e-2)


@pytest.mark.parametrize("n", [7, 15])
@pytest.mark.parametrize("kind", SMOOTHER_KINDS)
def test_every_smoother_contracts(kind, n):
    state = setup(SmootherSpec(kind), operator_on(n))
    assert estimate_contraction(state, DEFAULT_OMEGA) < 1.0


@pytest.mark.parametrize("kind", ["jacobi", "gauss_seidel"])
def test_point_smoothers_lose_h_squared(kind):
    rates = smoother_rate_sweep(kind, [7, 15, 31], omega=1.0, iterations=1000)
    ratios = mesh_dependence_ratios(rates)

    assert all(0.0 < rate < 1.0 for rate in rates)
    for ratio in ratios:
        assert 3.4 <= ratio <= 4.6


def test_sor_and_ilu_rates_are_recorded():
    for kind, omega in (("sor", 1.7), ("ilu0", None)):
        rates = smoother_rate_sweep(kind, [7, 15], omega=1.0, smoother_omega=omega, iterations=300)
        assert all(0.0 < rate < 1.0 for rate in rates)


def test_richardson_omega_is_clamped(capsys):
    state = setup(SmootherSpec("richardson", 1.0), operator_on(7))

    assert state.clamped
    assert state.omega == pytest.approx(0.9 / state.lambda_max)
    assert "clamped" in capsys.readouterr().out


def test_richardson_default_omega_from_lambda_max():
    op = operator_on(7)
    state = setup(SmootherSpec("richardson"), op)
    lam = np.linalg.eigvalsh(op.to_dense()).max()

    assert not state.clamped
    assert state.lambda_max <= lam * (1 + 1e-12)
    assert state.lambda_max > 0.8 * lam


@pytest.mark.parametrize("kind, omega", [("sor", 2.0), ("gauss_seidel", 0.0), ("tri_x", 1.5), ("gsadi", 1.01), ("jacobi", -1.0)])
def test_out_of_range_omega_rejected(kind, omega):
    with pytest.raises(ValueError, match="smoother_omega"):
        SmootherSpec(kind, omega)


def test_unknown_kind_rejected():
    with pytest.raises(ValueError):
        SmootherSpec("chebyshev")


def test_argument_checks():
    op = operator_on(3)
    state = setup(SmootherSpec("jacobi"), op)
    zero = GridFunction.zeros(op.grid)

    with pytest.raises(ValueError, match="omega"):
        smooth_step(state, zero, zero, 0.0)
    with pytest.raises(ValueError, match="iterations"):
        estimate_contraction(state, 0.7, iterations=5)
    with pytest.raises(LevelMismatchError):
        apply_preconditioner(state, GridFunction.zeros(operator_on(7).grid))
