"""
Grid transfer tests
"""

import numpy as np
import pytest

from src.mesh import GradingSpec, build_hierarchy
from src.stencil import GridFunction
from src.transfer import build_transfer, prolong, restrict


def dense_prolongation_1d(coarse, fine):
    """Hat-function interpolation written directly from node coordinates."""
    nc, nf = len(coarse) - 2, len(fine) - 2
    p = np.zeros((nf, nc))
    for f in range(1, nf + 1):
        x = fine[f]
        for c in range(1, nc + 1):
            left, centre, right = coarse[c - 1], coarse[c], coarse[c + 1]
            if left < x <= centre:
                p[f - 1, c - 1] = (x - left) / (centre - left)
            elif centre < x < right:
                p[f - 1, c - 1] = (right - x) / (right - centre)
    return p


def dense_prolongation(coarse_grid, fine_grid):
    px = dense_prolongation_1d(coarse_grid.x_coords, fine_grid.x_coords)
    py = dense_prolongation_1d(coarse_grid.y_coords, fine_grid.y_coords)
    return np.kron(py, px)


def two_levels(n=3, grading=GradingSpec(), coords="cartesian"):
    hierarchy = build_hierarchy(2, (n, n), grading, coords)
    return hierarchy[1], hierarchy[2]


@pytest.mark.parametrize("grading", [GradingSpec(), GradingSpec(4.0, 0.5)])
def test_restrict_preserves_constants(grading):
    coarse, fine = two_levels(3, grading)
    result = restrict(GridFunction(fine, np.ones(fine.shape)), coarse)
    np.testing.assert_allclose(result.values, 1.0, rtol=1e-14)


def test_restrict_delta_at_shared_node():
    coarse, fine = two_levels(3)
    delta = np.zeros(fine.shape)
    delta[1, 1] = 1.0

    result = restrict(GridFunction(fine, delta), coarse).values
    expected = np.zeros(coarse.shape)
    expected[0, 0] = 0.25
    np.testing.assert_allclose(result, expected, atol=1e-15)


def test_restrict_matches_transpose_oracle():
    coarse, fine = two_levels(3)
    p = dense_prolongation(coarse, fine)
    r = p.T / p.T.sum(axis=1, keepdims=True)
    values = np.random.default_rng(10).standard_normal(fine.shape)

    result = restrict(GridFunction(fine, values), coarse).ravel()
    np.testing.assert_allclose(result, r @ values.ravel(), rtol=1e-13, atol=1e-15)


def test_uniform_restriction_is_quarter_transpose():
    coarse, fine = two_levels(3)
    transfer = build_transfer(coarse, fine)

    p = transfer.prolongation_matrix().toarray()
    r = transfer.restriction_matrix().toarray()
    np.testing.assert_array_equal(r, 0.25 * p.T)


def test_prolong_preserves_interior_constants():
    coarse, fine = two_levels(3)
    result = prolong(GridFunction(coarse, np.ones(coarse.shape)), fine).values

    np.testing.assert_allclose(result[1:-1, 1:-1], 1.0)
    # Nodes next to the boundary interpolate against the Dirichlet zero
    np.testing.assert_allclose(result[0, 1:-1], 0.5)
    assert result[0, 0] == pytest.approx(0.25)


def test_prolong_bilinear_weights():
    coarse, fine = two_levels(1)
    result = prolong(GridFunction(coarse, np.array([[1.0]])), fine).values

    expected = np.array([[0.25, 0.5, 0.25], [0.5, 1.0, 0.5], [0.25, 0.5, 0.25]])
    np.testing.assert_allclose(result, expected, atol=1e-15)


@pytest.mark.parametrize("coords", ["cartesian", "cylindrical", "spherical"])
def test_graded_prolongation_matches_dense_oracle(coords):
    coarse, fine = two_levels(3, GradingSpec(4.0, 2.0), coords)
    values = np.random.default_rng(11).standard_normal(coarse.shape)

    result = prolong(GridFunction(coarse, values), fine).ravel()
    np.testing.assert_allclose(result, dense_prolongation(coarse, fine) @ values.ravel(), rtol=1e-12, atol=1e-14)

    # Shared nodes copy the coarse value
    np.testing.assert_allclose(result.reshape(fine.shape)[1::2, 1::2], values, rtol=1e-14)


def test_transfers_are_linear():
    coarse, fine = two_levels(3, GradingSpec(2.0, 1.0))
    rng = np.random.default_rng(12)

    u, v = rng.standard_normal(fine.shape), rng.standard_normal(fine.shape)
    lhs = restrict(GridFunction(fine, 2.0 * u - 3.0 * v), coarse).values
    rhs = 2.0 * restrict(GridFunction(fine, u), coarse).values - 3.0 * restrict(GridFunction(fine, v), coarse).values
    np.testing.assert_allclose(lhs, rhs, atol=1e-14)

    a, b = rng.standard_normal(coarse.shape), rng.standard_normal(coarse.shape)
    lhs = prolong(GridFunction(coarse, a + b), fine).values
    rhs = prolong(GridFunction(coarse, a), fine).values + prolong(GridFunction(coarse, b), fine).values
    np.testing.assert_allclose(lhs, rhs, atol=1e-14)


def test_non_nested_grids_rejected():
    hierarchy = build_hierarchy(3, (1, 1))
    with pytest.raises(ValueError, match="nested"):
        build_transfer(hierarchy[1], hierarchy[3])

    other = build_hierarchy(2, (1, 1), GradingSpec(3.0, 1.0))
    with pytest.raises(ValueError, match="nested"):
        build_transfer(hierarchy[1], other[2])
