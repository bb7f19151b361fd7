"""
Grid hierarchy tests

Usage:
    pytest test_mesh.py
"""

import math

import numpy as np
import pytest

from src.mesh import (
    CoordinateSystem,
    GradingSpec,
    build_hierarchy,
    coarse_size_for,
    grade_axis,
    is_nested,
    level_size,
)


def test_grade_axis_equidistant():
    np.testing.assert_allclose(grade_axis(3, 1.0), [0.0, 0.25, 0.5, 0.75, 1.0], atol=1e-15)


def test_grade_axis_geometric_values():
    np.testing.assert_allclose(grade_axis(1, 2.0), [0.0, 1.0 / 3.0, 1.0], atol=1e-15)
    np.testing.assert_allclose(grade_axis(3, 4.0), np.array([0.0, 1.0, 5.0, 21.0, 85.0]) / 85.0, atol=1e-15)


@pytest.mark.parametrize("factor", [0.5, 1.0, 1.3, 4.0, 8.0])
def test_grade_axis_width_ratio(factor):
    nodes = grade_axis(15, factor)
    widths = np.diff(nodes)

    assert nodes[0] == 0.0 and nodes[-1] == 1.0
    assert np.all(widths > 0)
    np.testing.assert_allclose(widths[1:] / widths[:-1], factor, rtol=1e-12)


@pytest.mark.parametrize("n, factor", [(0, 1.0), (-2, 1.0), (3, 0.0), (3, -1.0)])
def test_grade_axis_rejects_bad_arguments(n, factor):
    with pytest.raises(ValueError, match="Invalid"):
        grade_axis(n, factor)


def test_single_level_hierarchy():
    hierarchy = build_hierarchy(1, (3, 3))

    assert len(hierarchy) == 1
    grid = hierarchy.finest
    assert (grid.nx, grid.ny, grid.neq) == (3, 3, 9)
    np.testing.assert_allclose(grid.x_coords, [0.0, 0.25, 0.5, 0.75, 1.0])
    assert hierarchy[1] is grid is hierarchy.coarsest


def test_three_level_sizes_and_nesting():
    hierarchy = build_hierarchy(3, (1, 1))

    assert [g.nx for g in hierarchy.levels] == [1, 3, 7]
    assert [g.ny for g in hierarchy.levels] == [1, 3, 7]
    np.testing.assert_allclose(hierarchy[1].x_coords[1:-1], [0.5])
    np.testing.assert_allclose(hierarchy[2].x_coords[1:-1], [0.25, 0.5, 0.75])
    for level in range(1, 3):
        assert is_nested(hierarchy[level], hierarchy[level + 1])


def test_graded_two_level_takes_every_second_node():
    hierarchy = build_hierarchy(2, (1, 1), GradingSpec(factor_x=4.0))
    fine, coarse = hierarchy[2], hierarchy[1]

    np.testing.assert_allclose(fine.x_coords, grade_axis(3, 4.0), atol=1e-15)
    assert coarse.x_coords[1] == fine.x_coords[2]
    np.testing.assert_allclose(coarse.x_coords, [0.0, 5.0 / 85.0, 1.0], atol=1e-15)
    np.testing.assert_allclose(fine.y_coords, [0.0, 0.25, 0.5, 0.75, 1.0])


@pytest.mark.parametrize("coords", list(CoordinateSystem))
def test_nesting_exact_for_every_coordinate_system(coords):
    hierarchy = build_hierarchy(4, (1, 2), GradingSpec(2.0, 0.5), coords)

    for coarse, fine in zip(hierarchy.levels[:-1], hierarchy.levels[1:]):
        assert fine.nx == 2 * coarse.nx + 1
        np.testing.assert_allclose(fine.x_coords[::2], coarse.x_coords, rtol=0.0, atol=1e-14)
        np.testing.assert_allclose(fine.y_coords[::2], coarse.y_coords, rtol=0.0, atol=1e-14)
        assert np.all(np.diff(fine.x_coords) > 0) and np.all(np.diff(fine.y_coords) > 0)


def test_finest_grading_ratio():
    hierarchy = build_hierarchy(3, (2, 2), GradingSpec(1.5, 1.0))
    widths = np.diff(hierarchy.finest.x_coords)

    np.testing.assert_allclose(widths[1:] / widths[:-1], 1.5, rtol=1e-12)


def test_radial_and_polar_extents():
    cylindrical = build_hierarchy(2, (1, 1), coords="cylindrical").finest
    spherical = build_hierarchy(2, (1, 1), coords="spherical").finest

    assert cylindrical.x_coords[0] == 0.1 and cylindrical.x_coords[-1] == 1.0
    assert cylindrical.y_coords[0] == 0.0 and cylindrical.y_coords[-1] == 1.0
    assert spherical.x_coords[0] == 0.1
    assert spherical.y_coords[0] == 0.1
    assert spherical.y_coords[-1] == pytest.approx(math.pi - 0.1, abs=1e-15)
    np.testing.assert_allclose(spherical.eta, [0.25, 0.5, 0.75])


def test_hierarchy_rejects_bad_levels():
    with pytest.raises(ValueError, match="levels"):
        build_hierarchy(0, (1, 1))
    with pytest.raises(ValueError, match="coarse_n"):
        build_hierarchy(2, (0, 1))
    with pytest.raises(IndexError):
        build_hierarchy(2, (1, 1))[3]


def test_level_sizes_for_fixed_finest_grid():
    assert level_size(6, 1) == 63
    assert coarse_size_for(63, 6) == 1
    assert coarse_size_for(63, 4) == 7
    assert coarse_size_for(63, 2) == 31
    with pytest.raises(ValueError, match="levels"):
        coarse_size_for(63, 7)


@pytest.mark.parametrize("factor", [1e-20, 1e50])
def test_grade_axis_rejects_collapsing_factor(factor):
    with pytest.raises(ValueError, match="factor"):
        grade_axis(7, factor)


def test_graded_nodes_must_stay_distinct_on_the_physical_axis():
    # 32 cells with ratio 4: distinct on [0, 1] but merged next to r = 0.1
    cartesian = build_hierarchy(5, (1, 1), GradingSpec(4.0, 1.0), "cartesian").finest
    assert np.all(np.diff(cartesian.x_coords) > 0)

    with pytest.raises(ValueError, match="factor"):
        build_hierarchy(5, (1, 1), GradingSpec(4.0, 1.0), "spherical")
