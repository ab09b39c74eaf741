#!/usr/bin/env python3
"""
Grid field tests: grid validation, finite differences, interpolation and the VTK files
"""

import os
import sys

import numpy as np
import pytest

# Add src to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from core.exceptions import GridError
from core.field import (AnalyticField, FieldKind, GridSpec, ScalarField, ball_samples, gradient_fd, hessian_fd,
                        interpolate, interpolate_gradient, interpolate_hessian, sample_cylinder_arrival,
                        sample_sphere_arrival)
from core.vtk_writer import read_structured_points, structured_points_text, write_structured_points


def quadratic_field(grid):
    x = grid.coordinates()
    values = 0.5 - x[..., 0] ** 2 - 0.25 * x[..., 1] ** 2 + 0.3 * x[..., 0] * x[..., 1]
    return ScalarField(grid, values)


def test_grid_rejects_bad_specs():
    with pytest.raises(GridError):
        GridSpec((-1.0, -1.0), (1.0, 1.0), (16, 32))        # unequal spacing
    with pytest.raises(GridError):
        GridSpec((0.0,) * 4, (1.0,) * 4, (8,) * 4)           # unsupported dimension
    with pytest.raises(GridError):
        GridSpec((0.0, 0.0), (1.0, 1.0), (4, 4))             # too few cells
    with pytest.raises(GridError):
        GridSpec((1.0, 0.0), (0.0, 1.0), (16, 16))


def test_from_spacing_snaps_upper_corner():
    grid = GridSpec.from_spacing((-1.0, -0.5), (1.0, 0.5), 0.125)
    assert grid.cells == (16, 8)
    assert grid.spacing == pytest.approx(0.125)
    assert grid.coordinates().shape == (16, 8, 2)
    assert grid.node((0, 0)) == pytest.approx([-0.9375, -0.4375])


def test_finite_differences_exact_on_quadratics():
    grid = GridSpec((-1.0, -1.0), (1.0, 1.0), (32, 32))
    f = quadratic_field(grid)
    idx = (10, 20)
    x, y = grid.node(idx)
    assert gradient_fd(f, idx) == pytest.approx([-2.0 * x + 0.3 * y, -0.5 * y + 0.3 * x], abs=1e-10)
    assert hessian_fd(f, idx) == pytest.approx(np.array([[-2.0, 0.3], [0.3, -0.5]]), abs=1e-9)
    with pytest.raises(GridError):
        hessian_fd(f, (0, 5))


def test_interpolation_and_margins():
    grid = GridSpec((0.0, 0.0, 0.0), (1.0, 1.0, 1.0), (16, 16, 16))
    x = grid.coordinates()
    f = ScalarField(grid, 1.0 + 2.0 * x[..., 0] - x[..., 1] + 0.5 * x[..., 2])
    p = np.array([0.4, 0.55, 0.61])
    assert f.value_at(p) == pytest.approx(1.0 + 0.8 - 0.55 + 0.305)
    assert f.gradient_at(p) == pytest.approx([2.0, -1.0, 0.5])
    assert interpolate(f, p) == pytest.approx(f.value_at(p))
    assert interpolate_gradient(f, p) == pytest.approx([2.0, -1.0, 0.5])
    assert interpolate_hessian(f, p) == pytest.approx(np.zeros((3, 3)), abs=1e-9)
    with pytest.raises(GridError):
        f.value_at([0.01, 0.5, 0.5])


def test_field_values_are_frozen_and_finite():
    grid = GridSpec((0.0, 0.0), (1.0, 1.0), (8, 8))
    f = ScalarField(grid, np.zeros(64))
    assert f.values.shape == (8, 8)
    with pytest.raises(ValueError):
        f.values[0, 0] = 1.0
    with pytest.raises(GridError):
        ScalarField(grid, np.full(64, np.nan))
    with pytest.raises(GridError):
        ScalarField(grid, np.zeros(10))


def test_window_covers_ball():
    grid = GridSpec((-1.0, -1.0), (1.0, 1.0), (64, 64))
    f = quadratic_field(grid)
    sub = f.window((0.2, -0.1), 0.2)
    assert sub.spacing == pytest.approx(grid.spacing)
    assert sub.grid.lower[0] <= 0.0 and sub.grid.upper[0] >= 0.4
    assert sub.grid.lower[1] <= -0.3 and sub.grid.upper[1] >= 0.1
    assert sub.value_at([0.2, -0.1]) == pytest.approx(f.value_at([0.2, -0.1]))


def test_ball_samples_grid_and_analytic():
    grid = GridSpec((-1.0, -1.0), (1.0, 1.0), (64, 64))
    f = quadratic_field(grid)
    points = ball_samples(f, (0.0, 0.0), 0.1)
    assert len(points) > 0
    assert np.all(np.linalg.norm(points, axis=1) <= 0.1 + 1e-12)

    exact = AnalyticField.sphere(3, 1.0, spacing=0.1)
    lattice = ball_samples(exact, (0.0, 0.0, 0.0), 0.1)
    assert len(lattice) == 7


def test_analytic_sphere_and_cylinder():
    sphere = AnalyticField.sphere(3, 1.0)
    p = np.array([0.3, -0.2, 0.1])
    assert sphere.value_at(p) == pytest.approx((1.0 - 0.14) / 4.0)
    assert sphere.gradient_at(p) == pytest.approx(-p / 2.0)
    assert sphere.hessian_at(p) == pytest.approx(-np.eye(3) / 2.0)

    cylinder = AnalyticField.cylinder(3, 1, 0.5)
    assert cylinder.value_at(p) == pytest.approx((0.25 - 0.13) / 2.0)
    assert cylinder.hessian_at(p) == pytest.approx(-np.diag([1.0, 1.0, 0.0]))
    with pytest.raises(GridError):
        AnalyticField.cylinder(3, 2, 0.5)


def test_sampled_exact_fields():
    grid = GridSpec((-1.0, -1.0, -0.5), (1.0, 1.0, 0.5), (16, 16, 8))
    u = sample_sphere_arrival(grid, 0.8)
    x = grid.coordinates()
    assert u.values == pytest.approx((0.64 - np.sum(x * x, axis=-1)) / 4.0)
    c = sample_cylinder_arrival(grid, 0.5, axis=2)
    assert c.values == pytest.approx((0.25 - x[..., 0] ** 2 - x[..., 1] ** 2) / 2.0)


def test_structured_points_file(tmp_path):
    grid = GridSpec((-1.0, -0.5), (1.0, 0.5), (16, 8))
    f = quadratic_field(grid)
    text = structured_points_text(f, 'quadratic')
    assert text.startswith('# vtk DataFile Version 3.0')
    assert 'DATASET STRUCTURED_POINTS' in text
    assert 'DIMENSIONS 16 8 1' in text
    path = write_structured_points(f, str(tmp_path / 'u.vtk'))
    back = read_structured_points(path)
    assert back.grid.cells == grid.cells
    assert back.kind is FieldKind.ARRIVAL_TIME
    assert back.values == pytest.approx(f.values, rel=1e-12)
