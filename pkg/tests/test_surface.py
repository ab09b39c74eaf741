#!/usr/bin/env python3
"""
Level surface tests: extraction, orientation, point-wise geometry and the Hessian reconstruction
"""

import os
import sys

import numpy as np
import pytest

# Add src to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from core.exceptions import LevelRangeError, MeanConvexityError, NearSingularError
from core.field import (AnalyticField, GridSpec, ScalarField, hessian_fd, sample_cylinder_arrival,
                        sample_sphere_arrival)
from core.surface import (circle_surface, extract_level_set, hessian_reconstruct, mean_curvature_at,
                          project_to_level, sphere_surface, surface_geometry, two_convexity_ratio)

DISK_GRID = GridSpec((-1.0, -1.0), (1.0, 1.0), (256, 256))


@pytest.fixture(scope='module')
def disk_field():
    return sample_sphere_arrival(DISK_GRID, 0.8)


def test_synthetic_surfaces():
    circle = circle_surface(2.0)
    assert circle.total_area == pytest.approx(4.0 * np.pi, rel=1e-5)
    assert circle.boundary_edge_count() == 0
    sphere = sphere_surface(1.0, resolution=64)
    assert sphere.total_area == pytest.approx(4.0 * np.pi, rel=2e-3)
    moved = sphere.transformed(shift=(1.0, 0.0, 0.0), scale=2.0)
    assert moved.total_area == pytest.approx(4.0 * sphere.total_area)
    assert moved.vertices.mean(axis=0) == pytest.approx([1.0, 0.0, 0.0], abs=1e-9)


def test_extract_circle_from_grid(disk_field):
    level = 0.1
    surface = extract_level_set(disk_field, level)
    radius = np.sqrt(0.64 - 2.0 * level)
    assert surface.dim == 2
    assert surface.boundary_edge_count() == 0
    assert surface.total_area == pytest.approx(2.0 * np.pi * radius, rel=1e-3)
    assert np.linalg.norm(surface.vertices, axis=1) == pytest.approx(np.full(len(surface.vertices), radius),
                                                                     abs=1e-3)
    # normals point toward increasing u, i.e. inward
    assert surface.orientation == 'inward'
    assert np.all(np.sum(surface.normals * surface.centroids, axis=1) < 0)


def test_extract_sphere_surface():
    grid = GridSpec((-1.0, -1.0, -1.0), (1.0, 1.0, 1.0), (48, 48, 48))
    u = sample_sphere_arrival(grid, 0.8)
    surface = extract_level_set(u, 0.05)
    radius = np.sqrt(0.64 - 4.0 * 0.05)
    assert surface.total_area == pytest.approx(4.0 * np.pi * radius ** 2, rel=0.03)


def test_level_out_of_range(disk_field):
    with pytest.raises(LevelRangeError):
        extract_level_set(disk_field, 10.0)


def test_point_geometry_on_exact_sphere():
    u = AnalyticField.sphere(3, 1.0)
    p = np.array([0.3, 0.4, 0.0])
    g = surface_geometry(u, p)
    assert g.principal_curvatures == pytest.approx([2.0, 2.0])
    assert g.mean_curvature == pytest.approx(4.0)
    assert mean_curvature_at(u, p) == pytest.approx(4.0)
    assert g.grad_H == pytest.approx([0.0, 0.0], abs=1e-5)
    assert g.grad_norm == pytest.approx(0.25)
    with pytest.raises(NearSingularError):
        surface_geometry(u, np.array([0.01, 0.0, 0.0]))


def test_projection_lands_on_level():
    u = AnalyticField.sphere(2, 0.8)
    x = project_to_level(u, np.array([0.5, 0.2]), 0.1, iterations=10)
    assert u.value_at(x) == pytest.approx(0.1, abs=1e-12)


@pytest.mark.parametrize('field, point', [
    (AnalyticField.sphere(3, 1.0), (0.3, -0.2, 0.25)),
    (AnalyticField.cylinder(3, 1, 1.0), (0.35, 0.2, 0.4)),
    (AnalyticField.cylinder(4, 1, 1.0), (0.3, 0.2, -0.1, 0.5)),
])
def test_hessian_reconstruction_on_exact_fields(field, point):
    g = surface_geometry(field, np.asarray(point))
    rebuilt = hessian_reconstruct(g)
    assert np.max(np.abs(rebuilt - field.hessian_at(np.asarray(point)))) <= 1e-3


def test_hessian_reconstruction_matches_grid_stencil(disk_field):
    idx = (190, 140)
    p = DISK_GRID.node(idx)
    rebuilt = hessian_reconstruct(surface_geometry(disk_field, p))
    assert np.max(np.abs(rebuilt - hessian_fd(disk_field, idx))) <= 1e-3


def test_reconstruction_needs_mean_convexity():
    expanding = AnalyticField(2, lambda x: 0.5 * np.sum(x * x, axis=1), lambda x: x,
                              lambda x: np.broadcast_to(np.eye(2), (len(x), 2, 2)).copy())
    with pytest.raises(MeanConvexityError):
        hessian_reconstruct(surface_geometry(expanding, np.array([0.5, 0.0])))


def test_two_convexity_of_cylinder():
    u = AnalyticField.cylinder(4, 1, 1.0)
    samples = np.array([[0.3, 0.2, 0.1, 0.0], [0.1, -0.4, 0.2, 0.7]])
    # S^2 x R: kappa = (0, 1/rho, 1/rho), so (kappa_1 + kappa_2) / H = 1/2
    assert two_convexity_ratio(u, samples) == pytest.approx(0.5)


WINDOW = GridSpec((0.0, -0.4, 0.0), (0.5, 0.1, 0.5), (64, 64, 64))


@pytest.mark.parametrize('field', [sample_sphere_arrival(WINDOW, 1.0),
                                   sample_cylinder_arrival(WINDOW, 1.0, axis=2)])
def test_reconstruction_oracle_on_sampled_exact_fields(field):
    idx = WINDOW.nearest_index((0.3, -0.2, 0.25))
    rebuilt = hessian_reconstruct(surface_geometry(field, WINDOW.node(idx)))
    assert np.max(np.abs(rebuilt - hessian_fd(field, idx))) <= 1e-3


def skewed_disk(spacing):
    """u = (0.64 - |x|^2) / 2 + 0.05 x^3, whose level sets are not circles"""
    def value(x):
        return (0.64 - np.sum(x * x, axis=1)) / 2.0 + 0.05 * x[:, 0] ** 3

    def gradient(x):
        return np.column_stack([-x[:, 0] + 0.15 * x[:, 0] ** 2, -x[:, 1]])

    def hessian(x):
        result = np.zeros((len(x), 2, 2))
        result[:, 0, 0] = -1.0 + 0.3 * x[:, 0]
        result[:, 1, 1] = -1.0
        return result

    return AnalyticField(2, value, gradient, hessian, spacing)


def reconstruction_error(cells):
    grid = GridSpec((-1.0, -1.0), (1.0, 1.0), (cells, cells))
    exact = skewed_disk(grid.spacing)
    sampled = ScalarField(grid, exact.value_at(grid.coordinates().reshape(-1, 2)))
    angles = np.linspace(0.0, 2.0 * np.pi, 16, endpoint=False) + 0.1
    worst = 0.0
    for theta in angles:
        p = 0.5 * np.array([np.cos(theta), np.sin(theta)])
        rebuilt = hessian_reconstruct(surface_geometry(sampled, p))
        reference = hessian_reconstruct(surface_geometry(exact, p))
        worst = max(worst, float(np.max(np.abs(rebuilt - reference))))
    return worst


def test_reconstruction_converges_under_refinement():
    coarse = reconstruction_error(128)
    fine = reconstruction_error(256)
    assert fine < coarse
    assert fine <= 0.65 * coarse
