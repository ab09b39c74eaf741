#!/usr/bin/env python3
"""
Level set evolution tests: time stepping, reinitialization and the arrival time of a disk
"""

import os
import sys

import numpy as np
import pytest

# Add src to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from core.exceptions import ConfigError, FrontExtinction, MeanConvexityError
from core.evolve import (EvolveConfig, arrival_noise, compute_arrival_time, interior_local_minima,
                         level_set_residual, mcf_step, reinitialize, validate_mean_convexity)
from core.field import FieldKind, GridSpec, ScalarField, sample_sphere_arrival
from core.shapes import CylinderSlab, Sphere, Union, signed_distance_init
from core.surface import extract_level_set

GRID = GridSpec((-1.0, -1.0), (1.0, 1.0), (64, 64))


@pytest.fixture(scope='module')
def disk_arrival():
    return compute_arrival_time(Sphere((0.0, 0.0), 0.6), GRID)


def radii(grid):
    return np.linalg.norm(grid.coordinates(), axis=-1)


def test_config_validation():
    EvolveConfig().validate(GRID)
    assert EvolveConfig().time_step(GRID) == pytest.approx(0.2 * GRID.spacing ** 2 / 2)
    with pytest.raises(ConfigError):
        EvolveConfig(dt=1.0).validate(GRID)
    with pytest.raises(ConfigError):
        EvolveConfig(reinit_every=0).validate(GRID)
    with pytest.raises(ConfigError):
        EvolveConfig(crossing_order=2).validate(GRID)
    with pytest.raises(ConfigError):
        EvolveConfig(eps_reg=0.0).validate(GRID)
    with pytest.raises(ConfigError):
        EvolveConfig(reinit_band=-1).validate(GRID)


@pytest.mark.parametrize('field', ['dt', 't_max'])
def test_zero_time_parameters_are_rejected(field):
    cfg = EvolveConfig(**{field: 0.0})
    with pytest.raises(ConfigError):
        cfg.validate(GRID)


def mean_radius(phi, drop_axis=None):
    vertices = extract_level_set(phi, 0.0).vertices.copy()
    if drop_axis is not None:
        vertices[:, drop_axis] = 0.0
    return float(np.mean(np.linalg.norm(vertices, axis=1)))


def stepped(phi, steps):
    for _ in range(steps):
        phi = mcf_step(phi)
    return phi


def test_single_step_shrinks_disk():
    phi = signed_distance_init(Sphere((0.0, 0.0), 0.5), GRID)
    assert mcf_step(phi).kind is FieldKind.LEVEL_FUNCTION
    dt = EvolveConfig().time_step(GRID)
    drop = mean_radius(phi) - mean_radius(stepped(phi, 10))
    assert drop == pytest.approx(10 * dt / 0.5, rel=0.1)


def test_sphere_shrinks_at_twice_the_curvature_rate():
    grid = GridSpec((-1.0, -1.0, -1.0), (1.0, 1.0, 1.0), (32, 32, 32))
    phi = signed_distance_init(Sphere((0.0, 0.0, 0.0), 0.6), grid)
    dt = EvolveConfig().time_step(grid)
    drop = mean_radius(phi) - mean_radius(stepped(phi, 10))
    assert drop == pytest.approx(10 * 2.0 * dt / 0.6, rel=0.1)


def test_cylinder_shrinks_at_the_circle_rate():
    grid = GridSpec((-1.0, -1.0, -1.0), (1.0, 1.0, 1.0), (32, 32, 32))
    phi = signed_distance_init(CylinderSlab(0.6, 2, (0.0, 0.0, 0.0)), grid)
    dt = EvolveConfig().time_step(grid)
    drop = mean_radius(phi, drop_axis=2) - mean_radius(stepped(phi, 10), drop_axis=2)
    assert drop == pytest.approx(10 * dt / 0.6, rel=0.1)


def test_hyperplane_is_stationary():
    x = GRID.coordinates()[..., 0]
    phi = ScalarField(GRID, x - 0.1, FieldKind.SIGNED_DISTANCE)
    after = stepped(phi, 10)
    interior = (slice(10, -10), slice(10, -10))
    assert np.allclose(after.values[interior], phi.values[interior], atol=1e-12)


@pytest.mark.parametrize('stretch, tolerance', [(1.0, 1e-3), (2.0, 1e-2)])
def test_reinitialize_restores_distance(stretch, tolerance):
    grid = GridSpec((-1.0, -1.0), (1.0, 1.0), (128, 128))
    h = grid.spacing
    phi = signed_distance_init(Sphere((0.0, 0.0), 0.5), grid)
    restored = reinitialize(phi.with_values(stretch * phi.values))
    error = np.abs(restored.values - phi.values)
    near = np.abs(phi.values) <= 2.0 * h
    assert np.max(error[near]) <= tolerance * h
    # first-order sweeping beyond the refined band
    r = radii(grid)
    far = np.abs(r - 0.5) < 0.3
    assert np.max(error[far]) < h
    assert np.all(np.sign(restored.values[far]) == np.sign(phi.values[far]))


def test_reinitialize_without_band_and_on_empty_zero_set():
    phi = signed_distance_init(Sphere((0.0, 0.0), 0.5), GRID)
    swept = reinitialize(phi.with_values(3.0 * phi.values), band=0)
    r = radii(GRID)
    band = np.abs(r - 0.5) < 0.3
    assert np.max(np.abs(swept.values[band] - phi.values[band])) < 2.0 * GRID.spacing
    with pytest.raises(FrontExtinction):
        reinitialize(ScalarField(GRID, np.ones(GRID.size)))


def test_mean_convexity_validation():
    disk = signed_distance_init(Sphere((0.0, 0.0), 0.5), GRID)
    assert validate_mean_convexity(disk, 0.5) > 0
    pair = Union([Sphere((-0.35, 0.0), 0.4), Sphere((0.35, 0.0), 0.4)])
    with pytest.raises(MeanConvexityError):
        validate_mean_convexity(signed_distance_init(pair, GRID), 0.5)


def test_disk_arrival_matches_exact_solution(disk_arrival):
    exact = sample_sphere_arrival(GRID, 0.6)
    r = radii(GRID)
    inner = r <= 0.4
    error = np.max(np.abs(disk_arrival.u.values[inner] - exact.values[inner]))
    assert error < 0.03
    assert disk_arrival.extinction_time == pytest.approx(0.18, abs=0.02)
    assert disk_arrival.coverage >= 0.99
    assert not disk_arrival.warnings


def test_arrival_has_no_interior_minima(disk_arrival):
    assert interior_local_minima(disk_arrival) == []
    low, high = disk_arrival.value_range
    assert low >= 0.0
    assert high == pytest.approx(disk_arrival.extinction_time)
    assert disk_arrival.metadata()['steps'] == disk_arrival.steps > 0


def test_arrival_reached_mask_covers_inside(disk_arrival):
    r = radii(GRID)
    assert np.all(disk_arrival.reached[r < 0.55])
    assert not np.any(disk_arrival.reached[r > 0.65])


def test_level_set_residual_vanishes_on_exact_field():
    exact = sample_sphere_arrival(GridSpec((-1.0, -1.0, -1.0), (1.0, 1.0, 1.0), (32, 32, 32)), 0.8)
    residual = level_set_residual(exact)
    assert np.isnan(residual).any()        # border and critical region are masked
    assert np.nanmax(residual) < 1e-8


def test_snapshot_callback_cadence():
    seen = []
    compute_arrival_time(Sphere((0.0, 0.0), 0.3), GridSpec((-0.5, -0.5), (0.5, 0.5), (32, 32)),
                         EvolveConfig(emit_every=50), lambda step, t, phi: seen.append((step, t)))
    assert seen
    assert all(step % 50 == 0 for step, _ in seen)
    assert [t for _, t in seen] == sorted(t for _, t in seen)


def test_arrival_time_scales_parabolically():
    small_grid = GridSpec((-0.5, -0.5), (0.5, 0.5), (32, 32))
    small = compute_arrival_time(Sphere((0.0, 0.0), 0.3), small_grid)
    big = compute_arrival_time(Sphere((0.0, 0.0), 0.6), small_grid.scaled(2.0))
    assert np.array_equal(big.reached, small.reached)
    assert np.allclose(big.u.values, 4.0 * small.u.values, rtol=1e-9, atol=1e-12)
    assert big.extinction_time == pytest.approx(4.0 * small.extinction_time, rel=1e-9)


def median_residual(cells):
    grid = GridSpec((-1.0, -1.0), (1.0, 1.0), (cells, cells))
    arrival = compute_arrival_time(Sphere((0.0, 0.0), 0.6), grid)
    h = grid.spacing
    residual = level_set_residual(arrival.u, floor=0.1)
    mask = arrival.reached & (arrival.initial.values < -3.0 * h) & np.isfinite(residual)
    assert np.count_nonzero(mask) > 50
    return float(np.median(residual[mask])), h


def test_level_set_residual_shrinks_with_the_grid():
    coarse, h_coarse = median_residual(32)
    fine, h_fine = median_residual(64)
    assert coarse <= 3.0 * np.sqrt(h_coarse)
    assert fine <= 3.0 * np.sqrt(h_fine)
    assert fine < coarse


def test_front_advances_monotonically():
    grid = GridSpec((-0.5, -0.5), (0.5, 0.5), (32, 32))
    shape = Sphere((0.0, 0.0), 0.3)
    masks = [signed_distance_init(shape, grid).values < 0.0]
    arrival = compute_arrival_time(shape, grid, EvolveConfig(emit_every=1),
                                   lambda step, t, phi: masks.append(phi.values < 0.0))
    reentered = sum(int(np.count_nonzero(later & ~earlier)) for earlier, later in zip(masks, masks[1:]))
    assert reentered == arrival.monotone_violations == 0
    assert arrival.metadata()['monotone_violations'] == 0
    assert not any('re-entered' in w for w in arrival.warnings)


def test_arrival_noise_is_small_on_computed_fields(disk_arrival):
    exact = sample_sphere_arrival(GRID, 0.6)
    assert arrival_noise(exact, floor=0.1) < 1e-12
    noise = arrival_noise(disk_arrival.u, floor=0.1)
    assert 0.0 < noise < GRID.spacing ** 2
