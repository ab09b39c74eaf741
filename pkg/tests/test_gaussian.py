#!/usr/bin/env python3
"""
Gaussian area and entropy tests against the closed forms of spheres and cylinders
"""

import os
import sys

import numpy as np
import pytest

# Add src to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from core.exceptions import ConfigError
from core.field import GridSpec, sample_sphere_arrival
from core.gaussian import (EntropySearchCfg, cylinder_entropy, cylinder_gaussian_closed_form, entropy,
                           gaussian_area, huisken_profile, is_nonincreasing, sphere_entropy)
from core.surface import circle_surface, cylinder_surface, plane_surface, sphere_surface

CIRCLE_ENTROPY = np.sqrt(2.0 * np.pi / np.e)     # 1.52035...


def test_shrinking_circle_at_unit_scale():
    circle = circle_surface(np.sqrt(2.0))
    assert gaussian_area(circle, (0.0, 0.0), 1.0) == pytest.approx(CIRCLE_ENTROPY, rel=1e-5)


def test_planes_have_unit_density():
    line = plane_surface(2, (0.0, 0.0), (1.0, 1.0), 8.0, resolution=400)
    assert gaussian_area(line, (0.0, 0.0), 1.0) == pytest.approx(1.0, rel=1e-3)
    plane = plane_surface(3, (0.0, 0.0, 0.1), (0.0, 0.0, 1.0), 8.0, resolution=200)
    # off the plane the density drops by exp(-d^2 / 4)
    assert gaussian_area(plane, (0.0, 0.0, 0.0), 1.0) == pytest.approx(np.exp(-0.0025), rel=1e-3)


def test_closed_forms():
    assert cylinder_entropy(3, 0) == pytest.approx(4.0 / np.e, rel=1e-10)
    assert cylinder_entropy(3, 1) == pytest.approx(CIRCLE_ENTROPY, rel=1e-10)
    assert cylinder_entropy(2, 0) == pytest.approx(CIRCLE_ENTROPY, rel=1e-10)
    assert sphere_entropy(2) == pytest.approx(cylinder_entropy(4, 1), rel=1e-10)
    with pytest.raises(ConfigError):
        cylinder_entropy(3, 2)


def test_entropies_decrease_toward_sqrt_two():
    values = [sphere_entropy(m) for m in range(1, 11)]
    assert all(a > b for a, b in zip(values, values[1:]))
    assert values[-1] > np.sqrt(2.0)
    assert values[0] < 2.0


def test_closed_form_matches_quadrature_off_center():
    circle = circle_surface(np.sqrt(2.0))
    for p, scale in (((0.3, 0.0), 0.7), ((-0.5, 0.4), 2.0)):
        assert gaussian_area(circle, p, scale) == pytest.approx(
            cylinder_gaussian_closed_form(2, 0, p, scale), rel=1e-5)

    cylinder = cylinder_surface(np.sqrt(2.0), 10.0, segments=256, rings=400)
    p = (0.2, -0.1, 0.0)
    assert gaussian_area(cylinder, p, 0.5) == pytest.approx(cylinder_gaussian_closed_form(3, 1, p, 0.5), rel=1e-3)


def test_gaussian_area_rescaling():
    sphere = sphere_surface(1.0, resolution=48)
    p = np.array([0.2, 0.1, -0.3])
    c, shift = 1.7, np.array([0.5, -1.0, 2.0])
    moved = sphere.transformed(shift=shift, scale=c)
    assert gaussian_area(moved, c * p + shift, c * c * 0.4) == pytest.approx(gaussian_area(sphere, p, 0.4),
                                                                             rel=1e-10)
    with pytest.raises(ConfigError):
        gaussian_area(sphere, p, 0.0)


def test_circle_entropy_search():
    result = entropy(circle_surface(1.0, segments=2048))
    assert result.value == pytest.approx(CIRCLE_ENTROPY, abs=2e-3)
    assert result.scale == pytest.approx(0.5, rel=0.2)
    assert np.linalg.norm(result.center) < 0.05
    frame = result.to_frame()
    assert list(frame.columns) == ['p0', 'p1', 'Lambda', 'F']
    assert frame['F'].max() == pytest.approx(result.value)


def test_sphere_entropy_search():
    result = entropy(sphere_surface(1.0, resolution=96))
    assert result.value == pytest.approx(4.0 / np.e, rel=0.01)


def test_cylinder_entropy_search():
    surface = cylinder_surface(np.sqrt(2.0), 10.0, segments=128, rings=200)
    search = EntropySearchCfg(min_scale=0.25, max_scale=4.0, center_points=3, scale_points=20)
    result = entropy(surface, search)
    assert result.value == pytest.approx(CIRCLE_ENTROPY, rel=0.01)


def test_huisken_profile_of_shrinking_disk():
    grid = GridSpec((-1.0, -1.0), (1.0, 1.0), (256, 256))
    u = sample_sphere_arrival(grid, 0.8)
    extinction = 0.32
    level = 0.1
    used, values = huisken_profile(u, (0.0, 0.0), level, extinction - level, [0.0, 0.04, 0.08, 0.12])
    assert len(used) == 4
    # centered at the extinction point the shrinking circle is self-similar
    assert values == pytest.approx(np.full(4, CIRCLE_ENTROPY), abs=2e-3)
    assert is_nonincreasing(values)

    _, shifted = huisken_profile(u, (0.1, 0.0), level, extinction - level, [0.0, 0.04, 0.08, 0.12])
    assert is_nonincreasing(shifted)
    assert not is_nonincreasing([1.0, 1.1, 1.0])
