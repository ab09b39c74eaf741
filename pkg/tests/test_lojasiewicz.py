#!/usr/bin/env python3
"""
Lojasiewicz analysis tests on exact fields
"""

import os
import sys
from types import SimpleNamespace

import numpy as np
import pytest

# Add src to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from analysis.lojasiewicz import (LojasiewiczConfig, Verdict, calibrated_u_floor, lojasiewicz_analyze,
                                  saddle_type_one)
from core.exceptions import ConfigError
from core.field import AnalyticField, GridSpec, sample_sphere_arrival


def quartic_cap(dim=2):
    """u = -|x|^4: a degenerate maximum whose ratio blows up like 1 / (4|x|)"""
    def value(x):
        return -np.sum(x * x, axis=1) ** 2

    def gradient(x):
        return -4.0 * np.sum(x * x, axis=1)[:, None] * x

    def hessian(x):
        r2 = np.sum(x * x, axis=1)
        return -4.0 * (r2[:, None, None] * np.eye(dim) + 2.0 * np.einsum('ni,nj->nij', x, x))

    return AnalyticField(dim, value, gradient, hessian, name='quartic')


@pytest.mark.parametrize('field, expected', [
    (AnalyticField.sphere(2, 1.0), np.sqrt(0.5)),
    (AnalyticField.cylinder(3, 1, 1.0), np.sqrt(0.5)),
    (AnalyticField.sphere(3, 1.0), 1.0),
])
def test_constant_ratio_on_exact_fields(field, expected):
    report = lojasiewicz_analyze(field, np.zeros(field.dim))
    assert report.verdict is Verdict.TYPE_I
    assert len(report.sups) == 4
    assert report.sups == pytest.approx(np.full(4, expected), abs=1e-3)
    assert report.beta == pytest.approx(expected, abs=1e-3)
    assert report.label.startswith('TypeI(')
    assert not report.skipped


def test_ratio_is_invariant_under_parabolic_rescaling():
    small = lojasiewicz_analyze(AnalyticField.sphere(3, 1.0), np.zeros(3))
    large = lojasiewicz_analyze(AnalyticField.sphere(3, 2.0, spacing=2.0 / 128.0), np.zeros(3))
    assert large.radii == pytest.approx([2.0 * r for r in small.radii])
    assert large.beta == pytest.approx(small.beta, abs=1e-9)


def test_growing_ratio_is_type_two():
    report = lojasiewicz_analyze(quartic_cap(), np.zeros(2), LojasiewiczConfig(u_floor=1e-14))
    assert report.verdict is Verdict.TYPE_II
    assert report.label == 'TypeII'
    assert np.isnan(report.beta)
    assert all(ratio >= 1.5 for ratio in report.ratios)


def test_too_few_samples_is_indeterminate():
    report = lojasiewicz_analyze(AnalyticField.sphere(2, 1.0), np.zeros(2), LojasiewiczConfig(min_samples=10 ** 7))
    assert report.verdict is Verdict.INDETERMINATE
    assert report.skipped == report.radii
    frame = report.to_frame()
    assert list(frame.columns) == ['r', 's', 'samples', 'skipped']
    assert frame['skipped'].all()


def test_saddle_measured_as_type_one_is_flagged():
    report = lojasiewicz_analyze(AnalyticField.cylinder(3, 1, 1.0), np.zeros(3))
    saddle = SimpleNamespace(is_saddle=True, location=np.zeros(3))
    cap = SimpleNamespace(is_saddle=False, location=np.zeros(3))
    assert saddle_type_one(saddle, report)
    assert not saddle_type_one(cap, report)


def test_floor_falls_back_to_grid_scale_on_exact_samples():
    grid = GridSpec((-1.0, -1.0), (1.0, 1.0), (128, 128))
    h = grid.spacing
    assert calibrated_u_floor(sample_sphere_arrival(grid, 0.8)) == pytest.approx(0.05 * h * h)


def test_floor_tracks_noise_in_the_arrival_time():
    grid = GridSpec((-1.0, -1.0), (1.0, 1.0), (128, 128))
    exact = sample_sphere_arrival(grid, 0.8)
    sigma = 1e-4
    rng = np.random.default_rng(3)
    noisy = exact.with_values(exact.values + sigma * rng.standard_normal(exact.values.shape))
    u_floor = calibrated_u_floor(noisy)
    assert u_floor > 0.05 * grid.spacing ** 2
    assert 0.3 * sigma < u_floor < 5.0 * sigma


def test_config_rejects_nonpositive_floor():
    with pytest.raises(ConfigError):
        LojasiewiczConfig(u_floor=0.0).validate()
    with pytest.raises(ConfigError):
        lojasiewicz_analyze(AnalyticField.sphere(2, 1.0), np.zeros(2), LojasiewiczConfig(u_floor=-1.0))
    assert LojasiewiczConfig().floor(0.1) == pytest.approx(0.05 * 0.01)
