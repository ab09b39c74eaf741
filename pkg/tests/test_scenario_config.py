#!/usr/bin/env python3
"""
Scenario file tests: parsing, schema errors, environment overrides and the builtin scenarios
"""

import os
import sys

import pytest

# Add src to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from cli.scenario_config import (ScenarioConfig, list_scenarios, parse_config_text, resolve_config,
                                 validate_config)
from core.config import BUILTIN_SCENARIOS
from core.exceptions import SchemaError
from core.shapes import Sphere

DISK = """
# small disk
scenario.name = disk
shape.kind = sphere
shape.radius = 0.5        # length
grid.lower = -1 -1
grid.upper = 1 1
grid.cells = 32 32
analysis.entropy = yes
"""


def schema_key(text):
    with pytest.raises(SchemaError) as info:
        ScenarioConfig.from_text(text, env=False)
    return info.value.key


def test_parse_typed_values():
    values = parse_config_text(DISK)
    assert values['grid.cells'] == (32, 32)
    assert values['grid.lower'] == (-1.0, -1.0)
    assert values['shape.radius'] == 0.5
    assert values['analysis.entropy'] is True
    assert 'evolve.dt' not in values


def test_errors_name_the_key():
    assert schema_key(DISK + 'evolve.dt = -0.1\n') == 'evolve.dt'
    assert schema_key(DISK + 'evolve.speed = 2\n') == 'evolve.speed'
    assert schema_key(DISK + 'shape.radius = 0.7\n') == 'shape.radius'       # duplicate
    assert schema_key(DISK + 'output.vtk = maybe\n') == 'output.vtk'
    assert schema_key(DISK.replace('shape.kind = sphere', 'shape.kind = cube')) == 'shape.kind'
    assert schema_key('grid.lower = 0 0\ngrid.upper = 1 1\n') == 'grid.cells'
    assert schema_key('scenario.name\n') == 'line 1'


@pytest.mark.parametrize('key', ['evolve.dt', 'evolve.t_max', 'analysis.u_floor'])
def test_explicit_zero_is_rejected(key):
    assert schema_key(DISK + f'{key} = 0\n') == key


def test_unset_floor_is_left_to_calibration():
    config = ScenarioConfig.from_text(DISK, env=False)
    assert config.build_analysis().u_floor is None
    assert config.build_analysis(u_floor=2e-5).u_floor == 2e-5
    assert config.build_lojasiewicz(u_floor=2e-5).u_floor == 2e-5
    pinned = ScenarioConfig.from_text(DISK + 'analysis.u_floor = 1e-4\n', env=False)
    assert pinned.build_lojasiewicz().u_floor == 1e-4


def test_defaults_and_builders():
    config = ScenarioConfig.from_text(DISK, env=False)
    assert config.name == 'disk'
    assert config.dim == 2
    assert config.get('evolve.reinit_every') > 0
    assert config.build_grid().spacing == pytest.approx(1.0 / 16.0)
    shape = config.build_shape()
    assert isinstance(shape, Sphere) and shape.radius == 0.5
    evolve = config.build_evolve()
    assert evolve.dt is None and evolve.t_max is None
    assert config.clearing_offsets(0.1) == pytest.approx((0.01, 0.02, 0.04))
    assert config.toggle('entropy') and not config.toggle('cylindrical_scale')
    assert config.expectations()['classification'] == 'none'
    config.validate()


def test_cross_key_errors_surface_in_validate():
    config = ScenarioConfig.from_text(DISK + 'shape.center = 0 0 0\n', env=False)
    with pytest.raises(SchemaError) as info:
        config.validate()
    assert info.value.key == 'shape.center'

    torus = ScenarioConfig.from_text(DISK.replace('shape.kind = sphere', 'shape.kind = torus')
                                     .replace('grid.cells = 32 32', 'grid.cells = 32 32 32')
                                     .replace('-1 -1', '-1 -1 -1').replace('1 1\n', '1 1 1\n')
                                     + 'shape.major_radius = 0.5\nshape.minor_radius = 0.3\n', env=False)
    with pytest.raises(SchemaError) as info:
        torus.validate()
    assert info.value.key == 'shape'

    bad_grid = ScenarioConfig.from_text(DISK.replace('grid.cells = 32 32', 'grid.cells = 32 16'), env=False)
    with pytest.raises(SchemaError) as info:
        bad_grid.validate()
    assert info.value.key == 'grid'


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv('LEVELSET_EVOLVE_T_MAX', '0.05')
    config = ScenarioConfig.from_text(DISK)
    assert config.get('evolve.t_max') == 0.05
    assert config.overridden == ['evolve.t_max']
    assert ScenarioConfig.from_text(DISK, env=False).get('evolve.t_max') is None

    monkeypatch.setenv('LEVELSET_EVOLVE_T_MAX', '-1')
    with pytest.raises(SchemaError):
        ScenarioConfig.from_text(DISK)


@pytest.mark.parametrize('name', BUILTIN_SCENARIOS)
def test_builtin_scenarios_validate(name):
    assert validate_config(name) == f'OK {name}'


def test_listing_and_resolution(tmp_path):
    text = list_scenarios()
    for name in BUILTIN_SCENARIOS:
        assert f'  {name}' in text
    assert 'grid.cells = required' in text
    assert 'evolve.dt = unset' in text
    path = tmp_path / 'disk.cfg'
    path.write_text(DISK)
    assert resolve_config(str(path)) == str(path)
    assert resolve_config('sphere2d').endswith(os.path.join('scenarios', 'sphere2d.cfg'))
    with pytest.raises(FileNotFoundError):
        resolve_config('no_such_scenario')
