"""
Scenario configuration
Parses the flat `section.key = value  # unit` scenario files, applies
environment overrides and builds the shape, grid and stage configurations
"""

import logging
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from analysis.lojasiewicz import LojasiewiczConfig
from analysis.singular import AnalysisConfig
from core.config import BUILTIN_SCENARIOS, SCENARIO_SCHEMA
from core.env_config import env_config
from core.evolve import EvolveConfig
from core.exceptions import LevelSetError, SchemaError
from core.field import GridSpec
from core.shapes import CylinderSlab, Dumbbell, ShapeSpec, Sphere, Torus

logger = logging.getLogger(__name__)

SCENARIO_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'scenarios')

_TRUE = ('true', 'yes', '1', 'on')
_FALSE = ('false', 'no', '0', 'off')


def _convert(key: str, raw: str, kind: str):
    try:
        if kind == 'str':
            return raw
        if kind == 'float':
            return float(raw)
        if kind == 'int':
            return int(raw)
        if kind == 'bool':
            lowered = raw.lower()
            if lowered in _TRUE:
                return True
            if lowered in _FALSE:
                return False
            raise ValueError(raw)
        if kind == 'floats':
            return tuple(float(v) for v in raw.replace(',', ' ').split())
        if kind == 'ints':
            return tuple(int(v) for v in raw.replace(',', ' ').split())
    except ValueError:
        raise SchemaError(key, f"expected {kind}, got {raw!r}")
    raise SchemaError(key, f"unknown schema type {kind}")


def _check(key: str, value, constraint):
    if constraint is None:
        return
    if isinstance(constraint, tuple):
        if value not in constraint:
            raise SchemaError(key, f"must be one of {', '.join(constraint)}, got {value!r}")
        return
    values = value if isinstance(value, tuple) else (value,)
    if constraint == 'positive' and any(v <= 0 for v in values):
        raise SchemaError(key, f"must be positive, got {value}")
    if constraint == 'nonnegative' and any(v < 0 for v in values):
        raise SchemaError(key, f"must be non-negative, got {value}")


def parse_value(key: str, raw: str):
    """Typed, range-checked value of a schema key"""
    if key not in SCENARIO_SCHEMA:
        raise SchemaError(key, "unknown key")
    kind, _, constraint, _ = SCENARIO_SCHEMA[key]
    value = _convert(key, raw.strip(), kind)
    if kind in ('floats', 'ints') and not value:
        raise SchemaError(key, "needs at least one value")
    _check(key, value, constraint)
    return value


def parse_config_text(text: str) -> Dict[str, Any]:
    """Explicitly set keys of a scenario file; defaults are not filled in"""
    values: Dict[str, Any] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        content = line.split('#', 1)[0].strip()
        if not content:
            continue
        if '=' not in content:
            raise SchemaError(f"line {number}", f"expected 'key = value', got {content!r}")
        key, raw = (part.strip() for part in content.split('=', 1))
        if key in values:
            raise SchemaError(key, f"duplicate key on line {number}")
        values[key] = parse_value(key, raw)
    return values


def apply_env_overrides(values: Dict[str, Any]) -> List[str]:
    """Replace values from LEVELSET_<SECTION>_<KEY> variables; returns the overridden keys"""
    overridden = []
    for key in SCENARIO_SCHEMA:
        raw = env_config.scenario_override(key)
        if raw is None:
            continue
        values[key] = parse_value(key, raw)
        overridden.append(key)
    if overridden:
        logger.info(f"Environment overrides: {', '.join(overridden)}")
    return overridden


@dataclass
class ScenarioConfig:
    values: Dict[str, Any]
    source: str = '<text>'
    overridden: List[str] = field(default_factory=list)

    @classmethod
    def from_text(cls, text: str, source: str = '<text>', env: bool = True) -> 'ScenarioConfig':
        values = parse_config_text(text)
        overridden = apply_env_overrides(values) if env else []
        config = cls(values, source, overridden)
        config.check_required()
        return config

    @classmethod
    def from_file(cls, path: str, env: bool = True) -> 'ScenarioConfig':
        with open(path, 'r', encoding='utf-8') as fp:
            text = fp.read()
        return cls.from_text(text, path, env)

    def get(self, key: str):
        if key in self.values:
            return self.values[key]
        return SCENARIO_SCHEMA[key][1]

    def set(self, key: str, raw) -> None:
        self.values[key] = parse_value(key, str(raw))

    def check_required(self):
        for key in ('grid.lower', 'grid.upper', 'grid.cells'):
            if key not in self.values:
                raise SchemaError(key, "required")

    @property
    def name(self) -> str:
        name = self.get('scenario.name')
        return name or os.path.splitext(os.path.basename(self.source))[0]

    @property
    def dim(self) -> int:
        return len(self.get('grid.cells'))

    @property
    def output_dir(self) -> str:
        return self.get('output.directory')

    def toggle(self, stage: str) -> bool:
        return bool(self.get(f'analysis.{stage}'))

    def build_grid(self) -> GridSpec:
        try:
            return GridSpec(self.get('grid.lower'), self.get('grid.upper'), self.get('grid.cells'))
        except LevelSetError as e:
            raise SchemaError('grid', str(e))

    def build_shape(self) -> ShapeSpec:
        dim = self.dim
        center = self.get('shape.center') or (0.0,) * dim
        if len(center) != dim:
            raise SchemaError('shape.center', f"needs {dim} coordinates, got {len(center)}")
        kind = self.get('shape.kind')
        if kind == 'sphere':
            return Sphere(center, self.get('shape.radius'))
        if kind == 'cylinder':
            half_length = self.get('shape.half_length') or None
            return CylinderSlab(self.get('shape.radius'), self.get('shape.axis'), center, half_length)
        if kind == 'torus':
            return Torus(self.get('shape.major_radius'), self.get('shape.minor_radius'), center)
        return Dumbbell(self.get('shape.bulb_separation'), self.get('shape.bulb_radius'),
                        self.get('shape.neck_radius'), center)

    def build_evolve(self) -> EvolveConfig:
        return EvolveConfig(
            dt=self.get('evolve.dt'),
            eps_reg=self.get('evolve.eps_reg'),
            reinit_every=self.get('evolve.reinit_every'),
            t_max=self.get('evolve.t_max'),
            emit_every=self.get('output.emit_every'),
            mean_convex_tolerance=self.get('evolve.mean_convex_tolerance'),
        )

    def build_analysis(self, threads: int = 0, u_floor: Optional[float] = None) -> AnalysisConfig:
        """u_floor overrides analysis.u_floor, e.g. with a value calibrated on the computed field"""
        return AnalysisConfig(
            u_floor=self.get('analysis.u_floor') if u_floor is None else u_floor,
            hessian_stencil=self.get('analysis.hessian_stencil'),
            phi=self.get('analysis.phi'),
            eps=self.get('analysis.eps'),
            clearing_M=self.get('analysis.clearing_M'),
            threads=threads,
        )

    def build_lojasiewicz(self, u_floor: Optional[float] = None) -> LojasiewiczConfig:
        return LojasiewiczConfig(u_floor=self.get('analysis.u_floor') if u_floor is None else u_floor)

    def clearing_offsets(self, h: float) -> Tuple[float, ...]:
        """Configured offsets, else h^2 times 1, 2 and 4"""
        return self.get('analysis.clearing_offsets') or tuple(c * h * h for c in (1.0, 2.0, 4.0))

    def expectations(self) -> Dict[str, Any]:
        return {key.split('.', 1)[1]: self.get(key) for key in SCENARIO_SCHEMA if key.startswith('expect.')}

    def validate(self) -> None:
        """Build every stage so cross-key errors surface without running"""
        grid = self.build_grid()
        stages = [
            ('shape', lambda: self.build_shape().validate(grid.dim)),
            ('evolve', lambda: self.build_evolve().validate(grid)),
            ('analysis', lambda: self.build_analysis().validate()),
            ('analysis', lambda: self.build_lojasiewicz().validate()),
        ]
        for section, check in stages:
            try:
                check()
            except SchemaError:
                raise
            except LevelSetError as e:
                raise SchemaError(section, str(e))


def builtin_scenario_path(name: str) -> str:
    return os.path.join(SCENARIO_DIR, f'{name}.cfg')


def resolve_config(target: str) -> str:
    """A path as given, or the file of a builtin scenario name"""
    if os.path.exists(target):
        return target
    if target in BUILTIN_SCENARIOS:
        return builtin_scenario_path(target)
    raise FileNotFoundError(f"no scenario file or builtin scenario named {target!r}")


def list_scenarios() -> str:
    """Builtin scenario names followed by the documented schema"""
    lines = ['Builtin scenarios:']
    lines.extend(f'  {name}' for name in BUILTIN_SCENARIOS)
    lines.append('')
    lines.append('Scenario keys (key = default  # type, unit):')
    for key, (kind, default, constraint, unit) in SCENARIO_SCHEMA.items():
        if default is None:
            shown = 'required' if key.startswith('grid.') else 'unset'
        else:
            shown = default
        if isinstance(shown, tuple):
            shown = ' '.join(str(v) for v in shown)
        choices = f", one of {'|'.join(constraint)}" if isinstance(constraint, tuple) else ''
        note = f", {unit}" if unit else ''
        lines.append(f'  {key} = {shown}  # {kind}{choices}{note}')
    return '\n'.join(lines)


def validate_config(target: str) -> str:
    """'OK <name>' or raise SchemaError naming the key"""
    config = ScenarioConfig.from_file(resolve_config(target))
    config.validate()
    return f'OK {config.name}'
