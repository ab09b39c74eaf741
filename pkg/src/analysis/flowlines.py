"""
Flowlines of the arrival time
Integral curves of N = grad u / |grad u| traced with RK4, the arc-length and
trapping bounds at type I points, and the cone consistency check
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd

from core.config import FLOWLINE_CONFIG, SINGULAR_CONFIG, SURFACE_CONFIG
from core.exceptions import ConfigError, GridError, NearSingularError
from core.field import as_field
from core.utils import tangent_frame

logger = logging.getLogger(__name__)


class Termination(Enum):
    REACHED_CRITICAL = 'ReachedCritical'
    LEFT_DOMAIN = 'LeftDomain'
    STEP_LIMIT = 'StepLimit'


@dataclass
class FlowLine:
    s: np.ndarray
    points: np.ndarray
    values: np.ndarray
    grad_norms: np.ndarray
    termination: Termination
    direction: int = 1

    @property
    def length(self) -> float:
        return float(self.s[-1])

    @property
    def start(self) -> np.ndarray:
        return self.points[0]

    @property
    def end(self) -> np.ndarray:
        return self.points[-1]

    def arc_length_to(self, target: Sequence[float]) -> float:
        """Traced length plus the closing chord from the last sample (the trace stops at the floor)"""
        return self.length + float(np.linalg.norm(self.end - np.asarray(target, dtype=float)))

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({'s': self.s})
        for i in range(self.points.shape[1]):
            frame[f'x{i}'] = self.points[:, i]
        frame['u'] = self.values
        frame['grad_norm'] = self.grad_norms
        return frame


def _unit_normal(f, x: np.ndarray, direction: int) -> np.ndarray:
    grad = np.asarray(f.gradient_at(x))
    norm = float(np.linalg.norm(grad))
    if norm == 0.0:
        raise NearSingularError(x, 0.0, 0.0)
    return direction * grad / norm


def _rk4(f, x: np.ndarray, ds: float, direction: int) -> np.ndarray:
    k1 = _unit_normal(f, x, direction)
    k2 = _unit_normal(f, x + 0.5 * ds * k1, direction)
    k3 = _unit_normal(f, x + 0.5 * ds * k2, direction)
    k4 = _unit_normal(f, x + ds * k3, direction)
    return x + ds * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0


def trace_flowline(u, p: Sequence[float], step: Optional[float] = None, max_len: Optional[float] = None,
                   direction: int = 1, grad_floor: Optional[float] = None) -> FlowLine:
    """Integrate dx/ds = +-N(x) from p until |grad u| drops below the floor, the box ends or s > max_len"""
    f = as_field(u)
    h = f.spacing
    step = step or FLOWLINE_CONFIG['step_factor'] * h
    max_len = max_len or FLOWLINE_CONFIG['max_len_factor'] * f.diagonal
    floor = grad_floor or SURFACE_CONFIG['grad_floor_factor'] * h
    slow_zone = FLOWLINE_CONFIG['slowdown_factor'] * floor
    if direction not in (1, -1):
        raise ConfigError(f"direction must be +1 or -1, got {direction}")

    x = np.asarray(p, dtype=float)
    value = float(f.value_at(x))
    grad_norm = float(np.linalg.norm(f.gradient_at(x)))
    if grad_norm < floor:
        raise NearSingularError(x, grad_norm, floor)

    s = 0.0
    arc, points, values, norms = [0.0], [x], [value], [grad_norm]
    termination = Termination.STEP_LIMIT
    while True:
        if s >= max_len:
            termination = Termination.STEP_LIMIT
            break
        ds = step * min(1.0, grad_norm / slow_zone)
        advanced = left = False
        for _ in range(FLOWLINE_CONFIG['max_halvings'] + 1):
            try:
                x_new = _rk4(f, x, ds, direction)
                value_new = float(f.value_at(x_new))
                grad_new = float(np.linalg.norm(f.gradient_at(x_new)))
            except GridError:
                left = True
                break
            except NearSingularError:
                ds *= 0.5
                continue
            if direction * (value_new - value) > 0.0:
                advanced = True
                break
            ds *= 0.5
        if left:
            termination = Termination.LEFT_DOMAIN
            break
        if not advanced:
            termination = Termination.REACHED_CRITICAL if grad_norm < slow_zone else Termination.STEP_LIMIT
            break
        s += ds
        x, value, grad_norm = x_new, value_new, grad_new
        arc.append(s)
        points.append(x)
        values.append(value)
        norms.append(grad_norm)
        if grad_norm < floor:
            termination = Termination.REACHED_CRITICAL
            break

    return FlowLine(np.asarray(arc), np.asarray(points), np.asarray(values), np.asarray(norms),
                    termination, direction)


def trace_batch(u, starts: Sequence[Sequence[float]], threads: int = 0, **kwargs) -> List[FlowLine]:
    """Independent traces in a thread pool; output order follows the starts"""
    with ThreadPoolExecutor(max_workers=threads or None) as pool:
        return list(pool.map(lambda p: trace_flowline(u, p, **kwargs), starts))


@dataclass
class ArcBoundReport:
    applicable: bool
    arc_length: float = float('nan')
    bound: float = float('nan')
    arc_slack: float = float('nan')
    pointwise_slack: float = float('nan')
    ok: Optional[bool] = None


def verify_arc_bounds(line: FlowLine, beta: float, p_target: Sequence[float], u_target: Optional[float] = None,
                      rtol: float = FLOWLINE_CONFIG['arc_slack_rtol']) -> ArcBoundReport:
    """arc length <= 2 beta sqrt(u(p) - u(start)) and |x(s) - p| <= 2 beta sqrt(u(p) - u(x(s)))"""
    if line.termination is not Termination.REACHED_CRITICAL:
        return ArcBoundReport(False)
    target = np.asarray(p_target, dtype=float)
    top = float(line.values[-1]) if u_target is None else float(u_target)

    arc = line.arc_length_to(target)
    bound = 2.0 * beta * np.sqrt(max(top - float(line.values[0]), 0.0))
    distances = np.linalg.norm(line.points - target, axis=1)
    pointwise = 2.0 * beta * np.sqrt(np.abs(top - line.values)) - distances
    worst = float(np.min(pointwise))
    allowance = rtol * bound
    ok = bool(bound - arc >= -allowance and worst >= -allowance)
    return ArcBoundReport(True, arc, bound, bound - arc, worst, ok)


def _split(offsets: np.ndarray, axis: np.ndarray):
    z = offsets @ axis
    y = offsets - np.outer(z, axis)
    return z, np.linalg.norm(y, axis=1)


def stays_in_cone(line: FlowLine, p: Sequence[float], axis: Sequence[float], phi: float,
                  inflation_deg: float = FLOWLINE_CONFIG['cone_inflation_deg'],
                  exclusion: Optional[float] = None) -> bool:
    """Every sample away from p satisfies |y| <= |z| tan(phi + inflation)"""
    a = np.asarray(axis, dtype=float).ravel()
    a = a / np.linalg.norm(a)
    offsets = line.points - np.asarray(p, dtype=float)
    z, y = _split(offsets, a)
    away = np.linalg.norm(offsets, axis=1) > (exclusion or 0.0)
    angle = phi + np.deg2rad(inflation_deg)
    return bool(np.all(y[away] <= np.abs(z[away]) * np.tan(angle)))


@dataclass
class ConeLaunch:
    start: np.ndarray
    z_check: float
    t_check: float
    lower: float          # sqrt(n - 2) cot(phi) sqrt(-t)
    upper: float          # 2 beta sqrt(-t)
    arc_to_center: float
    reaches_center: bool
    contradiction: bool


@dataclass
class ConeConsistency:
    phi: float
    beta: float
    launches: List[ConeLaunch]

    @property
    def consistent(self) -> bool:
        return not any(launch.contradiction for launch in self.launches)


def _safe_trace(f, start) -> Optional[FlowLine]:
    try:
        return trace_flowline(f, start)
    except NearSingularError:
        return None


def max_cone_angle(n: int, beta: float) -> float:
    """Cone angles below arctan(sqrt(n - 2) / (2 beta)) make the two bounds incompatible"""
    return float(np.arctan(np.sqrt(n - 2) / (2.0 * beta)))


def cone_consistency_check(u, p: Sequence[float], axis: Sequence[float], beta: float, value: float,
                           phi: Optional[float] = None, distances: Optional[Sequence[float]] = None,
                           directions: int = 4, threads: int = 0) -> ConeConsistency:
    """Launch flowlines on the cone boundary below a type I point and test the two length bounds"""
    f = as_field(u)
    n = f.dim
    if n < 3:
        raise ConfigError("the cone consistency check needs n >= 3")
    h = f.spacing
    limit = max_cone_angle(n, beta)
    phi = phi or min(SINGULAR_CONFIG['cone_angle'], 0.9 * limit)
    if phi >= limit:
        logger.warning(f"Cone angle {phi:.4f} is not below {limit:.4f}; using {0.9 * limit:.4f}")
        phi = 0.9 * limit

    p = np.asarray(p, dtype=float)
    a = np.asarray(axis, dtype=float).ravel()
    a = a / np.linalg.norm(a)
    frame = tangent_frame(a)
    angles = 2.0 * np.pi * np.arange(directions) / directions
    transverse = [np.cos(t) * frame[0] + np.sin(t) * frame[1 % len(frame)] for t in angles]
    distances = distances or [8.0 * h, 12.0 * h, 16.0 * h]

    starts, checks = [], []
    for z in distances:
        for sign in (1.0, -1.0):
            for e in transverse:
                e = e / np.linalg.norm(e)
                start = p + sign * z * a + z * np.tan(phi) * e
                if not f.contains(start, 2.0 * h):
                    continue
                t_check = float(f.value_at(start)) - value
                if t_check >= 0.0:
                    continue
                starts.append(start)
                checks.append((z, t_check))

    with ThreadPoolExecutor(max_workers=threads or None) as pool:
        lines = list(pool.map(lambda x: _safe_trace(f, x), starts))

    launches = []
    for start, (z, t_check), line in zip(starts, checks, lines):
        if line is None:
            continue
        lower = np.sqrt(n - 2) / np.tan(phi) * np.sqrt(-t_check)
        upper = 2.0 * beta * np.sqrt(-t_check)
        arc = line.arc_length_to(p)
        reaches = (line.termination is Termination.REACHED_CRITICAL
                   and float(np.linalg.norm(line.end - p)) < 0.5 * z)
        contradiction = bool(reaches and z >= lower and arc <= upper)
        launches.append(ConeLaunch(start, z, t_check, lower, upper, arc, reaches, contradiction))
    result = ConeConsistency(phi, beta, launches)
    if not result.consistent:
        logger.warning(f"Cone consistency violated at {np.round(p, 4).tolist()}")
    return result
