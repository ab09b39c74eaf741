"""
Arrival time of the mean-convex level set flow
Explicit level set mean curvature flow with fast-sweeping reinitialization;
the arrival time of a cell is the moment its level function changes sign
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np
from numba import njit, prange
from scipy.interpolate import RegularGridInterpolator
from scipy.ndimage import (binary_dilation, generate_binary_structure, map_coordinates, minimum_filter,
                           spline_filter)

from core.config import EVOLVE_DEFAULTS, SURFACE_CONFIG
from core.exceptions import ConfigError, FrontExtinction, MeanConvexityError
from core.field import FieldKind, GridSpec, ScalarField, gradient_array, hessian_array
from core.shapes import ShapeSpec, signed_distance_init
from core.surface import extract_level_set
from core.utils import format_duration

logger = logging.getLogger(__name__)


@dataclass
class EvolveConfig:
    """Time stepping parameters; None means derived from the grid"""
    dt: Optional[float] = None
    eps_reg: float = EVOLVE_DEFAULTS['eps_reg']
    reinit_every: int = EVOLVE_DEFAULTS['reinit_every']
    t_max: Optional[float] = None
    crossing_order: int = EVOLVE_DEFAULTS['crossing_order']
    emit_every: int = 0
    mean_convex_tolerance: float = EVOLVE_DEFAULTS['mean_convex_tolerance']
    reinit_tolerance: float = EVOLVE_DEFAULTS['reinit_tolerance']
    reinit_max_rounds: int = EVOLVE_DEFAULTS['reinit_max_rounds']
    reinit_band: int = EVOLVE_DEFAULTS['reinit_band']
    coverage_threshold: float = EVOLVE_DEFAULTS['coverage_threshold']

    def time_step(self, grid: GridSpec) -> float:
        if self.dt is not None:
            return float(self.dt)
        return EVOLVE_DEFAULTS['cfl_factor'] * grid.spacing ** 2 / grid.dim

    def final_time(self, grid: GridSpec) -> float:
        """T_max; by default the extinction time of a disk spanning the box"""
        if self.t_max is not None:
            return float(self.t_max)
        return grid.diagonal ** 2 / 8.0

    def validate(self, grid: GridSpec):
        limit = EVOLVE_DEFAULTS['cfl_limit'] * grid.spacing ** 2 / grid.dim
        if self.dt is not None and self.dt <= 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if self.time_step(grid) > limit * (1.0 + 1e-12):
            raise ConfigError(f"dt={self.time_step(grid):.3e} violates the explicit stability bound {limit:.3e}")
        if not 0.0 < self.eps_reg <= 1.0:
            raise ConfigError(f"eps_reg must lie in (0, 1], got {self.eps_reg}")
        if self.reinit_every < 1:
            raise ConfigError(f"reinit_every must be at least 1, got {self.reinit_every}")
        if self.t_max is not None and self.t_max <= 0:
            raise ConfigError(f"t_max must be positive, got {self.t_max}")
        if self.crossing_order != 1:
            raise ConfigError(f"only linear crossing interpolation is supported, got order {self.crossing_order}")
        if self.mean_convex_tolerance < 0:
            raise ConfigError("mean_convex_tolerance must be nonnegative")
        if self.reinit_band < 0:
            raise ConfigError(f"reinit_band must be nonnegative, got {self.reinit_band}")


@dataclass
class ArrivalField:
    """Arrival time u with the mask of cells the front crossed"""
    u: ScalarField
    reached: np.ndarray
    extinction_time: float
    initial: ScalarField
    steps: int = 0
    final_time: float = 0.0
    dt: float = 0.0
    coverage: float = 1.0
    monotone_violations: int = 0
    min_initial_curvature: float = float('nan')
    elapsed: float = 0.0
    warnings: List[str] = field(default_factory=list)

    @property
    def grid(self) -> GridSpec:
        return self.u.grid

    @property
    def value_range(self) -> Tuple[float, float]:
        values = self.u.values[self.reached]
        return float(values.min()), float(values.max())

    def metadata(self) -> dict:
        return {
            'steps': self.steps,
            'dt': self.dt,
            'final_time': self.final_time,
            'extinction_time': self.extinction_time,
            'sweep_coverage': self.coverage,
            'monotone_violations': self.monotone_violations,
            'min_initial_curvature': self.min_initial_curvature,
            'elapsed_seconds': self.elapsed,
        }


@njit(cache=True)
def _curvature_rate(phi, i, j, k, im, ip, jm, jp, km, kp, h, eps_h2):
    """|grad phi| div(grad phi / |grad phi|) with a regularized norm"""
    inv2h = 0.5 / h
    invh2 = 1.0 / (h * h)
    inv4h2 = 0.25 / (h * h)
    c = phi[i, j, k]
    px = (phi[ip, j, k] - phi[im, j, k]) * inv2h
    py = (phi[i, jp, k] - phi[i, jm, k]) * inv2h
    pz = (phi[i, j, kp] - phi[i, j, km]) * inv2h
    pxx = (phi[ip, j, k] - 2.0 * c + phi[im, j, k]) * invh2
    pyy = (phi[i, jp, k] - 2.0 * c + phi[i, jm, k]) * invh2
    pzz = (phi[i, j, kp] - 2.0 * c + phi[i, j, km]) * invh2
    pxy = (phi[ip, jp, k] - phi[ip, jm, k] - phi[im, jp, k] + phi[im, jm, k]) * inv4h2
    pxz = (phi[ip, j, kp] - phi[ip, j, km] - phi[im, j, kp] + phi[im, j, km]) * inv4h2
    pyz = (phi[i, jp, kp] - phi[i, jp, km] - phi[i, jm, kp] + phi[i, jm, km]) * inv4h2
    num = (pxx * (py * py + pz * pz) + pyy * (px * px + pz * pz) + pzz * (px * px + py * py)
           - 2.0 * (px * py * pxy + px * pz * pxz + py * pz * pyz))
    g2 = px * px + py * py + pz * pz + eps_h2
    return num / g2


@njit(cache=True)
def _curvature_rate_2d(phi, i, j, im, ip, jm, jp, h, eps_h2):
    inv2h = 0.5 / h
    invh2 = 1.0 / (h * h)
    c = phi[i, j, 0]
    px = (phi[ip, j, 0] - phi[im, j, 0]) * inv2h
    py = (phi[i, jp, 0] - phi[i, jm, 0]) * inv2h
    pxx = (phi[ip, j, 0] - 2.0 * c + phi[im, j, 0]) * invh2
    pyy = (phi[i, jp, 0] - 2.0 * c + phi[i, jm, 0]) * invh2
    pxy = (phi[ip, jp, 0] - phi[ip, jm, 0] - phi[im, jp, 0] + phi[im, jm, 0]) * 0.25 * invh2
    return (pxx * py * py + pyy * px * px - 2.0 * px * py * pxy) / (px * px + py * py + eps_h2)


@njit(cache=True)
def _rate(phi, i, j, k, im, ip, jm, jp, km, kp, h, eps_h2):
    if phi.shape[2] == 1:
        return _curvature_rate_2d(phi, i, j, im, ip, jm, jp, h, eps_h2)
    return _curvature_rate(phi, i, j, k, im, ip, jm, jp, km, kp, h, eps_h2)


@njit(parallel=True, cache=True)
def _mcf_kernel(phi, out, dt, h, eps_h2, clamp):
    nx, ny, nz = phi.shape
    for i in prange(nx):
        im = i - 1 if i > 0 else 0
        ip = i + 1 if i < nx - 1 else nx - 1
        for j in range(ny):
            jm = j - 1 if j > 0 else 0
            jp = j + 1 if j < ny - 1 else ny - 1
            for k in range(nz):
                km = k - 1 if k > 0 else 0
                kp = k + 1 if k < nz - 1 else nz - 1
                v = phi[i, j, k] + dt * _rate(phi, i, j, k, im, ip, jm, jp, km, kp, h, eps_h2)
                out[i, j, k] = min(max(v, -clamp), clamp)


@njit(parallel=True, cache=True)
def _mcf_kernel_recording(phi, out, arrival, reached, t, dt, h, eps_h2, clamp):
    """One step plus crossing-time bookkeeping; returns (inside count, re-entry count)"""
    nx, ny, nz = phi.shape
    inside = 0
    reentries = 0
    for i in prange(nx):
        im = i - 1 if i > 0 else 0
        ip = i + 1 if i < nx - 1 else nx - 1
        for j in range(ny):
            jm = j - 1 if j > 0 else 0
            jp = j + 1 if j < ny - 1 else ny - 1
            for k in range(nz):
                km = k - 1 if k > 0 else 0
                kp = k + 1 if k < nz - 1 else nz - 1
                old = phi[i, j, k]
                v = old + dt * _rate(phi, i, j, k, im, ip, jm, jp, km, kp, h, eps_h2)
                v = min(max(v, -clamp), clamp)
                out[i, j, k] = v
                if v < 0.0:
                    inside += 1
                    if old >= 0.0:
                        reentries += 1
                elif old < 0.0 and not reached[i, j, k]:
                    arrival[i, j, k] = t + dt * old / (old - v)
                    reached[i, j, k] = True
    return inside, reentries


@njit(cache=True)
def _seed_interface(phi, h, d, frozen):
    """Distances at cells adjacent to a sign change; returns how many were seeded"""
    nx, ny, nz = phi.shape
    count = 0
    for i in range(nx):
        for j in range(ny):
            for k in range(nz):
                v = phi[i, j, k]
                best = np.inf
                for axis in range(3):
                    for step in (-1, 1):
                        a = i + step if axis == 0 else i
                        b = j + step if axis == 1 else j
                        c = k + step if axis == 2 else k
                        if a < 0 or a >= nx or b < 0 or b >= ny or c < 0 or c >= nz:
                            continue
                        w = phi[a, b, c]
                        if v == 0.0:
                            best = 0.0
                        elif v * w < 0.0:
                            theta = v / (v - w)
                            if theta * h < best:
                                best = theta * h
                if best == np.inf:
                    continue
                g2 = 0.0
                if nx > 1:
                    ip = min(i + 1, nx - 1)
                    im = max(i - 1, 0)
                    if ip != im:
                        gx = (phi[ip, j, k] - phi[im, j, k]) / ((ip - im) * h)
                        g2 += gx * gx
                if ny > 1:
                    jp = min(j + 1, ny - 1)
                    jm = max(j - 1, 0)
                    if jp != jm:
                        gy = (phi[i, jp, k] - phi[i, jm, k]) / ((jp - jm) * h)
                        g2 += gy * gy
                if nz > 1:
                    kp = min(k + 1, nz - 1)
                    km = max(k - 1, 0)
                    if kp != km:
                        gz = (phi[i, j, kp] - phi[i, j, km]) / ((kp - km) * h)
                        g2 += gz * gz
                if g2 > 0.0:
                    scaled = abs(v) / np.sqrt(g2)
                    if scaled < best:
                        best = scaled
                d[i, j, k] = best
                frozen[i, j, k] = True
                count += 1
    return count


@njit(cache=True)
def _godunov(a, b, c, h):
    """Upwind solution of |grad d| = 1 from the smallest neighbor per axis"""
    if a > b:
        a, b = b, a
    if b > c:
        b, c = c, b
    if a > b:
        a, b = b, a
    if a == np.inf:
        return np.inf
    u = a + h
    if u > b:
        u = 0.5 * (a + b + np.sqrt(max(2.0 * h * h - (a - b) * (a - b), 0.0)))
        if u > c:
            s = a + b + c
            q = a * a + b * b + c * c
            u = (s + np.sqrt(max(s * s - 3.0 * (q - h * h), 0.0))) / 3.0
    return u


@njit(cache=True)
def _sweep_round(d, frozen, h):
    """Gauss-Seidel sweeps in all axis orderings; returns the largest decrease"""
    nx, ny, nz = d.shape
    change = 0.0
    for sx in range(2):
        for sy in range(2):
            for sz in range(2 if nz > 1 else 1):
                for ii in range(nx):
                    i = ii if sx == 0 else nx - 1 - ii
                    for jj in range(ny):
                        j = jj if sy == 0 else ny - 1 - jj
                        for kk in range(nz):
                            k = kk if sz == 0 else nz - 1 - kk
                            if frozen[i, j, k]:
                                continue
                            a = np.inf
                            if i > 0:
                                a = d[i - 1, j, k]
                            if i < nx - 1 and d[i + 1, j, k] < a:
                                a = d[i + 1, j, k]
                            b = np.inf
                            if j > 0:
                                b = d[i, j - 1, k]
                            if j < ny - 1 and d[i, j + 1, k] < b:
                                b = d[i, j + 1, k]
                            c = np.inf
                            if k > 0:
                                c = d[i, j, k - 1]
                            if k < nz - 1 and d[i, j, k + 1] < c:
                                c = d[i, j, k + 1]
                            u = _godunov(a, b, c, h)
                            if u < d[i, j, k]:
                                delta = d[i, j, k] - u
                                if delta > change:
                                    change = delta
                                d[i, j, k] = u
    return change


def _as_volume(values: np.ndarray) -> np.ndarray:
    """(nx, ny) arrays become (nx, ny, 1) so one kernel serves both dimensions"""
    volume = np.ascontiguousarray(values, dtype=np.float64)
    return volume.reshape(volume.shape + (1,)) if volume.ndim == 2 else volume


def _closest_point_band(volume: np.ndarray, h: float, d: np.ndarray, frozen: np.ndarray,
                        band: int, iterations: int) -> int:
    """Distances within band cells of the interface become |x - y| with y the closest point
    on the cubic spline of phi; returns how many nodes were fixed this way"""
    flat = volume.shape[2] == 1
    psi = (volume[..., 0] if flat else volume) / h
    dist = d[..., 0] if flat else d
    fixed = frozen[..., 0] if flat else frozen
    n = psi.ndim
    nodes = np.argwhere(binary_dilation(fixed, structure=generate_binary_structure(n, n), iterations=band))
    if len(nodes) == 0:
        return 0

    lo = np.maximum(nodes.min(axis=0) - 4, 0)
    hi = np.minimum(nodes.max(axis=0) + 5, psi.shape)
    window = tuple(slice(a, b) for a, b in zip(lo, hi))
    coeffs = spline_filter(psi[window], order=3, mode='nearest')
    grad = gradient_array(psi[window], 1.0)
    top = np.asarray(coeffs.shape, dtype=float) - 1.0

    # index units: psi is the distance in cells for a signed distance input
    x = (nodes - lo).astype(float)
    y = x.copy()
    moved = np.full(len(x), np.inf)
    for _ in range(iterations):
        level = map_coordinates(coeffs, y.T, order=3, mode='nearest', prefilter=False)
        g = np.stack([map_coordinates(grad[..., a], y.T, order=1, mode='nearest') for a in range(n)], axis=1)
        g2 = np.maximum(np.einsum('ij,ij->i', g, g), 1e-12)
        offset = x - y
        step = offset - ((level + np.einsum('ij,ij->i', offset, g)) / g2)[:, None] * g
        moved = np.linalg.norm(step, axis=1)
        step *= np.minimum(1.0, band / np.maximum(moved, 1e-300))[:, None]
        y = np.clip(y + step, 0.0, top)

    level = map_coordinates(coeffs, y.T, order=3, mode='nearest', prefilter=False)
    distance = np.linalg.norm(x - y, axis=1)
    index = tuple(nodes.T)
    ok = (np.abs(level) < 1e-6) & (moved < 1e-4) & (distance <= band + 1.5)
    ok &= ~fixed[index] | (np.abs(distance * h - dist[index]) <= 0.5 * h)
    accepted = tuple(axis[ok] for axis in index)
    dist[accepted] = distance[ok] * h
    fixed[accepted] = True
    return int(np.count_nonzero(ok))


def _reinitialize_values(values: np.ndarray, h: float, tolerance: float, max_rounds: int,
                         band: int = EVOLVE_DEFAULTS['reinit_band'],
                         iterations: int = EVOLVE_DEFAULTS['reinit_iterations']) -> np.ndarray:
    volume = _as_volume(values)
    d = np.full(volume.shape, np.inf)
    frozen = np.zeros(volume.shape, dtype=np.bool_)
    if _seed_interface(volume, h, d, frozen) == 0:
        raise FrontExtinction("level function has no sign change")
    if band > 0:
        _closest_point_band(volume, h, d, frozen, band, iterations)
    for _ in range(max_rounds):
        if _sweep_round(d, frozen, h) < tolerance:
            break
    result = np.where(volume < 0.0, -d, d)
    return result.reshape(values.shape)


def reinitialize(phi: ScalarField, tolerance: Optional[float] = None,
                 max_rounds: int = EVOLVE_DEFAULTS['reinit_max_rounds'],
                 band: int = EVOLVE_DEFAULTS['reinit_band']) -> ScalarField:
    """Signed distance with the same zero set: closest points near the interface, fast sweeping beyond"""
    h = phi.spacing
    tol = (tolerance if tolerance is not None else EVOLVE_DEFAULTS['reinit_tolerance']) * h
    values = _reinitialize_values(phi.values, h, tol, max_rounds, band)
    return ScalarField(phi.grid, np.clip(values, -phi.diagonal, phi.diagonal), FieldKind.SIGNED_DISTANCE)


def mcf_step(phi: ScalarField, cfg: Optional[EvolveConfig] = None) -> ScalarField:
    """One explicit Euler step of phi_t = |grad phi| div(grad phi / |grad phi|)"""
    cfg = cfg or EvolveConfig()
    cfg.validate(phi.grid)
    h = phi.spacing
    volume = _as_volume(phi.values)
    out = np.empty_like(volume)
    _mcf_kernel(volume, out, cfg.time_step(phi.grid), h, (cfg.eps_reg * h) ** 2, phi.diagonal)
    return ScalarField(phi.grid, out.reshape(phi.values.shape), FieldKind.LEVEL_FUNCTION)


def mean_curvature_array(values: np.ndarray, h: float, eps: float = 1e-12) -> np.ndarray:
    """div(grad phi / |grad phi|) at every sample"""
    grad = gradient_array(values, h)
    hess = hessian_array(values, h)
    g2 = np.sum(grad * grad, axis=-1)
    laplacian = np.trace(hess, axis1=-2, axis2=-1)
    normal_part = np.einsum('...i,...ij,...j->...', grad, hess, grad)
    return (g2 * laplacian - normal_part) / (g2 + eps) ** 1.5


def validate_mean_convexity(phi0: ScalarField, tolerance: float) -> float:
    """Smallest mean curvature sampled on the initial zero set; raises below -tolerance"""
    surface = extract_level_set(phi0, 0.0)
    if surface.is_empty:
        raise MeanConvexityError("initial zero set is empty")
    curvature = mean_curvature_array(phi0.values, phi0.spacing)
    interpolator = RegularGridInterpolator(phi0.grid.axes, curvature, bounds_error=False, fill_value=None)
    sampled = interpolator(surface.vertices)
    lowest = float(np.min(sampled))
    if lowest < -tolerance:
        worst = surface.vertices[int(np.argmin(sampled))]
        raise MeanConvexityError(f"initial boundary is not mean-convex: H={lowest:.4f} at {worst.tolist()}")
    return lowest


def level_set_residual(u: ScalarField, floor: Optional[float] = None) -> np.ndarray:
    """|-(I - N x N):Hess u - 1| where |grad u| exceeds the floor (NaN elsewhere)"""
    floor = SURFACE_CONFIG['grad_floor_factor'] * u.spacing if floor is None else floor
    grad = u.gradient_array
    norm = u.gradient_norm_array
    hess = u.hessian_array
    with np.errstate(invalid='ignore', divide='ignore'):
        normal = grad / norm[..., None]
        tangential = np.trace(hess, axis1=-2, axis2=-1) - np.einsum('...i,...ij,...j->...', normal, hess, normal)
        residual = np.abs(-tangential - 1.0)
    mask = norm > floor
    border = np.zeros(u.values.shape, dtype=bool)
    for a in range(u.dim):
        index = [slice(None)] * u.dim
        index[a] = [0, -1]
        border[tuple(index)] = True
    return np.where(mask & ~border, residual, np.nan)


def arrival_noise(u: ScalarField, floor: Optional[float] = None) -> float:
    """Amplitude of grid-scale noise in u implied by the median residual over nodes with u > 0;
    a node perturbation of size delta moves a second difference by 4 delta / h^2"""
    residual = level_set_residual(u, floor)
    finite = residual[np.isfinite(residual) & (u.values > 0.0)]
    if finite.size == 0:
        return 0.0
    return float(np.median(finite)) * u.spacing ** 2 / 4.0


def interior_local_minima(arrival: ArrivalField, band_cells: float = 2.0) -> List[Tuple[int, ...]]:
    """Strict grid-local minima of u over reached cells away from the initial boundary band"""
    values = np.where(arrival.reached, arrival.u.values, np.inf)
    footprint = np.ones((3,) * values.ndim, dtype=bool)
    footprint[(1,) * values.ndim] = False
    neighbor_min = minimum_filter(values, footprint=footprint, mode='constant', cval=np.inf)
    strict = arrival.reached & (values < neighbor_min)
    band = arrival.initial.values > -band_cells * arrival.grid.spacing
    return [tuple(int(v) for v in idx) for idx in np.argwhere(strict & ~band)]


SnapshotCallback = Callable[[int, float, ScalarField], None]


class ArrivalTimeSolver:
    """Evolves a shape by level set mean curvature flow and records arrival times"""

    def __init__(self, config: Optional[EvolveConfig] = None):
        self.config = config or EvolveConfig()
        self.logger = logging.getLogger(__name__)

    def solve(self, shape: ShapeSpec, grid: GridSpec,
              snapshot_callback: Optional[SnapshotCallback] = None) -> ArrivalField:
        cfg = self.config
        cfg.validate(grid)
        started = time.perf_counter()

        phi0 = signed_distance_init(shape, grid)
        min_curvature = validate_mean_convexity(phi0, cfg.mean_convex_tolerance)

        h = grid.spacing
        dt = cfg.time_step(grid)
        t_max = cfg.final_time(grid)
        clamp = grid.diagonal
        eps_h2 = (cfg.eps_reg * h) ** 2
        reinit_tol = cfg.reinit_tolerance * h

        phi = _as_volume(phi0.values).copy()
        scratch = np.empty_like(phi)
        arrival = np.zeros_like(phi)
        reached = np.zeros(phi.shape, dtype=np.bool_)
        inside0 = phi < 0.0
        reached[phi == 0.0] = True

        self.logger.info(f"Evolving {shape.describe()} on {grid.cells} cells, h={h:.4g}, "
                         f"dt={dt:.3e}, T_max={t_max:.4g}")
        t = 0.0
        step = 0
        violations = 0
        while t < t_max:
            inside, reentries = _mcf_kernel_recording(phi, scratch, arrival, reached, t, dt, h, eps_h2, clamp)
            phi, scratch = scratch, phi
            t += dt
            step += 1
            violations += reentries
            if inside == 0:
                self.logger.info(f"Front extinct after {step} steps at t={t:.5f}")
                break
            if step % cfg.reinit_every == 0:
                try:
                    phi = np.clip(_reinitialize_values(phi, h, reinit_tol, cfg.reinit_max_rounds,
                                                         cfg.reinit_band), -clamp, clamp)
                except FrontExtinction:
                    self.logger.info(f"Reinitialization found no zero set at t={t:.5f}")
                    break
                scratch = np.empty_like(phi)
            if snapshot_callback and cfg.emit_every and step % cfg.emit_every == 0:
                snapshot_callback(step, t, ScalarField(grid, phi.reshape(grid.shape).copy(),
                                                       FieldKind.LEVEL_FUNCTION))
            if step % 1000 == 0:
                self.logger.debug(f"step {step}, t={t:.5f}, inside cells {inside}")

        warnings = []
        if violations:
            message = f"{violations} cells re-entered the inside region; the front did not advance monotonically"
            warnings.append(message)
            self.logger.warning(message)

        reached = reached & inside0 | (reached & (phi0.values.reshape(phi.shape) == 0.0))
        inside_count = int(np.count_nonzero(inside0))
        coverage = float(np.count_nonzero(reached & inside0)) / max(inside_count, 1)
        if coverage < cfg.coverage_threshold:
            message = (f"front swept {coverage:.2%} of the inside region before T_max={t_max:.4g}; "
                       f"unreached cells hold t={t:.4g}")
            warnings.append(message)
            self.logger.warning(message)

        values = self._fill(arrival, reached, inside0, phi0.values.reshape(phi.shape), t, h)
        values = values.reshape(grid.shape)
        reached = reached.reshape(grid.shape)
        u = ScalarField(grid, values, FieldKind.ARRIVAL_TIME)
        extinction = float(values[reached].max()) if np.any(reached) else 0.0
        elapsed = time.perf_counter() - started
        self.logger.info(f"Arrival time done: {step} steps, extinction {extinction:.5f}, "
                         f"coverage {coverage:.2%}, {format_duration(elapsed)}")
        return ArrivalField(u, reached, extinction, phi0, step, t, dt, coverage, violations,
                            min_curvature, elapsed, warnings)

    @staticmethod
    def _fill(arrival, reached, inside0, phi0, t_end, h) -> np.ndarray:
        """Unreached inside cells take the stopping time; outside cells a linear extension"""
        values = np.where(reached, arrival, 0.0)
        values[inside0 & ~reached] = t_end
        near = reached & (phi0 < 0.0) & (phi0 > -3.0 * h) & (arrival > 0.0)
        slope = float(np.median(arrival[near] / -phi0[near])) if np.any(near) else 1.0
        outside = ~inside0 & ~reached
        values[outside] = -slope * phi0[outside]
        return values


def compute_arrival_time(shape: ShapeSpec, grid: GridSpec, cfg: Optional[EvolveConfig] = None,
                         snapshot_callback: Optional[SnapshotCallback] = None) -> ArrivalField:
    """Arrival time field of the level set flow starting from the shape boundary"""
    return ArrivalTimeSolver(cfg).solve(shape, grid, snapshot_callback)
