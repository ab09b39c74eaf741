"""
Uniform-grid scalar fields
Cell-centered samples over a box in R^n with finite-difference calculus and
multilinear interpolation, plus closed-form arrival-time fields for any n
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from core.config import FIELD_CONFIG
from core.exceptions import GridError
from core.utils import lattice_offsets

logger = logging.getLogger(__name__)


class FieldKind(Enum):
    """What the sampled values mean"""
    ARRIVAL_TIME = 'arrival-time'
    LEVEL_FUNCTION = 'level-function'
    SIGNED_DISTANCE = 'signed-distance'


@dataclass(frozen=True)
class GridSpec:
    """Box [lower, upper] split into cells; samples sit at cell centers"""
    lower: Tuple[float, ...]
    upper: Tuple[float, ...]
    cells: Tuple[int, ...]

    def __post_init__(self):
        lower = tuple(float(v) for v in self.lower)
        upper = tuple(float(v) for v in self.upper)
        cells = tuple(int(c) for c in self.cells)
        object.__setattr__(self, 'lower', lower)
        object.__setattr__(self, 'upper', upper)
        object.__setattr__(self, 'cells', cells)

        n = len(cells)
        if n not in FIELD_CONFIG['dimensions']:
            raise GridError(f"grid dimension must be 2 or 3, got {n}")
        if len(lower) != n or len(upper) != n:
            raise GridError(f"lower/upper corners must have {n} coordinates")
        if min(cells) < FIELD_CONFIG['min_cells_per_axis']:
            raise GridError(f"every axis needs at least {FIELD_CONFIG['min_cells_per_axis']} cells, got {cells}")
        widths = np.subtract(upper, lower)
        if np.any(widths <= 0):
            raise GridError(f"upper corner {upper} must exceed lower corner {lower}")
        spacings = widths / np.asarray(cells)
        if not np.allclose(spacings, spacings[0], rtol=FIELD_CONFIG['spacing_rtol'], atol=0.0):
            raise GridError(f"spacing must be equal on all axes, got {spacings.tolist()}")

    @classmethod
    def from_spacing(cls, lower: Sequence[float], upper: Sequence[float], h: float) -> 'GridSpec':
        """Grid with spacing h; the upper corner is snapped to a whole number of cells"""
        lower = np.asarray(lower, dtype=float)
        cells = np.maximum(np.rint((np.asarray(upper, dtype=float) - lower) / h).astype(int), 1)
        return cls(tuple(lower), tuple(lower + cells * h), tuple(cells))

    @property
    def dim(self) -> int:
        return len(self.cells)

    @property
    def spacing(self) -> float:
        return (self.upper[0] - self.lower[0]) / self.cells[0]

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.cells

    @property
    def size(self) -> int:
        return int(np.prod(self.cells))

    @property
    def diagonal(self) -> float:
        return float(np.linalg.norm(np.subtract(self.upper, self.lower)))

    @property
    def axes(self) -> Tuple[np.ndarray, ...]:
        h = self.spacing
        return tuple(lo + (np.arange(c) + 0.5) * h for lo, c in zip(self.lower, self.cells))

    def coordinates(self) -> np.ndarray:
        """Sample positions, shape (*cells, n)"""
        return np.stack(np.meshgrid(*self.axes, indexing='ij'), axis=-1)

    def node(self, index: Sequence[int]) -> np.ndarray:
        return np.asarray(self.lower) + (np.asarray(index, dtype=float) + 0.5) * self.spacing

    def nearest_index(self, point: Sequence[float]) -> Tuple[int, ...]:
        raw = np.rint((np.asarray(point, dtype=float) - np.asarray(self.lower)) / self.spacing - 0.5).astype(int)
        return tuple(int(v) for v in np.clip(raw, 0, np.asarray(self.cells) - 1))

    def contains(self, points, margin: float = 0.0) -> np.ndarray:
        """Whether points lie in the box shrunk by ``margin`` (length units)"""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        lo = np.asarray(self.lower) + margin
        hi = np.asarray(self.upper) - margin
        inside = np.all((pts >= lo) & (pts <= hi), axis=1)
        return inside if np.ndim(points) > 1 else bool(inside[0])

    def scaled(self, factor: float) -> 'GridSpec':
        """Same cells over the box scaled by ``factor`` about the origin"""
        return GridSpec(tuple(factor * v for v in self.lower), tuple(factor * v for v in self.upper), self.cells)


def _shifted(padded: np.ndarray, offsets: Sequence[int]) -> np.ndarray:
    """View of an edge-padded array shifted by one cell along the given axes"""
    slices = tuple(slice(1 + o, padded.shape[a] - 1 + o) for a, o in enumerate(offsets))
    return padded[slices]


def gradient_array(values: np.ndarray, h: float) -> np.ndarray:
    """Central differences at every sample, shape (*shape, n); edge samples use mirrored padding"""
    n = values.ndim
    padded = np.pad(values, 1, mode='edge')
    grad = np.empty(values.shape + (n,))
    for a in range(n):
        plus = [0] * n
        minus = [0] * n
        plus[a], minus[a] = 1, -1
        grad[..., a] = (_shifted(padded, plus) - _shifted(padded, minus)) / (2.0 * h)
    return grad


def hessian_array(values: np.ndarray, h: float) -> np.ndarray:
    """Standard second-order stencil at every sample, shape (*shape, n, n)"""
    n = values.ndim
    padded = np.pad(values, 1, mode='edge')
    hess = np.empty(values.shape + (n, n))
    for a in range(n):
        plus = [0] * n
        minus = [0] * n
        plus[a], minus[a] = 1, -1
        hess[..., a, a] = (_shifted(padded, plus) - 2.0 * values + _shifted(padded, minus)) / (h * h)
        for b in range(a + 1, n):
            corners = 0.0
            for sa in (1, -1):
                for sb in (1, -1):
                    offsets = [0] * n
                    offsets[a], offsets[b] = sa, sb
                    corners = corners + sa * sb * _shifted(padded, offsets)
            hess[..., a, b] = hess[..., b, a] = corners / (4.0 * h * h)
    return hess


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Immutable samples of a scalar function on a GridSpec"""
    grid: GridSpec
    values: np.ndarray
    kind: FieldKind = FieldKind.ARRIVAL_TIME

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.size != self.grid.size:
            raise GridError(f"expected {self.grid.size} values for grid {self.grid.cells}, got {values.size}")
        values = values.reshape(self.grid.shape)
        if not np.all(np.isfinite(values)):
            raise GridError("field values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)

    @property
    def dim(self) -> int:
        return self.grid.dim

    @property
    def spacing(self) -> float:
        return self.grid.spacing

    @property
    def diagonal(self) -> float:
        return self.grid.diagonal

    @property
    def flat(self) -> np.ndarray:
        return self.values.ravel()

    def with_values(self, values: np.ndarray, kind: Optional[FieldKind] = None) -> 'ScalarField':
        return ScalarField(self.grid, values, kind or self.kind)

    @cached_property
    def gradient_array(self) -> np.ndarray:
        return gradient_array(self.values, self.spacing)

    @cached_property
    def hessian_array(self) -> np.ndarray:
        return hessian_array(self.values, self.spacing)

    @cached_property
    def gradient_norm_array(self) -> np.ndarray:
        return np.linalg.norm(self.gradient_array, axis=-1)

    @cached_property
    def _value_interpolator(self) -> RegularGridInterpolator:
        return RegularGridInterpolator(self.grid.axes, self.values, method='linear',
                                       bounds_error=False, fill_value=None)

    @cached_property
    def _gradient_interpolator(self) -> RegularGridInterpolator:
        return RegularGridInterpolator(self.grid.axes, self.gradient_array, method='linear',
                                       bounds_error=False, fill_value=None)

    @cached_property
    def _hessian_interpolator(self) -> RegularGridInterpolator:
        return RegularGridInterpolator(self.grid.axes, self.hessian_array, method='linear',
                                       bounds_error=False, fill_value=None)

    def contains(self, points, margin: float = 0.0):
        return self.grid.contains(points, margin)

    def _checked(self, points, margin_cells: float) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != self.dim:
            raise GridError(f"expected {self.dim}-dimensional points, got shape {pts.shape}")
        inside = self.grid.contains(pts, margin_cells * self.spacing)
        if not np.all(inside):
            bad = pts[~inside][0]
            raise GridError(f"point {bad.tolist()} is within {margin_cells} cells of the box boundary")
        return pts

    def value_at(self, points):
        """Multilinear interpolation; points at least one cell inside the box"""
        pts = self._checked(points, FIELD_CONFIG['interpolation_margin'])
        result = self._value_interpolator(pts)
        return float(result[0]) if np.ndim(points) == 1 else result

    def gradient_at(self, points):
        """Multilinear interpolation of the nodal central-difference gradient"""
        pts = self._checked(points, FIELD_CONFIG['derivative_margin'])
        result = self._gradient_interpolator(pts)
        return result[0] if np.ndim(points) == 1 else result

    def hessian_at(self, points):
        """Multilinear interpolation of the nodal finite-difference Hessian"""
        pts = self._checked(points, FIELD_CONFIG['derivative_margin'])
        result = self._hessian_interpolator(pts)
        result = 0.5 * (result + np.swapaxes(result, -1, -2))
        return result[0] if np.ndim(points) == 1 else result

    def gradient_clipped(self, points: np.ndarray) -> np.ndarray:
        """Interpolated gradient with points clamped into the sample hull (no margin check)"""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        lo = np.array([a[0] for a in self.grid.axes])
        hi = np.array([a[-1] for a in self.grid.axes])
        return self._gradient_interpolator(np.clip(pts, lo, hi))

    def ball_nodes(self, center: Sequence[float], radius: float,
                   margin_cells: float = FIELD_CONFIG['derivative_margin']
                   ) -> Tuple[np.ndarray, Tuple[np.ndarray, ...]]:
        """Sample positions within ``radius`` of center and clear of the box boundary, with their indices"""
        h = self.spacing
        center = np.asarray(center, dtype=float)
        lower = np.asarray(self.grid.lower)
        cells = np.asarray(self.grid.cells)
        lo = np.clip(np.floor((center - radius - lower) / h - 0.5).astype(int), 0, cells - 1)
        hi = np.clip(np.ceil((center - lower + radius) / h - 0.5).astype(int), 0, cells - 1)
        ranges = [np.arange(a, b + 1) for a, b in zip(lo, hi)]
        index = np.stack(np.meshgrid(*ranges, indexing='ij'), axis=-1).reshape(-1, self.dim)
        points = lower + (index + 0.5) * h
        keep = np.sum((points - center) ** 2, axis=1) <= radius * radius
        keep &= self.grid.contains(points, margin_cells * h)
        index = index[keep]
        return points[keep], tuple(index.T)

    def window(self, center: Sequence[float], radius: float) -> 'ScalarField':
        """Sub-field on the index box covering the ball B_radius(center)"""
        h = self.spacing
        lower = np.asarray(self.grid.lower)
        cells = np.asarray(self.grid.cells)
        center = np.asarray(center, dtype=float)
        lo = np.floor((center - radius - lower) / h - 0.5).astype(int) - 1
        hi = np.ceil((center + radius - lower) / h - 0.5).astype(int) + 1
        lo = np.clip(lo, 0, cells - 1)
        hi = np.clip(hi, 0, cells - 1)
        minimum = FIELD_CONFIG['min_cells_per_axis']
        for a in range(self.dim):
            while hi[a] - lo[a] + 1 < minimum:
                if hi[a] < cells[a] - 1:
                    hi[a] += 1
                if hi[a] - lo[a] + 1 < minimum and lo[a] > 0:
                    lo[a] -= 1
        sub_lower = lower + lo * h
        sub_cells = hi - lo + 1
        grid = GridSpec(tuple(sub_lower), tuple(sub_lower + sub_cells * h), tuple(sub_cells))
        index = tuple(slice(int(a), int(b) + 1) for a, b in zip(lo, hi))
        return ScalarField(grid, self.values[index], self.kind)


def _check_interior_index(f: ScalarField, idx: Sequence[int]) -> Tuple[int, ...]:
    idx = tuple(int(i) for i in idx)
    if len(idx) != f.dim:
        raise GridError(f"index {idx} does not match dimension {f.dim}")
    for i, c in zip(idx, f.grid.cells):
        if i < 1 or i > c - 2:
            raise GridError(f"index {idx} is not at least one cell from the boundary of {f.grid.cells}")
    return idx


def gradient_fd(f: ScalarField, idx: Sequence[int]) -> np.ndarray:
    """Central-difference gradient at an interior sample"""
    return f.gradient_array[_check_interior_index(f, idx)].copy()


def hessian_fd(f: ScalarField, idx: Sequence[int]) -> np.ndarray:
    """Second-order finite-difference Hessian at an interior sample"""
    return f.hessian_array[_check_interior_index(f, idx)].copy()


def interpolate(f, p):
    return f.value_at(p)


def interpolate_gradient(f, p):
    return f.gradient_at(p)


def interpolate_hessian(f, p):
    return f.hessian_at(p)


@dataclass(frozen=True)
class AnalyticField:
    """Closed-form field with exact derivatives; callables map (m, n) points to arrays"""
    dim: int
    value_fn: Callable[[np.ndarray], np.ndarray]
    gradient_fn: Callable[[np.ndarray], np.ndarray]
    hessian_fn: Callable[[np.ndarray], np.ndarray]
    spacing: float = 1.0 / 128.0
    name: str = 'analytic'
    extent: float = 4.0
    params: dict = field(default_factory=dict)

    @property
    def diagonal(self) -> float:
        return self.extent

    def contains(self, points, margin: float = 0.0):
        return np.ones(len(points), dtype=bool) if np.ndim(points) > 1 else True

    def value_at(self, points):
        result = np.asarray(self.value_fn(np.atleast_2d(np.asarray(points, dtype=float))), dtype=float)
        return float(result[0]) if np.ndim(points) == 1 else result

    def gradient_at(self, points):
        result = np.asarray(self.gradient_fn(np.atleast_2d(np.asarray(points, dtype=float))), dtype=float)
        return result[0] if np.ndim(points) == 1 else result

    def hessian_at(self, points):
        result = np.asarray(self.hessian_fn(np.atleast_2d(np.asarray(points, dtype=float))), dtype=float)
        return result[0] if np.ndim(points) == 1 else result

    @classmethod
    def sphere(cls, dim: int, radius: float, center: Optional[Sequence[float]] = None,
               spacing: float = 1.0 / 128.0) -> 'AnalyticField':
        """u = (R^2 - |x - c|^2) / (2(n - 1))"""
        c = np.zeros(dim) if center is None else np.asarray(center, dtype=float)
        m = dim - 1

        def value(x):
            d = x - c
            return (radius * radius - np.sum(d * d, axis=1)) / (2.0 * m)

        def gradient(x):
            return -(x - c) / m

        def hessian(x):
            return np.broadcast_to(-np.eye(dim) / m, (len(x), dim, dim)).copy()

        return cls(dim, value, gradient, hessian, spacing, f'sphere{dim}', 4.0 * radius,
                   {'radius': radius, 'center': c, 'k': 0})

    @classmethod
    def cylinder(cls, dim: int, k: int, radius: float, spacing: float = 1.0 / 128.0) -> 'AnalyticField':
        """u = (R^2 - |y|^2) / (2(n - k - 1)) with y the first n - k coordinates"""
        m = dim - k - 1
        if k < 0 or m < 1:
            raise GridError(f"generalized cylinder needs 0 <= k <= n - 2, got n={dim}, k={k}")
        round_mask = np.zeros(dim)
        round_mask[:dim - k] = 1.0

        def value(x):
            y = x * round_mask
            return (radius * radius - np.sum(y * y, axis=1)) / (2.0 * m)

        def gradient(x):
            return -(x * round_mask) / m

        def hessian(x):
            return np.broadcast_to(-np.diag(round_mask) / m, (len(x), dim, dim)).copy()

        return cls(dim, value, gradient, hessian, spacing, f'cylinder{dim}k{k}', 4.0 * radius,
                   {'radius': radius, 'center': np.zeros(dim), 'k': k})


def sample_sphere_arrival(grid: GridSpec, radius: float, center: Optional[Sequence[float]] = None) -> ScalarField:
    """Exact shrinking-sphere arrival time sampled on a grid"""
    exact = AnalyticField.sphere(grid.dim, radius, center, grid.spacing)
    values = exact.value_at(grid.coordinates().reshape(-1, grid.dim))
    return ScalarField(grid, values, FieldKind.ARRIVAL_TIME)


def sample_cylinder_arrival(grid: GridSpec, radius: float, axis: int = -1,
                            center: Optional[Sequence[float]] = None) -> ScalarField:
    """Exact shrinking round-cylinder arrival time (one axis direction) sampled on a grid"""
    n = grid.dim
    m = n - 2
    if m < 1:
        raise GridError("a cylinder with a line axis needs n >= 3")
    c = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    pts = grid.coordinates().reshape(-1, n) - c
    pts[:, axis % n] = 0.0
    values = (radius * radius - np.sum(pts * pts, axis=1)) / (2.0 * m)
    return ScalarField(grid, values, FieldKind.ARRIVAL_TIME)


def as_field(u):
    """The queryable field behind an ArrivalField, or u itself"""
    return getattr(u, 'u', u)


def ball_samples(u, center: Sequence[float], radius: float) -> np.ndarray:
    """Points where u may be queried inside B_radius(center)

    Grid fields give their nodes (reached cells only for arrival fields); analytic
    fields give the lattice of their nominal spacing.
    """
    field = as_field(u)
    center = np.asarray(center, dtype=float)
    if isinstance(field, AnalyticField):
        return center + lattice_offsets(field.dim, radius, field.spacing)
    points, index = field.ball_nodes(center, radius)
    reached = getattr(u, 'reached', None)
    if reached is not None and len(points):
        points = points[reached[index]]
    return points
