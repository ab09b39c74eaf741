"""
Level surfaces of a field and their geometry
Extraction of {u = t}, curvature read from the field, the Hessian
reconstruction from surface quantities and the 2-convexity diagnostic
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from skimage.measure import find_contours, marching_cubes

from core.config import SURFACE_CONFIG
from core.exceptions import ConfigError, LevelRangeError, MeanConvexityError, NearSingularError
from core.field import ScalarField
from core.utils import eigen_sorted, symmetrize, tangent_frame

logger = logging.getLogger(__name__)


@dataclass
class LevelSurface:
    """Polyline (n=2) or triangle mesh (n=3) approximating a level set"""
    level: float
    dim: int
    vertices: np.ndarray
    elements: np.ndarray
    areas: np.ndarray
    centroids: np.ndarray
    normals: np.ndarray
    orientation: str = 'unoriented'   # 'inward' = toward increasing u

    @classmethod
    def from_arrays(cls, vertices: np.ndarray, elements: np.ndarray, level: float = 0.0) -> 'LevelSurface':
        """Build element measures; zero-measure elements are dropped"""
        vertices = np.asarray(vertices, dtype=float)
        elements = np.asarray(elements, dtype=np.int64).reshape(-1, vertices.shape[1] if len(vertices) else 2)
        dim = vertices.shape[1]
        if len(elements) == 0:
            return cls(level, dim, vertices, elements, np.zeros(0), np.zeros((0, dim)), np.zeros((0, dim)))
        corners = vertices[elements]
        if dim == 2:
            tangent = corners[:, 1] - corners[:, 0]
            areas = np.linalg.norm(tangent, axis=1)
            raw_normals = np.column_stack([tangent[:, 1], -tangent[:, 0]])
        else:
            cross = np.cross(corners[:, 1] - corners[:, 0], corners[:, 2] - corners[:, 0])
            areas = 0.5 * np.linalg.norm(cross, axis=1)
            raw_normals = cross
        keep = areas > 0.0
        elements, corners, areas, raw_normals = elements[keep], corners[keep], areas[keep], raw_normals[keep]
        normals = raw_normals / np.linalg.norm(raw_normals, axis=1)[:, None]
        return cls(level, dim, vertices, elements, areas, corners.mean(axis=1), normals)

    @property
    def is_empty(self) -> bool:
        return len(self.elements) == 0

    @property
    def total_area(self) -> float:
        return float(np.sum(self.areas))

    def transformed(self, rotation: Optional[np.ndarray] = None, shift: Optional[Sequence[float]] = None,
                    scale: float = 1.0) -> 'LevelSurface':
        """Copy under x -> scale * R x + shift"""
        vertices = self.vertices if rotation is None else self.vertices @ np.asarray(rotation).T
        vertices = scale * vertices
        if shift is not None:
            vertices = vertices + np.asarray(shift, dtype=float)
        return LevelSurface.from_arrays(vertices, self.elements.copy(), self.level)

    def boundary_edge_count(self) -> int:
        """Edges (n=3) or vertices (n=2) used by exactly one element"""
        if self.is_empty:
            return 0
        if self.dim == 2:
            counts = np.bincount(self.elements.ravel(), minlength=len(self.vertices))
            return int(np.count_nonzero(counts == 1))
        edges = np.concatenate([self.elements[:, [0, 1]], self.elements[:, [1, 2]], self.elements[:, [2, 0]]])
        edges = np.sort(edges, axis=1)
        _, counts = np.unique(edges, axis=0, return_counts=True)
        return int(np.count_nonzero(counts == 1))

    def orient_by(self, field) -> 'LevelSurface':
        """Flip element normals to point toward increasing field values"""
        if self.is_empty:
            self.orientation = 'inward'
            return self
        gradient = field.gradient_clipped(self.centroids)
        flip = np.sum(gradient * self.normals, axis=1) < 0.0
        self.normals[flip] *= -1.0
        if self.dim == 2:
            self.elements[flip] = self.elements[flip][:, ::-1]
        else:
            self.elements[flip] = self.elements[flip][:, [0, 2, 1]]
        self.orientation = 'inward'
        return self


def _split_field(u):
    """(ScalarField, reached mask or None) from an ArrivalField or a ScalarField"""
    if hasattr(u, 'reached') and hasattr(u, 'initial'):
        return u.u, u.reached
    return u, None


def extract_level_set(u, t: float) -> LevelSurface:
    """Marching squares / cubes extraction of {u = t} with linear edge interpolation"""
    field, reached = _split_field(u)
    values = field.values
    sample = values[reached] if reached is not None and np.any(reached) else values
    low, high = float(sample.min()), float(sample.max())
    if not low < t < high:
        raise LevelRangeError(f"level {t} outside the field range ({low}, {high})")

    h = field.spacing
    origin = np.asarray(field.grid.lower) + 0.5 * h
    if field.dim == 2:
        vertices, segments = [], []
        offset = 0
        for contour in find_contours(values, t):
            if len(contour) < 2:
                continue
            closed = np.allclose(contour[0], contour[-1])
            points = origin + contour * h
            if closed:
                points = points[:-1]
            count = len(points)
            if count < 2:
                continue
            index = np.arange(count)
            nxt = (index + 1) % count if closed else index[1:]
            start = index if closed else index[:-1]
            segments.append(np.column_stack([start, nxt]) + offset)
            vertices.append(points)
            offset += count
        if not vertices:
            surface = LevelSurface.from_arrays(np.zeros((0, 2)), np.zeros((0, 2)), t)
        else:
            surface = LevelSurface.from_arrays(np.vstack(vertices), np.vstack(segments), t)
    else:
        verts, faces, _, _ = marching_cubes(values, level=t, spacing=(h, h, h),
                                            method='lewiner', allow_degenerate=False)
        surface = LevelSurface.from_arrays(verts + origin, faces, t)

    logger.debug(f"Level {t:.5g}: {len(surface.elements)} elements, area {surface.total_area:.5g}")
    return surface.orient_by(field)


def circle_surface(radius: float, center: Sequence[float] = (0.0, 0.0), segments: int = 4096) -> LevelSurface:
    angles = 2.0 * np.pi * np.arange(segments) / segments
    vertices = np.asarray(center, dtype=float) + radius * np.column_stack([np.cos(angles), np.sin(angles)])
    index = np.arange(segments)
    return LevelSurface.from_arrays(vertices, np.column_stack([index, (index + 1) % segments]))


def _grid_triangles(rows: int, cols: int, wrap: bool) -> np.ndarray:
    """Two triangles per quad of a (rows+1) x cols vertex lattice"""
    col_count = cols if wrap else cols - 1
    i, j = np.meshgrid(np.arange(rows), np.arange(col_count), indexing='ij')
    i, j = i.ravel(), j.ravel()
    j1 = (j + 1) % cols
    a = i * cols + j
    b = (i + 1) * cols + j
    c = (i + 1) * cols + j1
    d = i * cols + j1
    return np.vstack([np.column_stack([a, b, c]), np.column_stack([a, c, d])])


def sphere_surface(radius: float, center: Sequence[float] = (0.0, 0.0, 0.0), resolution: int = 256) -> LevelSurface:
    theta = np.linspace(0.0, np.pi, resolution + 1)
    phi = 2.0 * np.pi * np.arange(2 * resolution) / (2 * resolution)
    tt, pp = np.meshgrid(theta, phi, indexing='ij')
    vertices = np.column_stack([np.sin(tt).ravel() * np.cos(pp).ravel(),
                                np.sin(tt).ravel() * np.sin(pp).ravel(),
                                np.cos(tt).ravel()])
    vertices = np.asarray(center, dtype=float) + radius * vertices
    return LevelSurface.from_arrays(vertices, _grid_triangles(resolution, 2 * resolution, wrap=True))


def cylinder_surface(radius: float, half_length: float, segments: int = 512, rings: int = 512) -> LevelSurface:
    """Open round cylinder around the z axis"""
    z = np.linspace(-half_length, half_length, rings + 1)
    angles = 2.0 * np.pi * np.arange(segments) / segments
    zz, aa = np.meshgrid(z, angles, indexing='ij')
    vertices = np.column_stack([radius * np.cos(aa).ravel(), radius * np.sin(aa).ravel(), zz.ravel()])
    return LevelSurface.from_arrays(vertices, _grid_triangles(rings, segments, wrap=True))


def plane_surface(dim: int, center: Sequence[float], normal: Sequence[float], half_width: float,
                  resolution: int = 200) -> LevelSurface:
    """Flat square (n=3) or segment (n=2) through ``center``"""
    center = np.asarray(center, dtype=float)
    frame = tangent_frame(np.asarray(normal, dtype=float))
    s = np.linspace(-half_width, half_width, resolution + 1)
    if dim == 2:
        vertices = center + s[:, None] * frame[0]
        index = np.arange(resolution)
        return LevelSurface.from_arrays(vertices, np.column_stack([index, index + 1]))
    aa, bb = np.meshgrid(s, s, indexing='ij')
    vertices = center + aa.ravel()[:, None] * frame[0] + bb.ravel()[:, None] * frame[1]
    return LevelSurface.from_arrays(vertices, _grid_triangles(resolution, resolution + 1, wrap=False))


@dataclass
class SurfaceGeometry:
    """Geometry of the level set through a regular point, read from the field"""
    point: np.ndarray
    level: float
    normal: np.ndarray
    frame: np.ndarray                   # rows e_1..e_{n-1}, aligned with principal directions
    second_form: np.ndarray
    principal_curvatures: np.ndarray    # ascending
    mean_curvature: float
    grad_H: np.ndarray
    laplacian_H: float
    grad_norm: float

    @property
    def dim(self) -> int:
        return len(self.normal)


def _grad_floor(u, grad_floor: Optional[float]) -> float:
    return SURFACE_CONFIG['grad_floor_factor'] * u.spacing if grad_floor is None else grad_floor


def mean_curvature_at(u, point) -> float:
    """H = -(I - N x N):Hess u / |grad u|"""
    grad = np.asarray(u.gradient_at(point))
    norm = float(np.linalg.norm(grad))
    if norm == 0.0:
        raise NearSingularError(point, 0.0, 0.0)
    normal = grad / norm
    hess = np.asarray(u.hessian_at(point))
    return float(-(np.trace(hess) - normal @ hess @ normal) / norm)


def _level_value(u, x: np.ndarray) -> float:
    """u(x); sampled fields use the second-order Taylor model at the nearest node, exact on quadratics"""
    if not isinstance(u, ScalarField):
        return float(u.value_at(x))
    index = u.grid.nearest_index(x)
    offset = x - u.grid.node(index)
    return float(u.values[index] + u.gradient_array[index] @ offset
                 + 0.5 * offset @ u.hessian_array[index] @ offset)


def project_to_level(u, point, level: float, iterations: int = SURFACE_CONFIG['projection_iterations']) -> np.ndarray:
    """Newton steps along grad u back onto {u = level}"""
    x = np.asarray(point, dtype=float).copy()
    for _ in range(iterations):
        grad = np.asarray(u.gradient_at(x))
        g2 = float(grad @ grad)
        if g2 == 0.0:
            break
        x = x - (_level_value(u, x) - level) * grad / g2
    return x


def _tangent_step(h: float, mean: float) -> float:
    """delta = factor sqrt(h / H) within [2h, 1 / (4H)]; 2h when H <= 0"""
    if mean <= 0.0:
        return 2.0 * h
    delta = SURFACE_CONFIG['tangent_step_factor'] * np.sqrt(h / mean)
    return float(np.clip(delta, 2.0 * h, max(0.25 / mean, 2.0 * h)))


def surface_geometry(u, p, grad_floor: Optional[float] = None, derivatives: bool = True) -> SurfaceGeometry:
    """Normal, second fundamental form and curvature derivatives of the level set through p"""
    p = np.asarray(p, dtype=float)
    floor = _grad_floor(u, grad_floor)
    grad = np.asarray(u.gradient_at(p))
    norm = float(np.linalg.norm(grad))
    if norm < floor:
        raise NearSingularError(p, norm, floor)
    normal = grad / norm
    hess = np.asarray(u.hessian_at(p))

    base = tangent_frame(normal)
    kappa, vectors = eigen_sorted(-(base @ hess @ base.T) / norm)
    frame = vectors.T @ base
    second_form = symmetrize(-(frame @ hess @ frame.T) / norm)
    mean = float(np.trace(second_form))

    grad_H = np.zeros(len(frame))
    laplacian_H = 0.0
    if derivatives:
        level = _level_value(u, p)
        delta = _tangent_step(u.spacing, mean)
        for i, e in enumerate(frame):
            plus = mean_curvature_at(u, project_to_level(u, p + delta * e, level))
            minus = mean_curvature_at(u, project_to_level(u, p - delta * e, level))
            grad_H[i] = (plus - minus) / (2.0 * delta)
            laplacian_H += (plus + minus - 2.0 * mean) / (delta * delta)
    else:
        level = float('nan')

    return SurfaceGeometry(p, level, normal, frame, second_form, kappa, mean, grad_H, laplacian_H, norm)


def hessian_reconstruct(g: SurfaceGeometry) -> np.ndarray:
    """Hess u = -Q M Q^T with Q = (N, e_1..e_{n-1}) and M assembled from A/H, grad H, Laplacian H"""
    H = g.mean_curvature
    if H <= 0.0:
        raise MeanConvexityError(f"mean curvature {H:.4g} is not positive at {g.point.tolist()}")
    n = g.dim
    shape = g.second_form / H
    block = np.zeros((n, n))
    block[0, 0] = np.sum(shape * shape) + g.laplacian_H / H ** 3
    block[0, 1:] = block[1:, 0] = g.grad_H / H ** 2
    block[1:, 1:] = shape
    q = np.column_stack([g.normal, g.frame.T])
    return symmetrize(-(q @ block @ q.T))


def two_convexity_ratio(u, samples: np.ndarray, grad_floor: Optional[float] = None) -> float:
    """min over samples of (kappa_1 + kappa_2) / H"""
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    if samples.shape[1] < 3:
        raise ConfigError("2-convexity needs at least two principal curvatures (n >= 3)")
    ratios = []
    for p in samples:
        g = surface_geometry(u, p, grad_floor, derivatives=False)
        if g.mean_curvature <= 0.0:
            raise MeanConvexityError(f"mean curvature {g.mean_curvature:.4g} is not positive at {p.tolist()}")
        ratios.append((g.principal_curvatures[0] + g.principal_curvatures[1]) / g.mean_curvature)
    return float(np.min(ratios))
