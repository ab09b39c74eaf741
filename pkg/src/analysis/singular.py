"""
Singular points of the arrival time
Critical point detection, classification from the Hessian eigenstructure,
cylindrical scales, clearing-out, singular set fits, slice profiles and the
continuity modulus of the Hessian
"""

import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.ndimage import minimum_filter
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from core.config import FIELD_CONFIG, SINGULAR_CONFIG, SURFACE_CONFIG
from core.exceptions import ConfigError, GridError, LevelRangeError, MeanConvexityError, NearSingularError
from core.field import AnalyticField, as_field, ball_samples
from core.surface import extract_level_set, hessian_reconstruct, project_to_level, surface_geometry
from core.utils import (eigen_sorted, lattice_offsets, quadratic_design, quadratic_parts,
                        sphere_directions, symmetrize, tangent_frame)

logger = logging.getLogger(__name__)


class Classification(Enum):
    ROUND = 'Round'
    CYLINDRICAL = 'Cylindrical'
    SADDLE = 'Saddle'
    UNCLASSIFIED = 'Unclassified'


class LocalShape(Enum):
    LOCAL_MAX = 'LocalMax'
    SADDLE = 'Saddle'


@dataclass
class AnalysisConfig:
    """Tolerances of the singular point analysis; None means derived from the grid spacing"""
    null_tol_factor: float = SINGULAR_CONFIG['null_tol_factor']
    shape_tol: float = SINGULAR_CONFIG['shape_tol']
    u_floor: Optional[float] = None
    sign_tol_factor: float = SINGULAR_CONFIG['sign_tol_factor']
    hessian_stencil: str = SINGULAR_CONFIG['hessian_stencil']
    grad_floor: Optional[float] = None
    dedupe_factor: float = SINGULAR_CONFIG['dedupe_factor']
    cluster_factor: float = SINGULAR_CONFIG['cluster_factor']
    phi: float = SINGULAR_CONFIG['cone_angle']
    eps: float = SINGULAR_CONFIG['closeness_eps']
    clearing_M: float = SINGULAR_CONFIG['clearing_M']
    threads: int = 0

    def null_tol(self, n: int) -> float:
        return self.null_tol_factor / (n - 1)

    def floor(self, h: float) -> float:
        return self.grad_floor if self.grad_floor else SURFACE_CONFIG['grad_floor_factor'] * h

    def plateau(self, h: float) -> float:
        return self.u_floor if self.u_floor is not None else SINGULAR_CONFIG['u_floor_factor'] * h * h

    def sign_tol(self, h: float) -> float:
        return max(self.plateau(h), self.sign_tol_factor * h * h)

    def validate(self):
        if self.hessian_stencil not in ('fd', 'fit'):
            raise ConfigError(f"hessian_stencil must be 'fd' or 'fit', got {self.hessian_stencil!r}")
        if self.u_floor is not None and self.u_floor <= 0.0:
            raise ConfigError(f"u_floor must be positive, got {self.u_floor}")
        if not 0.0 < self.phi < 0.5 * np.pi:
            raise ConfigError(f"cone angle must lie in (0, pi/2), got {self.phi}")
        if self.eps <= 0.0:
            raise ConfigError(f"closeness eps must be positive, got {self.eps}")
        if not 0.0 < self.shape_tol < 1.0:
            raise ConfigError(f"shape_tol must lie in (0, 1), got {self.shape_tol}")


@dataclass(eq=False)
class SingularPointRecord:
    location: np.ndarray
    value: float
    grad_norm: float
    hessian: np.ndarray
    eigenvalues: np.ndarray        # ascending
    eigenvectors: np.ndarray       # columns
    nullity: int
    classification: Classification
    axis: np.ndarray               # (n, k) orthonormal columns spanning the axis
    local_shape: LocalShape
    cluster: int = -1

    @property
    def dim(self) -> int:
        return len(self.location)

    @property
    def is_saddle(self) -> bool:
        return self.classification is Classification.SADDLE

    @property
    def label(self) -> str:
        if self.classification is Classification.CYLINDRICAL:
            return f"Cylindrical({self.nullity})"
        return self.classification.value

    def axis_vector(self) -> Optional[np.ndarray]:
        return self.axis[:, 0] if self.axis.shape[1] else None

    def to_dict(self) -> dict:
        row = {f'x{i}': float(v) for i, v in enumerate(self.location)}
        row.update({
            'value': self.value,
            'grad_norm': self.grad_norm,
            'classification': self.label,
            'local_shape': self.local_shape.value,
            'nullity': self.nullity,
            'eigenvalues': ' '.join(f'{v:.6g}' for v in self.eigenvalues),
            'cluster': self.cluster,
        })
        return row

    def to_block(self) -> str:
        """Plain-text record block for the singular point report"""
        def vector(v):
            return ' '.join(repr(float(x)) for x in np.ravel(v))

        lines = [
            '[singular_point]',
            f'location = {vector(self.location)}',
            f'value = {self.value!r}',
            f'grad_norm = {self.grad_norm!r}',
            f'hessian = {vector(self.hessian)}',
            f'eigenvalues = {vector(self.eigenvalues)}',
            f'nullity = {self.nullity}',
            f'classification = {self.label}',
            f'axis = {vector(self.axis.T) if self.axis.size else "none"}',
            f'local_shape = {self.local_shape.value}',
            f'cluster = {self.cluster}',
        ]
        return '\n'.join(lines) + '\n'


def _node_fit(f, values: np.ndarray, index: Sequence[int], radius_cells: int = 1):
    """Least-squares quadratic through the nodal values of a (2r+1)^n block; returns (origin, coefficients)"""
    n = f.dim
    span = np.arange(-radius_cells, radius_cells + 1)
    offsets = np.stack(np.meshgrid(*([span] * n), indexing='ij'), axis=-1).reshape(-1, n)
    cells = np.asarray(f.grid.cells)
    center = np.clip(np.asarray(index), radius_cells, cells - 1 - radius_cells)
    block = center + offsets
    origin = f.grid.node(center)
    design = quadratic_design(offsets * f.spacing)
    coefficients, *_ = np.linalg.lstsq(design, values[tuple(block.T)], rcond=None)
    return origin, coefficients


def _quadratic_eval(coefficients: np.ndarray, dim: int, offset: np.ndarray) -> float:
    constant, gradient, hessian = quadratic_parts(coefficients, dim)
    return float(constant + gradient @ offset + 0.5 * offset @ hessian @ offset)


def _refine(f, index: Tuple[int, ...], squared: np.ndarray) -> np.ndarray:
    """Minimizer of the quadratic model of |grad u|^2, at most one cell from the node"""
    origin, coefficients = _node_fit(f, squared, index)
    _, gradient, hessian = quadratic_parts(coefficients, f.dim)
    step = -np.linalg.pinv(hessian, rcond=1e-3) @ gradient
    node = f.grid.node(index)
    target = origin + step
    length = float(np.linalg.norm(target - node))
    if length > f.spacing:
        target = node + (target - node) * f.spacing / length
    return target


def detect_critical_points(u, cfg: Optional[AnalysisConfig] = None) -> List[np.ndarray]:
    """Sub-cell critical points: grid-local minima of |grad u| below the floor, deduplicated"""
    cfg = cfg or AnalysisConfig()
    f = as_field(u)
    h = f.spacing
    norm = f.gradient_norm_array
    minima = (norm < cfg.floor(h)) & (minimum_filter(norm, size=3, mode='nearest') == norm)
    reached = getattr(u, 'reached', None)
    if reached is not None:
        minima &= reached
    interior = np.zeros_like(minima)
    interior[tuple(slice(2, c - 2) for c in f.grid.cells)] = True
    minima &= interior

    indices = np.argwhere(minima)
    indices = indices[np.argsort(norm[tuple(indices.T)], kind='stable')]
    squared = norm * norm
    kept: List[np.ndarray] = []
    radius = cfg.dedupe_factor * h
    for index in indices:
        point = _refine(f, tuple(index), squared)
        if kept and np.min(np.linalg.norm(np.asarray(kept) - point, axis=1)) < radius:
            continue
        kept.append(point)

    kept.sort(key=lambda x: tuple(np.round(x, 9)))
    logger.info(f"Detected {len(kept)} critical point candidates from {len(indices)} grid minima")
    return kept


def critical_value(u, p: Sequence[float]) -> float:
    """u(p) from the local quadratic model (exact on quadratic fields)"""
    f = as_field(u)
    p = np.asarray(p, dtype=float)
    if isinstance(f, AnalyticField):
        return float(f.value_at(p))
    origin, coefficients = _node_fit(f, f.values, f.grid.nearest_index(p))
    return _quadratic_eval(coefficients, f.dim, p - origin)


def _hessian(f, p: np.ndarray, stencil: str) -> np.ndarray:
    if stencil == 'fit' and not isinstance(f, AnalyticField):
        if not f.contains(p, FIELD_CONFIG['derivative_margin'] * f.spacing):
            raise GridError(f"point {p.tolist()} is too close to the box boundary for a Hessian fit")
        _, coefficients = _node_fit(f, f.values, f.grid.nearest_index(p), SINGULAR_CONFIG['hessian_fit_cells'])
        return quadratic_parts(coefficients, f.dim)[2]
    return symmetrize(f.hessian_at(p))


def local_shape(u, p: Sequence[float], value: float, cfg: Optional[AnalysisConfig] = None) -> LocalShape:
    """Sign pattern of u - u(p) on a small sphere: nothing above means a local maximum"""
    cfg = cfg or AnalysisConfig()
    f = as_field(u)
    h = f.spacing
    directions = sphere_directions(f.dim, SINGULAR_CONFIG['sign_directions'].get(f.dim, 2 * f.dim))
    samples = np.asarray(p, dtype=float) + SINGULAR_CONFIG['sign_radius_factor'] * h * directions
    differences = np.atleast_1d(f.value_at(samples)) - value
    above = np.count_nonzero(differences > cfg.sign_tol(h))
    return LocalShape.SADDLE if above else LocalShape.LOCAL_MAX


def _match_templates(eigenvalues: np.ndarray, n: int, cfg: AnalysisConfig) -> Tuple[np.ndarray, Classification]:
    null = np.abs(eigenvalues) < cfg.null_tol(n)
    k = int(np.count_nonzero(null))
    m = n - k - 1
    if m < 1:
        return null, Classification.UNCLASSIFIED
    target = -1.0 / m
    if not np.all(np.abs(eigenvalues[~null] - target) <= cfg.shape_tol * abs(target)):
        return null, Classification.UNCLASSIFIED
    return null, Classification.ROUND if k == 0 else Classification.CYLINDRICAL


def classify_singularity(u, p: Sequence[float], cfg: Optional[AnalysisConfig] = None) -> SingularPointRecord:
    """Round / Cylindrical(k) / Saddle / Unclassified from the Hessian and the local sign pattern"""
    cfg = cfg or AnalysisConfig()
    f = as_field(u)
    p = np.asarray(p, dtype=float)
    n = f.dim
    hessian = _hessian(f, p, cfg.hessian_stencil)
    grad_norm = float(np.linalg.norm(f.gradient_at(p)))
    value = critical_value(u, p)
    eigenvalues, eigenvectors = eigen_sorted(hessian)

    null, classification = _match_templates(eigenvalues, n, cfg)
    axis = eigenvectors[:, null]
    shape = local_shape(f, p, value, cfg)
    if shape is LocalShape.SADDLE:
        classification = Classification.SADDLE
        axis = eigenvectors[:, [-1]]

    record = SingularPointRecord(p, value, grad_norm, hessian, eigenvalues, eigenvectors,
                                 int(np.count_nonzero(null)), classification, axis, shape)
    logger.debug(f"{record.label} at {np.round(p, 5).tolist()}: eigenvalues {np.round(eigenvalues, 4).tolist()}")
    return record


def template_separation(n: int) -> float:
    """Smallest gap between the eigenvalue templates 1/(n-k-1), k = 0..n-2"""
    templates = [1.0 / (n - k - 1) for k in range(n - 1)]
    if len(templates) < 2:
        return float('inf')
    return float(min(abs(a - b) for i, a in enumerate(templates) for b in templates[i + 1:]))


def templates_disjoint(n: int, shape_tol: float = SINGULAR_CONFIG['shape_tol'],
                       null_tol_factor: float = SINGULAR_CONFIG['null_tol_factor']) -> bool:
    """No eigenvalue can match two templates, nor a template and the null band"""
    bands = [(1.0 / m) * np.array([1.0 - shape_tol, 1.0 + shape_tol]) for m in range(1, n)]
    bands.append(np.array([0.0, null_tol_factor / (n - 1)]))
    bands.sort(key=lambda b: b[0])
    return all(a[1] < b[0] for a, b in zip(bands[:-1], bands[1:]))


def _split_axial(offsets: np.ndarray, axis: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(|z|, y) with z the axis coordinates and y the orthogonal part"""
    z = offsets @ axis
    y = offsets - z @ axis.T
    return np.linalg.norm(np.atleast_2d(z), axis=1), y


def _level_points(u, p: np.ndarray, radius: float, level: float) -> np.ndarray:
    f = as_field(u)
    if isinstance(f, AnalyticField):
        seeds = p + lattice_offsets(f.dim, radius, radius / 6.0)
        points = np.array([project_to_level(f, s, level, iterations=12) for s in seeds])
        converged = np.abs(np.atleast_1d(f.value_at(points)) - level) < 1e-10 * max(1.0, abs(level))
        return points[converged]
    try:
        return extract_level_set(f.window(p, radius), level).vertices
    except LevelRangeError:
        return np.zeros((0, f.dim))


def cylindrical_scale(u, p: Sequence[float], axis: np.ndarray, phi: float = SINGULAR_CONFIG['cone_angle'],
                      eps: float = SINGULAR_CONFIG['closeness_eps'], r_max: Optional[float] = None,
                      value: Optional[float] = None) -> float:
    """Largest dyadic r on which level sets outside the cone stay eps-close to the shrinking cylinder"""
    f = as_field(u)
    p = np.asarray(p, dtype=float)
    axis = np.asarray(axis, dtype=float)
    if axis.ndim == 1:
        axis = axis[:, None]
    n, k = axis.shape
    m = n - k - 1
    if m < 1 or k < 1:
        raise ConfigError(f"cylindrical scale needs 1 <= k <= n - 2, got n={n}, k={k}")
    if not 0.0 < phi < 0.5 * np.pi or eps <= 0.0:
        raise ConfigError(f"need phi in (0, pi/2) and eps > 0, got phi={phi}, eps={eps}")
    h = f.spacing
    value = critical_value(u, p) if value is None else value
    r = r_max if r_max else SINGULAR_CONFIG['scale_r_max_factor'] * h
    r_min = SINGULAR_CONFIG['scale_min_factor'] * h
    while r >= r_min and not f.contains(p, r + 2.0 * h):
        r *= 0.5

    while r >= r_min:
        if _cylindrical_at(f, p, axis, m, r, phi, eps, value):
            logger.debug(f"Cylindrical scale {r:.4g} at {np.round(p, 4).tolist()} (phi={phi}, eps={eps})")
            return r
        r *= 0.5
    return 0.0


def _cylindrical_at(f, p, axis, m, r, phi, eps, value) -> bool:
    for fraction in (0.25, 0.4, 0.55):
        rho = fraction * r
        tau = rho * rho / (2.0 * m)
        points = _level_points(f, p, r, value - tau)
        if len(points) == 0:
            return False
        offsets = points - p
        inside_ball = np.linalg.norm(offsets, axis=1) <= r
        z, y = _split_axial(offsets, axis)
        y_norm = np.linalg.norm(y, axis=1)
        keep = inside_ball & (y_norm > z * np.tan(phi))
        if not np.any(keep):
            return False
        if np.any(np.abs(y_norm[keep] - np.sqrt(2.0 * m * tau)) > eps * np.sqrt(tau)):
            return False
        grad = np.atleast_2d(f.gradient_at(points[keep]))
        normals = grad / np.linalg.norm(grad, axis=1)[:, None]
        model = -y[keep] / y_norm[keep][:, None]
        angles = np.arccos(np.clip(np.sum(normals * model, axis=1), -1.0, 1.0))
        if np.any(angles > eps):
            return False
    return True


@dataclass
class ClearingOutResult:
    offset: float
    level: float
    radius: float
    evaluable: bool
    cleared: Optional[bool]
    margin: float


def clearing_out_check(u, p: Sequence[float], M: float, t_list: Sequence[float],
                       value: Optional[float] = None, tolerance: Optional[float] = None) -> List[ClearingOutResult]:
    """Whether {u = u(p) + t} avoids B_{M sqrt t}(p), with the distance margin"""
    f = as_field(u)
    p = np.asarray(p, dtype=float)
    h = f.spacing
    value = critical_value(u, p) if value is None else value
    tol = SINGULAR_CONFIG['u_floor_factor'] * h * h if tolerance is None else tolerance
    results = []
    for t in t_list:
        if t <= 0:
            raise ConfigError(f"clearing-out offsets must be positive, got {t}")
        level = value + t
        radius = M * np.sqrt(t)
        if not f.contains(p, radius + h):
            logger.warning(f"Clearing-out ball of radius {radius:.4g} at {np.round(p, 4).tolist()} leaves the box")
            results.append(ClearingOutResult(t, level, radius, False, None, float('nan')))
            continue
        samples = ball_samples(u, p, 4.0 * radius)
        values = np.atleast_1d(f.value_at(samples)) if len(samples) else np.zeros(0)
        crossed = samples[values >= level - tol] if len(samples) else samples
        distance = float(np.min(np.linalg.norm(crossed - p, axis=1))) if len(crossed) else float('inf')
        margin = distance - radius
        results.append(ClearingOutResult(t, level, radius, True, bool(margin > 0.0), margin))
    return results


def cluster_records(records: Sequence[SingularPointRecord], h: float,
                    factor: float = SINGULAR_CONFIG['cluster_factor']) -> List[List[SingularPointRecord]]:
    """Single-linkage groups at distance factor * h; records get their cluster id"""
    if not records:
        return []
    points = np.array([r.location for r in records])
    pairs = np.array(sorted(cKDTree(points).query_pairs(factor * h)), dtype=int).reshape(-1, 2)
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(len(points), len(points)))
    _, labels = connected_components(graph, directed=False)
    # renumber by first appearance so ids follow the location order
    order = {}
    for label in labels:
        order.setdefault(int(label), len(order))
    clusters: List[List[SingularPointRecord]] = [[] for _ in order]
    for record, label in zip(records, labels):
        record.cluster = order[int(label)]
        clusters[record.cluster].append(record)
    return clusters


@dataclass
class CircleFit:
    center: np.ndarray
    normal: np.ndarray
    radius: float
    residuals: np.ndarray

    @property
    def rms(self) -> float:
        return float(np.sqrt(np.mean(self.residuals ** 2)))


def fit_circle(points: np.ndarray) -> CircleFit:
    """Plane by PCA, then an algebraic circle fit inside it"""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if len(points) < 3:
        raise ConfigError("a circle fit needs at least three points")
    centroid = points.mean(axis=0)
    _, _, vt = np.linalg.svd(points - centroid)
    plane = vt[:2]
    normal = vt[-1] if points.shape[1] == 3 else np.zeros(points.shape[1])
    local = (points - centroid) @ plane.T
    design = np.column_stack([2.0 * local, np.ones(len(local))])
    rhs = np.sum(local * local, axis=1)
    (a, b, c), *_ = np.linalg.lstsq(design, rhs, rcond=None)
    radius = float(np.sqrt(c + a * a + b * b))
    center = centroid + a * plane[0] + b * plane[1]
    in_plane = np.linalg.norm(local - np.array([a, b]), axis=1) - radius
    out_of_plane = (points - centroid) @ normal if points.shape[1] == 3 else np.zeros(len(points))
    return CircleFit(center, normal, radius, np.sqrt(in_plane ** 2 + out_of_plane ** 2))


@dataclass
class SingularSetModel:
    kind: str                   # point | curve | unclassified | raw
    nullity: Optional[int]
    points: np.ndarray          # the point, or the ordered polyline
    residuals: np.ndarray       # one per input record
    angles: np.ndarray          # tangent against record axis, radians in [0, pi/2]
    circle: Optional[CircleFit] = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def rms(self) -> float:
        return float(np.sqrt(np.mean(self.residuals ** 2))) if len(self.residuals) else 0.0

    @property
    def mean_angle(self) -> float:
        return float(np.mean(self.angles)) if len(self.angles) else 0.0


def _curve_model(records: Sequence[SingularPointRecord], locations: np.ndarray) -> SingularSetModel:
    count = len(locations)
    if count < 3:
        residuals = np.zeros(count)
        return SingularSetModel('curve', 1, locations.copy(), residuals, np.zeros(0))

    tree = cKDTree(locations)
    neighbors = min(count, 8)
    fitted = np.empty_like(locations)
    residuals = np.empty(count)
    angles = []
    for i, x in enumerate(locations):
        _, nearest = tree.query(x, k=neighbors)
        local = locations[np.atleast_1d(nearest)]
        centroid = local.mean(axis=0)
        _, _, vt = np.linalg.svd(local - centroid)
        tangent = vt[0]
        fitted[i] = centroid + ((x - centroid) @ tangent) * tangent
        residuals[i] = np.linalg.norm(x - fitted[i])
        axis = records[i].axis_vector()
        if axis is not None:
            angles.append(float(np.arccos(np.clip(abs(tangent @ axis), 0.0, 1.0))))

    centroid = fitted.mean(axis=0)
    _, _, vt = np.linalg.svd(fitted - centroid)
    planar = (fitted - centroid) @ vt[:2].T
    polar = np.arctan2(planar[:, 1], planar[:, 0])
    ordered = np.sort(polar)
    gaps = np.diff(np.concatenate([ordered, [ordered[0] + 2.0 * np.pi]]))
    closed = float(np.max(gaps)) < 0.5 * np.pi
    order = np.argsort(polar) if closed else np.argsort(planar[:, 0])

    circle = fit_circle(locations) if count >= 4 else None
    return SingularSetModel('curve', 1, fitted[order], residuals, np.asarray(angles), circle,
                            {'closed': closed})


def fit_singular_set(records: Sequence[SingularPointRecord]) -> SingularSetModel:
    """Point model for k=0 clusters, moving least squares polyline for k=1, raw otherwise"""
    if not records:
        raise ConfigError("fit_singular_set needs at least one record")
    locations = np.array([r.location for r in records])
    nullities = Counter(r.nullity for r in records)
    if len(nullities) > 1:
        logger.warning(f"Cluster mixes nullities {dict(nullities)}; left unclassified")
        return SingularSetModel('unclassified', None, locations, np.zeros(len(records)), np.zeros(0),
                                diagnostics={'nullities': dict(nullities)})
    k = next(iter(nullities))
    if k == 0:
        center = locations.mean(axis=0)
        return SingularSetModel('point', 0, center[None, :], np.linalg.norm(locations - center, axis=1),
                                np.zeros(0))
    if k == 1:
        return _curve_model(records, locations)
    return SingularSetModel('raw', k, locations, np.zeros(len(records)), np.zeros(0))


@dataclass
class SliceProfile:
    z: np.ndarray
    values: np.ndarray
    argmax: np.ndarray
    truncated: bool = False

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({'z': self.z, 'u_max': self.values})
        for i in range(self.argmax.shape[1] if self.argmax.ndim == 2 else 0):
            frame[f'argmax{i}'] = self.argmax[:, i]
        return frame


def slice_max_profile(u, p: Sequence[float], axis: Sequence[float], interval: Optional[Tuple[float, float]] = None,
                      radius: Optional[float] = None, samples: Optional[int] = None) -> SliceProfile:
    """z -> max of u over the disk of the given radius orthogonal to the axis at p + z a"""
    f = as_field(u)
    h = f.spacing
    p = np.asarray(p, dtype=float)
    a = np.asarray(axis, dtype=float).ravel()
    a = a / np.linalg.norm(a)
    radius = radius or SINGULAR_CONFIG['slice_radius_factor'] * h
    interval = interval or (-2.0 * radius, 2.0 * radius)
    count = samples or int(round((interval[1] - interval[0]) / h)) + 1
    disk = lattice_offsets(f.dim - 1, radius, 0.5 * h) @ tangent_frame(a)

    zs, values, argmax = [], [], []
    truncated = False
    for z in np.linspace(interval[0], interval[1], count):
        points = p + z * a + disk
        if not np.all(f.contains(points, h)):
            truncated = True
            continue
        sampled = np.atleast_1d(f.value_at(points))
        best = int(np.argmax(sampled))
        zs.append(z)
        values.append(float(sampled[best]))
        argmax.append(points[best])
    if truncated:
        logger.warning(f"Slice profile at {np.round(p, 4).tolist()} truncated by the box")
    return SliceProfile(np.asarray(zs), np.asarray(values), np.asarray(argmax).reshape(-1, f.dim), truncated)


@dataclass
class ModulusProfile:
    radii: List[float]
    deviations: List[float]
    samples: List[int]
    reconstructed: List[int]

    def at(self, radius: float) -> float:
        index = int(np.argmin(np.abs(np.asarray(self.radii) - radius)))
        return self.deviations[index]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'r': self.radii, 'modulus': self.deviations,
                             'samples': self.samples, 'reconstructed': self.reconstructed})


def _sample_hessian(f, x: np.ndarray, floor: float, stencil: str) -> Tuple[np.ndarray, bool]:
    if np.linalg.norm(f.gradient_at(x)) >= floor:
        try:
            return hessian_reconstruct(surface_geometry(f, x, floor)), True
        except (NearSingularError, MeanConvexityError, GridError):
            pass
    return _hessian(f, x, stencil), False


def hessian_continuity_modulus(u, p: Sequence[float], radii: Optional[Sequence[float]] = None,
                               hessian_p: Optional[np.ndarray] = None, grad_floor: Optional[float] = None,
                               max_samples: int = SINGULAR_CONFIG['modulus_max_samples'],
                               stencil: str = SINGULAR_CONFIG['hessian_stencil']) -> ModulusProfile:
    """max over sampled x in B_r(p) of ||Hess u(x) - Hess u(p)|| (operator 2-norm) per radius"""
    f = as_field(u)
    p = np.asarray(p, dtype=float)
    h = f.spacing
    radii = list(radii) if radii is not None else [c * h for c in SINGULAR_CONFIG['modulus_radii_factors']]
    floor = grad_floor or SURFACE_CONFIG['grad_floor_factor'] * h
    reference = _hessian(f, p, stencil) if hessian_p is None else np.asarray(hessian_p)

    deviations, counts, rebuilt = [], [], []
    for r in radii:
        points = ball_samples(u, p, r)
        if len(points) > max_samples:
            points = points[np.unique(np.linspace(0, len(points) - 1, max_samples).astype(int))]
        worst, used = 0.0, 0
        for x in points:
            hessian, reconstructed = _sample_hessian(f, x, floor, stencil)
            worst = max(worst, float(np.linalg.norm(hessian - reference, ord=2)))
            used += int(reconstructed)
        deviations.append(worst)
        counts.append(len(points))
        rebuilt.append(used)
    return ModulusProfile(radii, deviations, counts, rebuilt)


@dataclass
class SingularityReport:
    records: List[SingularPointRecord]
    clusters: List[List[SingularPointRecord]]
    models: List[SingularSetModel]
    dropped: int = 0

    def representatives(self) -> List[SingularPointRecord]:
        """Highest-valued record of each cluster"""
        return [max(cluster, key=lambda r: r.value) for cluster in self.clusters]

    def label_counts(self) -> dict:
        return dict(Counter(r.label for r in self.records))


class SingularityAnalyzer:
    """Detects, classifies and groups the singular points of an arrival field"""

    def __init__(self, config: Optional[AnalysisConfig] = None):
        self.config = config or AnalysisConfig()
        self.config.validate()
        self.logger = logging.getLogger(__name__)

    def _classify(self, u, p) -> Optional[SingularPointRecord]:
        try:
            return classify_singularity(u, p, self.config)
        except GridError as e:
            self.logger.warning(f"Candidate {np.round(p, 4).tolist()} skipped: {e}")
            return None

    def classify_all(self, u, candidates: Sequence[np.ndarray]) -> List[SingularPointRecord]:
        workers = self.config.threads or None
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda p: self._classify(u, p), candidates))
        return [r for r in results if r is not None]

    def run(self, u) -> SingularityReport:
        candidates = detect_critical_points(u, self.config)
        records = self.classify_all(u, candidates)
        records.sort(key=lambda r: tuple(np.round(r.location, 9)))
        clusters = cluster_records(records, as_field(u).spacing, self.config.cluster_factor)
        models = [fit_singular_set(cluster) for cluster in clusters]
        report = SingularityReport(records, clusters, models, len(candidates) - len(records))
        self.logger.info(f"Singular points: {len(records)} records in {len(clusters)} clusters "
                         f"{report.label_counts()}")
        return report
