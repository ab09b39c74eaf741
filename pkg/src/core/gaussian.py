"""
Gaussian areas and entropy of level surfaces
F_{p,Lambda}(S) = int_S exp(-|x - p|^2 / 4 Lambda) / (4 pi Lambda)^{(n-1)/2}, its supremum over
centers and scales, closed forms for generalized cylinders and a monotonicity profile
"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.integrate import quad
from scipy.optimize import minimize
from scipy.special import gamma

from core.config import ENTROPY_SEARCH_DEFAULTS, SURFACE_CONFIG
from core.exceptions import ConfigError, LevelRangeError
from core.surface import LevelSurface, extract_level_set

logger = logging.getLogger(__name__)


def gaussian_area(surface: LevelSurface, p: Sequence[float], scale: float,
                  cutoff: float = SURFACE_CONFIG['gaussian_cutoff']) -> float:
    """Centroid-rule quadrature of the Gaussian-weighted area, truncated at cutoff * sqrt(scale)"""
    if scale <= 0:
        raise ConfigError(f"Gaussian scale must be positive, got {scale}")
    if surface.is_empty:
        return 0.0
    diff = surface.centroids - np.asarray(p, dtype=float)
    d2 = np.sum(diff * diff, axis=1)
    near = d2 <= cutoff * cutoff * scale
    weights = surface.areas[near] * np.exp(-d2[near] / (4.0 * scale))
    return float(np.sum(weights) / (4.0 * np.pi * scale) ** (0.5 * (surface.dim - 1)))


def _gaussian_area_scales(surface: LevelSurface, p: np.ndarray, scales: np.ndarray, cutoff: float) -> np.ndarray:
    diff = surface.centroids - p
    d2 = np.sum(diff * diff, axis=1)
    values = np.empty(len(scales))
    for i, scale in enumerate(scales):
        near = d2 <= cutoff * cutoff * scale
        values[i] = np.sum(surface.areas[near] * np.exp(-d2[near] / (4.0 * scale)))
        values[i] /= (4.0 * np.pi * scale) ** (0.5 * (surface.dim - 1))
    return values


def sphere_area(m: int) -> float:
    """Area of the unit sphere S^m"""
    return 2.0 * np.pi ** ((m + 1) / 2.0) / gamma((m + 1) / 2.0)


def cylinder_gaussian_closed_form(n: int, k: int, p: Sequence[float], scale: float) -> float:
    """F_{p,Lambda} of the self-shrinking cylinder S^{n-k-1}(sqrt(2(n-k-1))) x R^k

    The round factor lives in the first n-k coordinates; the planar factor integrates to 1.
    """
    if not 0 <= k <= n - 2:
        raise ConfigError(f"generalized cylinder needs 0 <= k <= n - 2, got n={n}, k={k}")
    if scale <= 0:
        raise ConfigError(f"Gaussian scale must be positive, got {scale}")
    m = n - k - 1
    rho = np.sqrt(2.0 * m)
    offset = float(np.linalg.norm(np.asarray(p, dtype=float)[:n - k]))
    prefactor = rho ** m * sphere_area(m - 1) / (4.0 * np.pi * scale) ** (0.5 * m)
    coupling = rho * offset / (2.0 * scale)

    def integrand(theta):
        return np.exp(-coupling * (1.0 - np.cos(theta))) * np.sin(theta) ** (m - 1)

    integral, _ = quad(integrand, 0.0, np.pi, epsabs=1e-13, epsrel=1e-12, limit=200)
    return float(prefactor * np.exp(-(rho - offset) ** 2 / (4.0 * scale)) * integral)


def cylinder_entropy(n: int, k: int) -> float:
    """Entropy of the shrinking generalized cylinder, attained at the centered unit scale"""
    return cylinder_gaussian_closed_form(n, k, np.zeros(n), 1.0)


def sphere_entropy(m: int) -> float:
    """Entropy of the shrinking round S^m in R^{m+1}"""
    return cylinder_entropy(m + 1, 0)


@dataclass
class EntropySearchCfg:
    """Coarse grid over centers x log-spaced scales, then Nelder-Mead refinement"""
    spacing: Optional[float] = None         # grid spacing; smallest scale is spacing^2
    min_scale: Optional[float] = None
    max_scale: Optional[float] = None
    center_points: int = ENTROPY_SEARCH_DEFAULTS['center_points']
    scale_points: int = ENTROPY_SEARCH_DEFAULTS['scale_points']
    dilation: float = ENTROPY_SEARCH_DEFAULTS['dilation']
    refine_seeds: int = ENTROPY_SEARCH_DEFAULTS['refine_seeds']
    xatol: float = ENTROPY_SEARCH_DEFAULTS['xatol']
    fatol: float = ENTROPY_SEARCH_DEFAULTS['fatol']
    max_iterations: int = ENTROPY_SEARCH_DEFAULTS['max_iterations']
    cutoff: float = SURFACE_CONFIG['gaussian_cutoff']


@dataclass
class EntropyResult:
    value: float
    center: np.ndarray
    scale: float
    samples: List[Tuple[np.ndarray, float, float]] = field(default_factory=list)

    def to_frame(self) -> pd.DataFrame:
        """One row per sample with columns p0..p{n-1}, Lambda, F"""
        if not self.samples:
            return pd.DataFrame(columns=['Lambda', 'F'])
        dim = len(self.samples[0][0])
        rows = [list(p) + [scale, value] for p, scale, value in self.samples]
        return pd.DataFrame(rows, columns=[f'p{i}' for i in range(dim)] + ['Lambda', 'F'])


def _scale_range(surface: LevelSurface, search: EntropySearchCfg, diagonal: float) -> Tuple[float, float]:
    if search.min_scale is not None:
        low = search.min_scale
    elif search.spacing is not None:
        low = search.spacing ** 2
    else:
        size = np.median(surface.areas) ** (1.0 / max(surface.dim - 1, 1))
        low = float(size) ** 2
    high = search.max_scale if search.max_scale is not None else diagonal ** 2
    return low, max(high, low * 10.0)


def entropy(surface: LevelSurface, search: Optional[EntropySearchCfg] = None) -> EntropyResult:
    """sup over (p, Lambda) of the Gaussian area, with every sample retained"""
    search = search or EntropySearchCfg()
    if surface.is_empty:
        return EntropyResult(0.0, np.zeros(surface.dim), float('nan'))

    lo = surface.vertices.min(axis=0)
    hi = surface.vertices.max(axis=0)
    middle = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo) * search.dilation
    diagonal = float(np.linalg.norm(hi - lo))
    low_scale, high_scale = _scale_range(surface, search, diagonal)
    scales = np.geomspace(low_scale, high_scale, search.scale_points)

    axes = [np.linspace(c - w, c + w, search.center_points) if w > 0 else np.array([c])
            for c, w in zip(middle, half)]
    samples: List[Tuple[np.ndarray, float, float]] = []
    for center in itertools.product(*axes):
        center = np.asarray(center)
        values = _gaussian_area_scales(surface, center, scales, search.cutoff)
        samples.extend((center, float(s), float(v)) for s, v in zip(scales, values))

    ranked = sorted(range(len(samples)), key=lambda i: -samples[i][2])
    seeds = [samples[i] for i in ranked[:search.refine_seeds]]
    log_low, log_high = np.log(low_scale), np.log(high_scale)

    def objective(x):
        log_scale = float(np.clip(x[-1], log_low, log_high))
        center = np.asarray(x[:-1], dtype=float)
        value = gaussian_area(surface, center, float(np.exp(log_scale)), search.cutoff)
        samples.append((center, float(np.exp(log_scale)), value))
        return -value

    for center, scale, _ in seeds:
        start = np.concatenate([center, [np.log(scale)]])
        minimize(objective, start, method='Nelder-Mead',
                 options={'xatol': search.xatol, 'fatol': search.fatol,
                          'maxiter': search.max_iterations})

    best = max(samples, key=lambda item: item[2])
    logger.debug(f"Entropy {best[2]:.6f} at p={np.round(best[0], 6).tolist()}, Lambda={best[1]:.6g} "
                 f"({len(samples)} samples)")
    return EntropyResult(best[2], best[0], best[1], samples)


def huisken_profile(u, p: Sequence[float], level: float, scale: float,
                    offsets: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    """s -> F_{p, scale - s}({u = level + s}) for the offsets that stay inside the flow"""
    used, values = [], []
    for s in offsets:
        if scale - s <= 0:
            break
        try:
            surface = extract_level_set(u, level + s)
        except LevelRangeError:
            break
        if surface.is_empty:
            break
        used.append(s)
        values.append(gaussian_area(surface, p, scale - s))
    return np.asarray(used), np.asarray(values)


def is_nonincreasing(values: Sequence[float], slack: float = 0.02) -> bool:
    values = np.asarray(values, dtype=float)
    return bool(np.all(values[1:] <= values[:-1] * (1.0 + slack)))
