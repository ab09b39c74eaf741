"""
Lojasiewicz analysis of singular points
Measures s_j = sup |u - u(p)|^{1/2} / |grad u| over dyadic shells r_j / 2 < |x - p| <= r_j
around a critical point and decides between a type I and a type II singularity
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd

from core.config import SINGULAR_CONFIG
from core.evolve import arrival_noise
from core.exceptions import ConfigError
from core.field import ScalarField, as_field, ball_samples
from core.utils import dyadic_radii

logger = logging.getLogger(__name__)


class Verdict(Enum):
    TYPE_I = 'TypeI'
    TYPE_II = 'TypeII'
    INDETERMINATE = 'Indeterminate'


@dataclass
class LojasiewiczConfig:
    """Radii default to r0 = 32h halved three times; u_floor defaults to 0.05 h^2,
    calibrated_u_floor raises it to the noise level of a computed field"""
    r0: Optional[float] = None
    levels: int = SINGULAR_CONFIG['lojasiewicz_levels']
    u_floor: Optional[float] = None
    stability_factor: float = SINGULAR_CONFIG['stability_factor']
    divergence_factor: float = SINGULAR_CONFIG['divergence_factor']
    min_samples: int = SINGULAR_CONFIG['min_samples']

    def radii(self, h: float) -> List[float]:
        r0 = self.r0 if self.r0 else SINGULAR_CONFIG['lojasiewicz_r0_factor'] * h
        return dyadic_radii(r0, self.levels)

    def floor(self, h: float) -> float:
        return self.u_floor if self.u_floor is not None else SINGULAR_CONFIG['u_floor_factor'] * h * h

    def validate(self):
        if self.u_floor is not None and self.u_floor <= 0.0:
            raise ConfigError(f"u_floor must be positive, got {self.u_floor}")
        if self.levels < 2:
            raise ConfigError(f"at least two dyadic levels are needed, got {self.levels}")


def calibrated_u_floor(u: ScalarField) -> float:
    """max(noise factor * arrival time noise, 0.05 h^2); the noise comes from the level set residual"""
    h = u.spacing
    noise = arrival_noise(u)
    u_floor = max(SINGULAR_CONFIG['u_floor_noise_factor'] * noise, SINGULAR_CONFIG['u_floor_factor'] * h * h)
    logger.info(f"u_floor calibrated to {u_floor:.3e} (noise {noise:.3e}, h^2 = {h * h:.3e})")
    return u_floor


@dataclass
class LojasiewiczReport:
    center: np.ndarray
    center_value: float
    radii: List[float]
    sups: List[float]                  # NaN where the radius was skipped
    sample_counts: List[int]
    skipped: List[float] = field(default_factory=list)
    beta: float = float('nan')
    verdict: Verdict = Verdict.INDETERMINATE
    ratios: List[float] = field(default_factory=list)

    @property
    def label(self) -> str:
        if self.verdict is Verdict.TYPE_I:
            return f"TypeI({self.beta:.4f})"
        return self.verdict.value

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            'r': self.radii,
            's': self.sups,
            'samples': self.sample_counts,
            'skipped': [r in self.skipped for r in self.radii],
        })


def lojasiewicz_sup(u, p: Sequence[float], radius: float, center_value: float, u_floor: float,
                    inner: float = 0.0):
    """(sup of |u - u(p)|^{1/2} / |grad u| over admissible samples with inner < |x - p| <= radius, sample count)"""
    f = as_field(u)
    points = ball_samples(u, p, radius)
    if inner > 0.0 and len(points):
        points = points[np.linalg.norm(points - np.asarray(p, dtype=float), axis=1) > inner]
    if len(points) == 0:
        return float('nan'), 0
    drop = np.abs(np.atleast_1d(f.value_at(points)) - center_value)
    grad = np.linalg.norm(np.atleast_2d(f.gradient_at(points)), axis=1)
    # the plateau |u - u(p)| < u_floor stands in for the singular set itself
    admissible = (drop >= u_floor) & (grad > 0.0)
    count = int(np.count_nonzero(admissible))
    if count == 0:
        return float('nan'), 0
    return float(np.max(np.sqrt(drop[admissible]) / grad[admissible])), count


def _verdict(sups: List[float], cfg: LojasiewiczConfig):
    valid = [s for s in sups if np.isfinite(s)]
    if len(valid) < 3:
        return Verdict.INDETERMINATE, float('nan'), []
    ratios = [b / a for a, b in zip(valid[:-1], valid[1:]) if a > 0]
    last = ratios[-2:]
    if len(last) == 2 and all(r >= cfg.divergence_factor for r in last):
        return Verdict.TYPE_II, float('nan'), ratios
    if max(valid[-3:]) <= cfg.stability_factor * float(np.median(valid)):
        return Verdict.TYPE_I, float(max(valid)), ratios
    return Verdict.INDETERMINATE, float('nan'), ratios


def lojasiewicz_analyze(u, p: Sequence[float], cfg: Optional[LojasiewiczConfig] = None,
                        center_value: Optional[float] = None) -> LojasiewiczReport:
    """Per-shell Lojasiewicz suprema on dyadic radii and the resulting type verdict"""
    cfg = cfg or LojasiewiczConfig()
    cfg.validate()
    f = as_field(u)
    p = np.asarray(p, dtype=float)
    h = f.spacing
    value = float(f.value_at(p)) if center_value is None else float(center_value)
    u_floor = cfg.floor(h)
    radii = cfg.radii(h)

    sups, counts, skipped = [], [], []
    # shell j: r_j / 2 < |x - p| <= r_j
    for r in radii:
        s, count = lojasiewicz_sup(u, p, r, value, u_floor, inner=0.5 * r)
        if count < cfg.min_samples:
            logger.warning(f"Lojasiewicz radius {r:.4g} at {np.round(p, 4).tolist()} has {count} "
                           f"admissible samples, skipped")
            skipped.append(r)
            s = float('nan')
        sups.append(s)
        counts.append(count)

    verdict, beta, ratios = _verdict(sups, cfg)
    report = LojasiewiczReport(p, value, radii, sups, counts, skipped, beta, verdict, ratios)
    logger.debug(f"Lojasiewicz at {np.round(p, 4).tolist()}: s={np.round(sups, 4).tolist()} -> {report.label}")
    return report


def saddle_type_one(record, report: LojasiewiczReport) -> bool:
    """A saddle that passes as type I contradicts the saddle theorem; flag it"""
    contradiction = bool(record.is_saddle and report.verdict is Verdict.TYPE_I)
    if contradiction:
        logger.warning(f"Saddle at {np.round(record.location, 4).tolist()} measured as {report.label}")
    return contradiction
