"""
Initial shapes for the level set flow
Signed distance (negative inside) to analytic mean-convex boundaries and their composites
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq
from scipy.spatial import cKDTree

from core.exceptions import ShapeError
from core.field import FieldKind, GridSpec, ScalarField

logger = logging.getLogger(__name__)


class ShapeSpec:
    """Base class: a closed region given by its signed distance"""

    dim: Optional[int] = None

    def signed_distance(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def validate(self, dim: int):
        """Raise ShapeError when the parameters cannot describe a mean-convex boundary in R^dim"""
        if self.dim is not None and self.dim != dim:
            raise ShapeError(f"{self.describe()} lives in R^{self.dim}, grid is {dim}-dimensional")

    def describe(self) -> str:
        return type(self).__name__


@dataclass
class Sphere(ShapeSpec):
    center: Sequence[float]
    radius: float

    def signed_distance(self, points):
        return np.linalg.norm(points - np.asarray(self.center, dtype=float), axis=1) - self.radius

    def validate(self, dim):
        if len(self.center) != dim:
            raise ShapeError(f"sphere center {list(self.center)} does not match dimension {dim}")
        if self.radius <= 0:
            raise ShapeError(f"sphere radius must be positive, got {self.radius}")

    def describe(self):
        return f"sphere(center={list(self.center)}, R={self.radius})"


@dataclass
class CylinderSlab(ShapeSpec):
    """Round solid cylinder in R^3; infinite along ``axis`` unless ``half_length`` is given"""
    radius: float
    axis: int = 2
    center: Sequence[float] = (0.0, 0.0, 0.0)
    half_length: Optional[float] = None
    dim = 3

    def signed_distance(self, points):
        rel = points - np.asarray(self.center, dtype=float)
        along = rel[:, self.axis].copy()
        rel[:, self.axis] = 0.0
        radial = np.linalg.norm(rel, axis=1) - self.radius
        if self.half_length is None:
            return radial
        axial = np.abs(along) - self.half_length
        outside = np.hypot(np.maximum(radial, 0.0), np.maximum(axial, 0.0))
        return outside + np.minimum(np.maximum(radial, axial), 0.0)

    def validate(self, dim):
        super().validate(dim)
        if self.radius <= 0:
            raise ShapeError(f"cylinder radius must be positive, got {self.radius}")
        if not 0 <= self.axis < 3:
            raise ShapeError(f"cylinder axis must be 0, 1 or 2, got {self.axis}")
        if self.half_length is not None and self.half_length <= 0:
            raise ShapeError(f"cylinder half length must be positive, got {self.half_length}")

    def describe(self):
        length = 'infinite' if self.half_length is None else f"half_length={self.half_length}"
        return f"cylinder(axis={self.axis}, R={self.radius}, {length})"


@dataclass
class Torus(ShapeSpec):
    """Solid torus around the z axis"""
    major_radius: float
    minor_radius: float
    center: Sequence[float] = (0.0, 0.0, 0.0)
    dim = 3

    def signed_distance(self, points):
        rel = points - np.asarray(self.center, dtype=float)
        ring = np.hypot(rel[:, 0], rel[:, 1]) - self.major_radius
        return np.hypot(ring, rel[:, 2]) - self.minor_radius

    def validate(self, dim):
        super().validate(dim)
        if self.minor_radius <= 0 or self.major_radius <= 0:
            raise ShapeError("torus radii must be positive")
        # inner equator mean curvature 1/r - 1/(R - r)
        if self.major_radius <= 2.0 * self.minor_radius:
            raise ShapeError(f"torus R={self.major_radius}, r={self.minor_radius} is not mean-convex (needs R > 2r)")

    def describe(self):
        return f"torus(R={self.major_radius}, r={self.minor_radius})"


@dataclass
class Dumbbell(ShapeSpec):
    """Two balls joined by a neck, rotationally symmetric about the x axis

    The neck profile is rho(x) = a cosh(x / b); it meets each bulb tangentially.
    The neck is mean-convex exactly when b > a.
    """
    bulb_separation: float
    bulb_radius: float
    neck_radius: float
    center: Sequence[float] = (0.0, 0.0, 0.0)
    profile_samples: int = 20000
    dim = 3
    _profile: Optional[Tuple[float, float]] = field(default=None, init=False, repr=False)
    _tree: Optional[cKDTree] = field(default=None, init=False, repr=False)

    def _junction(self, b: float) -> float:
        """Axial position where the neck meets a bulb of the configured radius"""
        a, radius = self.neck_radius, self.bulb_radius

        def mismatch(x):
            slope = (a / b) * np.sinh(x / b)
            return a * np.cosh(x / b) * np.sqrt(1.0 + slope * slope) - radius

        hi = b
        while mismatch(hi) < 0:
            hi *= 2.0
        return brentq(mismatch, 0.0, hi, xtol=1e-14)

    def _separation(self, b: float) -> float:
        x = self._junction(b)
        rho = self.neck_radius * np.cosh(x / b)
        slope = (self.neck_radius / b) * np.sinh(x / b)
        return x + rho * slope

    def solve_profile(self) -> Tuple[float, float]:
        """(b, junction) reproducing the configured bulb separation"""
        if self._profile is not None:
            return self._profile
        a, radius, c = self.neck_radius, self.bulb_radius, self.bulb_separation
        if a <= 0 or radius <= 0 or c <= 0:
            raise ShapeError("dumbbell radii and separation must be positive")
        if a >= radius:
            raise ShapeError(f"neck radius {a} must be smaller than bulb radius {radius}")
        b_lo = a * (1.0 + 1e-9)
        residual_lo = self._separation(b_lo) - c
        if residual_lo >= 0:
            raise ShapeError(f"bulbs at separation {c} are too close for a mean-convex neck of radius {a}")
        b_hi = 2.0 * a
        while self._separation(b_hi) < c:
            b_hi *= 2.0
            if b_hi > 1e3 * (c + radius):
                raise ShapeError(f"no neck profile reaches separation {c}")
        b = brentq(lambda s: self._separation(s) - c, b_lo, b_hi, xtol=1e-14)
        self._profile = (b, self._junction(b))
        logger.debug(f"Dumbbell profile: b={b:.6f}, junction={self._profile[1]:.6f}")
        return self._profile

    def profile_radius(self, x: np.ndarray) -> np.ndarray:
        """Radius of the solid at axial offset x (0 outside its axial extent)"""
        b, junction = self.solve_profile()
        c, radius = self.bulb_separation, self.bulb_radius
        ax = np.abs(np.asarray(x, dtype=float))
        neck = self.neck_radius * np.cosh(np.minimum(ax, junction) / b)
        bulb = np.sqrt(np.clip(radius * radius - (ax - c) ** 2, 0.0, None))
        return np.where(ax <= junction, neck, bulb)

    def _profile_tree(self) -> cKDTree:
        if self._tree is None:
            b, junction = self.solve_profile()
            c, radius = self.bulb_separation, self.bulb_radius
            half = self.profile_samples // 2
            neck_x = np.linspace(0.0, junction, half)
            theta_j = np.arctan2(self.neck_radius * np.cosh(junction / b), junction - c)
            theta = np.linspace(theta_j, 0.0, half)
            bulb_x = c + radius * np.cos(theta)
            bulb_r = radius * np.sin(theta)
            xs = np.concatenate([neck_x, bulb_x])
            rs = np.concatenate([self.neck_radius * np.cosh(neck_x / b), bulb_r])
            curve = np.column_stack([np.concatenate([-xs[::-1], xs]), np.concatenate([rs[::-1], rs])])
            self._tree = cKDTree(curve)
        return self._tree

    def signed_distance(self, points):
        rel = points - np.asarray(self.center, dtype=float)
        axial = rel[:, 0]
        radial = np.hypot(rel[:, 1], rel[:, 2])
        distance, _ = self._profile_tree().query(np.column_stack([axial, radial]))
        inside = (np.abs(axial) < self.bulb_separation + self.bulb_radius) & (radial < self.profile_radius(axial))
        return np.where(inside, -distance, distance)

    def validate(self, dim):
        super().validate(dim)
        self.solve_profile()

    def describe(self):
        return (f"dumbbell(separation={self.bulb_separation}, R={self.bulb_radius}, "
                f"neck={self.neck_radius})")


@dataclass
class Union(ShapeSpec):
    shapes: Sequence[ShapeSpec]

    def signed_distance(self, points):
        return np.min([s.signed_distance(points) for s in self.shapes], axis=0)

    def validate(self, dim):
        if not self.shapes:
            raise ShapeError("union of no shapes is empty")
        for s in self.shapes:
            s.validate(dim)

    def describe(self):
        return 'union(' + ', '.join(s.describe() for s in self.shapes) + ')'


@dataclass
class Intersection(ShapeSpec):
    shapes: Sequence[ShapeSpec]

    def signed_distance(self, points):
        return np.max([s.signed_distance(points) for s in self.shapes], axis=0)

    def validate(self, dim):
        if not self.shapes:
            raise ShapeError("intersection of no shapes is undefined")
        for s in self.shapes:
            s.validate(dim)

    def describe(self):
        return 'intersection(' + ', '.join(s.describe() for s in self.shapes) + ')'


@dataclass
class Offset(ShapeSpec):
    """Grow (delta > 0) or shrink (delta < 0) a shape"""
    shape: ShapeSpec
    delta: float

    def signed_distance(self, points):
        return self.shape.signed_distance(points) - self.delta

    def validate(self, dim):
        self.shape.validate(dim)

    def describe(self):
        return f"offset({self.shape.describe()}, {self.delta})"


@dataclass
class SmoothUnion(ShapeSpec):
    """Polynomial smooth minimum of the member distances"""
    shapes: Sequence[ShapeSpec]
    blend: float

    def signed_distance(self, points):
        result = self.shapes[0].signed_distance(points)
        k = self.blend
        for s in self.shapes[1:]:
            other = s.signed_distance(points)
            mix = np.clip(0.5 + 0.5 * (other - result) / k, 0.0, 1.0)
            result = other * (1.0 - mix) + result * mix - k * mix * (1.0 - mix)
        return result

    def validate(self, dim):
        if not self.shapes:
            raise ShapeError("smooth union of no shapes is empty")
        if self.blend <= 0:
            raise ShapeError(f"blend radius must be positive, got {self.blend}")
        for s in self.shapes:
            s.validate(dim)

    def describe(self):
        return f"smooth_union(k={self.blend}; " + ', '.join(s.describe() for s in self.shapes) + ')'


def signed_distance_init(shape: ShapeSpec, grid: GridSpec) -> ScalarField:
    """Signed distance to the shape boundary sampled on the grid, negative inside"""
    shape.validate(grid.dim)
    points = grid.coordinates().reshape(-1, grid.dim)
    values = shape.signed_distance(points)
    if not np.any(values < 0):
        raise ShapeError(f"{shape.describe()} has no grid sample inside it")
    if not np.any(values > 0):
        raise ShapeError(f"{shape.describe()} covers the whole box; its boundary is not resolved")
    logger.debug(f"Signed distance for {shape.describe()}: {np.sum(values < 0)} inside samples")
    return ScalarField(grid, values, FieldKind.SIGNED_DISTANCE)
