"""
Utility functions for the level set laboratory
Logging setup, small linear algebra helpers and sampling patterns
"""

import logging
import os
from typing import List, Optional, Tuple

import numpy as np


def setup_logging(level: str = 'INFO', log_file: Optional[str] = None) -> logging.Logger:
    """Setup logging configuration"""
    handlers: List[logging.Handler] = [logging.StreamHandler()]
    if log_file:
        log_dir = os.path.dirname(log_file)
        if log_dir:
            os.makedirs(log_dir, exist_ok=True)
        handlers.append(logging.FileHandler(log_file, encoding='utf-8'))

    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S',
        handlers=handlers,
        force=True
    )
    return logging.getLogger(__name__)


def symmetrize(matrix: np.ndarray) -> np.ndarray:
    """Return the symmetric part of a square matrix"""
    matrix = np.asarray(matrix, dtype=float)
    return 0.5 * (matrix + matrix.T)


def eigen_sorted(matrix: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Eigenvalues ascending and orthonormal eigenvectors (as columns) of a symmetric matrix"""
    values, vectors = np.linalg.eigh(symmetrize(matrix))
    order = np.argsort(values, kind='stable')
    return values[order], vectors[:, order]


def tangent_frame(normal: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the hyperplane orthogonal to ``normal``, one vector per row"""
    normal = np.asarray(normal, dtype=float)
    normal = normal / np.linalg.norm(normal)
    n = normal.size
    # Householder reflection mapping e_0 to the normal; its other columns span the complement
    e0 = np.zeros(n)
    e0[0] = 1.0
    v = e0 - normal if normal[0] < 0 else e0 + normal
    reflector = np.eye(n) - 2.0 * np.outer(v, v) / np.dot(v, v)
    return reflector[:, 1:].T.copy()


def dyadic_radii(r0: float, count: int) -> List[float]:
    """Radii r0, r0/2, r0/4, ... (count values)"""
    return [float(r0) * 2.0 ** (-j) for j in range(count)]


def sphere_directions(dim: int, count: int) -> np.ndarray:
    """Deterministic, roughly uniform unit vectors on S^{dim-1}"""
    if dim == 2:
        angles = 2.0 * np.pi * np.arange(count) / count
        return np.column_stack([np.cos(angles), np.sin(angles)])
    if dim == 3:
        # Fibonacci lattice
        k = np.arange(count) + 0.5
        z = 1.0 - 2.0 * k / count
        radius = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
        theta = np.pi * (1.0 + 5.0 ** 0.5) * k
        return np.column_stack([radius * np.cos(theta), radius * np.sin(theta), z])
    # General dimension: signed coordinate axes and diagonals
    axes = np.eye(dim)
    diagonals = np.array([[1.0 if (i >> j) & 1 else -1.0 for j in range(dim)] for i in range(2 ** dim)])
    directions = np.vstack([axes, -axes, diagonals / np.sqrt(dim)])
    return directions[:count] if count < len(directions) else directions


def lattice_offsets(dim: int, radius: float, spacing: float) -> np.ndarray:
    """Points of the lattice spacing*Z^dim inside the closed ball of the given radius"""
    steps = int(np.floor(radius / spacing))
    axis = np.arange(-steps, steps + 1) * spacing
    mesh = np.stack(np.meshgrid(*([axis] * dim), indexing='ij'), axis=-1).reshape(-1, dim)
    return mesh[np.sum(mesh * mesh, axis=1) <= radius * radius + 1e-12]


def quadratic_design(offsets: np.ndarray) -> np.ndarray:
    """Design matrix with columns 1, x_i, x_i*x_j (i <= j) for least squares quadratic fits"""
    offsets = np.atleast_2d(offsets)
    dim = offsets.shape[1]
    columns = [np.ones(len(offsets))]
    columns.extend(offsets[:, i] for i in range(dim))
    for i in range(dim):
        for j in range(i, dim):
            columns.append(offsets[:, i] * offsets[:, j])
    return np.column_stack(columns)


def quadratic_parts(coefficients: np.ndarray, dim: int) -> Tuple[float, np.ndarray, np.ndarray]:
    """Split quadratic fit coefficients into (constant, gradient, Hessian)"""
    constant = float(coefficients[0])
    gradient = np.asarray(coefficients[1:dim + 1], dtype=float)
    hessian = np.zeros((dim, dim))
    index = dim + 1
    for i in range(dim):
        for j in range(i, dim):
            if i == j:
                hessian[i, i] = 2.0 * coefficients[index]
            else:
                hessian[i, j] = hessian[j, i] = coefficients[index]
            index += 1
    return constant, gradient, hessian


def format_duration(seconds: float) -> str:
    """Format a wall-clock duration into human readable form"""
    if seconds < 60:
        return f"{seconds:.1f} seconds"
    elif seconds < 3600:
        minutes = seconds / 60
        return f"{minutes:.1f} minutes"
    else:
        hours = seconds / 3600
        return f"{hours:.2f} hours"
