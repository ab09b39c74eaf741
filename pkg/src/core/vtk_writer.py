"""
Legacy VTK text output
Structured points for grid fields, polydata for level surfaces and flowlines.
The exact byte layout is documented in docs/file_formats.md
"""

import logging
from typing import Iterable, Optional, Sequence

import numpy as np

from core.exceptions import GridError
from core.field import FieldKind, GridSpec, ScalarField

logger = logging.getLogger(__name__)

VTK_HEADER = '# vtk DataFile Version 3.0'


def _number(value: float) -> str:
    return repr(float(value))


def structured_points_text(field: ScalarField, title: Optional[str] = None, name: str = 'u') -> str:
    """Render a field as DATASET STRUCTURED_POINTS with one scalar attribute"""
    grid = field.grid
    dims = list(grid.cells) + [1] * (3 - grid.dim)
    origin = [lo + 0.5 * grid.spacing for lo in grid.lower] + [0.0] * (3 - grid.dim)
    spacing = [grid.spacing] * 3
    # VTK runs x fastest, i.e. Fortran order over (i, j, k)
    values = np.asarray(field.values).ravel(order='F')
    lines = [
        VTK_HEADER,
        title or f"{field.kind.value} field",
        'ASCII',
        'DATASET STRUCTURED_POINTS',
        'DIMENSIONS ' + ' '.join(str(d) for d in dims),
        'ORIGIN ' + ' '.join(_number(v) for v in origin),
        'SPACING ' + ' '.join(_number(v) for v in spacing),
        f'POINT_DATA {values.size}',
        f'SCALARS {name} double 1',
        'LOOKUP_TABLE default',
    ]
    lines.extend(_number(v) for v in values)
    return '\n'.join(lines) + '\n'


def write_structured_points(field: ScalarField, path: str, title: Optional[str] = None) -> str:
    with open(path, 'w', encoding='ascii') as fp:
        fp.write(structured_points_text(field, title))
    logger.debug(f"Wrote structured points to {path}")
    return path


def read_structured_points(path: str, kind: FieldKind = FieldKind.ARRIVAL_TIME) -> ScalarField:
    """Read back a file produced by write_structured_points"""
    with open(path, 'r', encoding='ascii') as fp:
        lines = [line.strip() for line in fp]
    if not lines or lines[0] != VTK_HEADER or lines[3] != 'DATASET STRUCTURED_POINTS':
        raise GridError(f"{path} is not a structured points file")
    dims = [int(v) for v in lines[4].split()[1:]]
    origin = [float(v) for v in lines[5].split()[1:]]
    spacing = float(lines[6].split()[1])
    count = int(lines[7].split()[1])
    values = np.array([float(v) for v in lines[10:10 + count]])
    dim = 3 if dims[2] > 1 else 2
    cells = dims[:dim]
    lower = [o - 0.5 * spacing for o in origin[:dim]]
    upper = [lo + c * spacing for lo, c in zip(lower, cells)]
    grid = GridSpec(tuple(lower), tuple(upper), tuple(cells))
    return ScalarField(grid, values.reshape(cells, order='F'), kind)


def _padded3(points: np.ndarray) -> np.ndarray:
    points = np.atleast_2d(points)
    if points.shape[1] == 3:
        return points
    return np.column_stack([points, np.zeros((len(points), 3 - points.shape[1]))])


def polydata_text(points: np.ndarray, cells: Sequence[Sequence[int]], cell_kind: str,
                  title: str, point_scalars: Optional[dict] = None) -> str:
    """POLYDATA with LINES or POLYGONS and optional point scalars"""
    pts = _padded3(np.asarray(points, dtype=float))
    total = sum(len(c) + 1 for c in cells)
    lines = [
        VTK_HEADER,
        title,
        'ASCII',
        'DATASET POLYDATA',
        f'POINTS {len(pts)} double',
    ]
    lines.extend(' '.join(_number(v) for v in p) for p in pts)
    lines.append(f'{cell_kind} {len(cells)} {total}')
    lines.extend(' '.join(str(int(v)) for v in [len(c)] + list(c)) for c in cells)
    if point_scalars:
        lines.append(f'POINT_DATA {len(pts)}')
        for name, values in point_scalars.items():
            lines.append(f'SCALARS {name} double 1')
            lines.append('LOOKUP_TABLE default')
            lines.extend(_number(v) for v in values)
    return '\n'.join(lines) + '\n'


def write_surface(surface, path: str) -> str:
    """Level surface as polygons (n=3) or line segments (n=2)"""
    kind = 'POLYGONS' if surface.dim == 3 else 'LINES'
    text = polydata_text(surface.vertices, surface.elements.tolist(), kind,
                         f'level set u={surface.level!r}')
    with open(path, 'w', encoding='ascii') as fp:
        fp.write(text)
    logger.debug(f"Wrote level surface with {len(surface.elements)} elements to {path}")
    return path


def write_polylines(lines: Iterable, path: str, title: str = 'flowlines') -> str:
    """Flowlines as one polyline each, with u and |grad u| as point data"""
    points, cells, values, norms = [], [], [], []
    offset = 0
    for line in lines:
        count = len(line.points)
        points.append(line.points)
        cells.append(list(range(offset, offset + count)))
        values.append(line.values)
        norms.append(line.grad_norms)
        offset += count
    if not points:
        pts = np.zeros((0, 3))
        scalars = None
    else:
        pts = np.vstack(points)
        scalars = {'u': np.concatenate(values), 'grad_norm': np.concatenate(norms)}
    with open(path, 'w', encoding='ascii') as fp:
        fp.write(polydata_text(pts, cells, 'LINES', title, scalars))
    return path
