"""
Run Report Generator
Writes the files a scenario run leaves behind: VTK fields and surfaces, the
singular point report, CSV tables, a JSON summary and optional HTML figures
"""

import json
import logging
import os
from datetime import datetime
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd

from core.field import ScalarField
from core.vtk_writer import write_polylines, write_structured_points, write_surface

try:
    import plotly.express as px
except ImportError:  # figures are optional
    px = None


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return str(value)


class RunReportWriter:
    """Emits the artifacts of one scenario run into an output directory"""

    def __init__(self, output_dir: str, plots: bool = False):
        self.output_dir = output_dir
        self.plots = plots
        self.logger = logging.getLogger(__name__)
        self.written: List[str] = []
        os.makedirs(output_dir, exist_ok=True)

    def path(self, name: str) -> str:
        return os.path.join(self.output_dir, name)

    def _track(self, path: str) -> str:
        self.written.append(path)
        self.logger.debug(f"Wrote {path}")
        return path

    # Fields and surfaces
    def write_field(self, field: ScalarField, name: str = 'arrival_time.vtk', title: Optional[str] = None) -> str:
        return self._track(write_structured_points(field, self.path(name), title))

    def write_snapshot(self, phi: ScalarField, step: int, t: float) -> str:
        name = f'snapshot_{step:06d}.vtk'
        return self._track(write_structured_points(phi, self.path(name), f'phi step={step} t={t!r}'))

    def write_level_surface(self, surface, name: str) -> str:
        return self._track(write_surface(surface, self.path(name)))

    def write_flowlines(self, lines: Iterable, name: str = 'flowlines.vtk') -> str:
        return self._track(write_polylines(list(lines), self.path(name)))

    # Singular points
    def write_records(self, records: Sequence, name: str = 'singular_points') -> List[str]:
        """Text blocks (one [singular_point] block per record) plus the same records as CSV"""
        text_path = self.path(f'{name}.txt')
        with open(text_path, 'w', encoding='utf-8') as fp:
            fp.write(f'# {len(records)} singular point records\n')
            for record in records:
                fp.write('\n' + record.to_block())
        paths = [self._track(text_path)]
        if records:
            paths.append(self.export_to_csv([r.to_dict() for r in records], self.path(f'{name}.csv')))
        return paths

    # Tables
    def export_to_csv(self, rows, filename: Optional[str] = None) -> str:
        """Export rows (list of dicts or a DataFrame) to CSV"""
        if not filename:
            timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
            filename = self.path(f"table_{timestamp}.csv")
        df = rows if isinstance(rows, pd.DataFrame) else pd.DataFrame(rows)
        df.to_csv(filename, index=False)
        return self._track(filename)

    def write_table(self, frame: pd.DataFrame, name: str) -> str:
        return self.export_to_csv(frame, self.path(name))

    def write_tagged_tables(self, frames: Dict[str, pd.DataFrame], name: str, tag: str = 'cluster') -> Optional[str]:
        """Concatenate per-key frames into one CSV with a leading tag column"""
        parts = []
        for key, frame in frames.items():
            tagged = frame.copy()
            tagged.insert(0, tag, key)
            parts.append(tagged)
        if not parts:
            return None
        return self.write_table(pd.concat(parts, ignore_index=True), name)

    def write_summary(self, summary: Dict[str, Any], name: str = 'summary.json') -> str:
        path = self.path(name)
        with open(path, 'w', encoding='utf-8') as fp:
            json.dump(summary, fp, indent=2, default=_jsonable)
        return self._track(path)

    # Figures
    def plot_profile(self, frame: pd.DataFrame, x: str, y: str, name: str, title: str,
                     color: Optional[str] = None, log_axes: bool = False) -> Optional[str]:
        """HTML line plot of a table; skipped unless plots are enabled and plotly is installed"""
        if not self.plots or frame.empty:
            return None
        if px is None:
            self.logger.warning("plotly is not installed, skipping figures")
            return None
        fig = px.line(frame, x=x, y=y, color=color, markers=True, title=title,
                      log_x=log_axes, log_y=log_axes)
        path = self.path(name)
        fig.write_html(path, include_plotlyjs='cdn')
        return self._track(path)
