#!/usr/bin/env python3
"""
Run artifact tests: record blocks, CSV tables and the JSON summary
"""

import json
import os
import sys

import numpy as np
import pandas as pd

# Add src to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from analysis.flowlines import trace_flowline
from analysis.singular import classify_singularity
from core.field import AnalyticField, GridSpec, sample_sphere_arrival
from core.report_generator import RunReportWriter
from core.surface import circle_surface


def test_records_are_written_as_blocks_and_csv(tmp_path):
    writer = RunReportWriter(str(tmp_path / 'run'))
    field = AnalyticField.sphere(3, 1.0)
    records = [classify_singularity(field, np.zeros(3)), classify_singularity(field, np.array([0.01, 0.0, 0.0]))]
    text_path, csv_path = writer.write_records(records)

    with open(text_path, encoding='utf-8') as fp:
        text = fp.read()
    assert text.count('[singular_point]') == 2
    assert 'classification = Round' in text
    frame = pd.read_csv(csv_path)
    assert list(frame['classification']) == ['Round', 'Round']
    assert {'x0', 'x1', 'x2', 'value', 'nullity'} <= set(frame.columns)
    assert writer.written == [text_path, csv_path]


def test_empty_record_list_still_writes_report(tmp_path):
    writer = RunReportWriter(str(tmp_path))
    paths = writer.write_records([])
    assert len(paths) == 1
    with open(paths[0], encoding='utf-8') as fp:
        assert fp.read().startswith('# 0 singular point records')


def test_tables_and_summary(tmp_path):
    writer = RunReportWriter(str(tmp_path))
    frames = {0: pd.DataFrame({'r': [0.2, 0.1], 's': [0.71, 0.70]}),
              1: pd.DataFrame({'r': [0.2, 0.1], 's': [0.72, 0.71]})}
    path = writer.write_tagged_tables(frames, 'lojasiewicz.csv')
    table = pd.read_csv(path)
    assert list(table.columns) == ['cluster', 'r', 's']
    assert list(table['cluster']) == [0, 0, 1, 1]
    assert writer.write_tagged_tables({}, 'empty.csv') is None

    stamped = writer.export_to_csv([{'a': 1}])
    assert os.path.basename(stamped).startswith('table_')

    summary = writer.write_summary({'location': np.array([0.0, 1.0]), 'value': np.float64(0.25),
                                    'passed': np.bool_(True)})
    with open(summary, encoding='utf-8') as fp:
        data = json.load(fp)
    assert data == {'location': [0.0, 1.0], 'value': 0.25, 'passed': True}


def test_vtk_artifacts(tmp_path):
    writer = RunReportWriter(str(tmp_path))
    u = sample_sphere_arrival(GridSpec((-1.0, -1.0), (1.0, 1.0), (32, 32)), 0.8)
    field_path = writer.write_field(u, title='disk')
    snapshot = writer.write_snapshot(u, 40, 0.01)
    assert os.path.basename(snapshot) == 'snapshot_000040.vtk'
    line = trace_flowline(AnalyticField.sphere(2, 1.0), (0.5, 0.0))
    lines_path = writer.write_flowlines([line])
    surface_path = writer.write_level_surface(circle_surface(0.5, segments=64), 'level_0.10.vtk')
    with open(surface_path, encoding='utf-8') as fp:
        assert 'LINES 64 192' in fp.read()
    for path in (field_path, snapshot, lines_path, surface_path):
        with open(path, encoding='utf-8') as fp:
            assert fp.readline().startswith('# vtk DataFile')
    # figures are off unless requested
    assert writer.plot_profile(pd.DataFrame({'z': [0.0], 'u_max': [1.0]}), 'z', 'u_max', 'p.html', 'p') is None
