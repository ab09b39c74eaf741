#!/usr/bin/env python3
"""
Run ledger tests against a throwaway SQLite database
"""

import os
import sys

import pandas as pd
import pytest

# Add src to path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'src'))

from core.results_manager import RunLedger


@pytest.fixture
def ledger(tmp_path):
    return RunLedger(db_path=str(tmp_path / 'ledger' / 'runs.db'))


def test_database_is_created(ledger):
    assert os.path.exists(ledger.db_path)
    assert ledger.get_run_history() == []
    assert ledger.get_run('missing') is None


def test_completed_run(ledger):
    run_id = ledger.start_run('sphere2d', 'scenarios/sphere2d.cfg', 'output/sphere2d')
    assert ledger.get_run(run_id).status == 'RUNNING'

    flags = {'sweep_coverage': {'passed': True, 'detail': {'coverage': 1.0}},
             'expected_classification': {'passed': True, 'detail': {'label': 'Round'}}}
    assert ledger.complete_run(run_id, 0.32, 1, flags) == 'COMPLETED'
    run = ledger.get_run(run_id)
    assert run.status == 'COMPLETED'
    assert run.extinction_time == pytest.approx(0.32)
    assert run.records_found == 1
    assert run.completed_at >= run.started_at
    assert ledger.get_flags_for_run(run_id) == {'sweep_coverage': True, 'expected_classification': True}


def test_failed_flag_marks_run(ledger):
    run_id = ledger.start_run('dumbbell3d', 'dumbbell3d.cfg', 'out')
    flags = {'expected_verdict': {'passed': False, 'detail': {'verdict': 'TypeI(0.71)'}}}
    assert ledger.complete_run(run_id, 0.05, 12, flags) == 'FLAGGED'
    assert ledger.get_flags_for_run(run_id) == {'expected_verdict': False}


def test_failed_run_keeps_message(ledger):
    run_id = ledger.start_run('torus3d', 'torus3d.cfg', 'out')
    ledger.fail_run(run_id, 'spacing must be equal on all axes')
    run = ledger.get_run(run_id)
    assert run.status == 'FAILED'
    assert run.message == 'spacing must be equal on all axes'


def test_history_and_export(ledger, tmp_path):
    first = ledger.start_run('sphere2d', 'a.cfg', 'out')
    second = ledger.start_run('cylinder3d', 'b.cfg', 'out')
    history = ledger.get_run_history()
    assert [row['run_id'] for row in history] == [second, first]
    assert len(ledger.get_run_history(limit=1)) == 1

    path = ledger.export_runs_to_csv(str(tmp_path / 'runs.csv'))
    frame = pd.read_csv(path)
    assert set(frame['scenario']) == {'sphere2d', 'cylinder3d'}
