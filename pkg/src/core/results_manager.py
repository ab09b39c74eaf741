"""
Run Ledger
Records every scenario run and its acceptance flags in a SQLite database
"""

import json
import logging
import os
import sqlite3
import uuid
from dataclasses import dataclass
from datetime import datetime
from typing import Any, Dict, List, Optional

import pandas as pd

from core.env_config import env_config


@dataclass
class RunRecord:
    """One scenario run"""
    run_id: str
    scenario: str
    config_path: str
    output_dir: str
    started_at: datetime
    completed_at: Optional[datetime]
    status: str  # RUNNING, COMPLETED, FLAGGED, FAILED
    extinction_time: Optional[float] = None
    records_found: int = 0
    message: Optional[str] = None


class RunLedger:
    def __init__(self, db_path: Optional[str] = None, output_dir: str = 'output'):
        """Open (and create) the ledger; defaults to runs.db inside the output directory"""
        self.db_path = db_path or env_config.results_db_path or os.path.join(output_dir, 'runs.db')
        self.logger = logging.getLogger(__name__)
        self._initialize_database()

    def _initialize_database(self):
        """Create the ledger tables if they don't exist"""
        try:
            directory = os.path.dirname(self.db_path)
            if directory:
                os.makedirs(directory, exist_ok=True)
            with sqlite3.connect(self.db_path) as conn:
                cursor = conn.cursor()
                cursor.execute("""
                    CREATE TABLE IF NOT EXISTS runs (
                        run_id TEXT PRIMARY KEY,
                        scenario TEXT,
                        config_path TEXT,
                        output_dir TEXT,
                        started_at TIMESTAMP,
                        completed_at TIMESTAMP,
                        status TEXT,
                        extinction_time REAL,
                        records_found INTEGER,
                        message TEXT
                    )
                """)
                cursor.execute("""
                    CREATE TABLE IF NOT EXISTS acceptance_flags (
                        id INTEGER PRIMARY KEY AUTOINCREMENT,
                        run_id TEXT,
                        flag TEXT,
                        passed BOOLEAN,
                        detail TEXT,  -- JSON
                        FOREIGN KEY (run_id) REFERENCES runs (run_id)
                    )
                """)
                cursor.execute("CREATE INDEX IF NOT EXISTS idx_flags_run ON acceptance_flags(run_id)")
                cursor.execute("CREATE INDEX IF NOT EXISTS idx_runs_scenario ON runs(scenario)")
                cursor.execute("""
                    CREATE VIEW IF NOT EXISTS flag_summary AS
                    SELECT
                        runs.scenario,
                        acceptance_flags.flag,
                        COUNT(*) as evaluations,
                        SUM(acceptance_flags.passed) as passed
                    FROM acceptance_flags JOIN runs ON runs.run_id = acceptance_flags.run_id
                    GROUP BY runs.scenario, acceptance_flags.flag
                """)
                conn.commit()
            self.logger.debug(f"Run ledger ready at {self.db_path}")
        except Exception as e:
            self.logger.error(f"Failed to initialize run ledger: {str(e)}")
            raise

    def start_run(self, scenario: str, config_path: str, output_dir: str) -> str:
        """Register a running scenario and return its run ID"""
        run_id = str(uuid.uuid4())
        try:
            with sqlite3.connect(self.db_path) as conn:
                conn.execute("""
                    INSERT INTO runs (run_id, scenario, config_path, output_dir, started_at, status, records_found)
                    VALUES (?, ?, ?, ?, ?, 'RUNNING', 0)
                """, (run_id, scenario, config_path, output_dir, datetime.now().isoformat()))
                conn.commit()
            self.logger.info(f"Started run {run_id} for scenario {scenario}")
            return run_id
        except Exception as e:
            self.logger.error(f"Failed to start run: {str(e)}")
            raise

    def complete_run(self, run_id: str, extinction_time: float, records_found: int,
                     flags: Dict[str, Dict[str, Any]]):
        """Store the outcome; any failing flag marks the run FLAGGED"""
        status = 'COMPLETED' if all(entry.get('passed') for entry in flags.values()) else 'FLAGGED'
        try:
            with sqlite3.connect(self.db_path) as conn:
                cursor = conn.cursor()
                cursor.execute("""
                    UPDATE runs
                    SET completed_at = ?, status = ?, extinction_time = ?, records_found = ?
                    WHERE run_id = ?
                """, (datetime.now().isoformat(), status, extinction_time, records_found, run_id))
                cursor.executemany("""
                    INSERT INTO acceptance_flags (run_id, flag, passed, detail)
                    VALUES (?, ?, ?, ?)
                """, [(run_id, name, bool(entry.get('passed')), json.dumps(entry.get('detail', {}), default=str))
                      for name, entry in flags.items()])
                conn.commit()
            self.logger.info(f"Run {run_id} {status.lower()}: {records_found} singular records")
            return status
        except Exception as e:
            self.logger.error(f"Failed to complete run: {str(e)}")
            raise

    def fail_run(self, run_id: str, error_message: str):
        """Mark a run as failed"""
        try:
            with sqlite3.connect(self.db_path) as conn:
                conn.execute("""
                    UPDATE runs SET completed_at = ?, status = 'FAILED', message = ?
                    WHERE run_id = ?
                """, (datetime.now().isoformat(), error_message, run_id))
                conn.commit()
            self.logger.error(f"Run {run_id} failed: {error_message}")
        except Exception as e:
            self.logger.error(f"Failed to mark run as failed: {str(e)}")
            raise

    def get_run(self, run_id: str) -> Optional[RunRecord]:
        try:
            with sqlite3.connect(self.db_path) as conn:
                row = conn.execute("""
                    SELECT run_id, scenario, config_path, output_dir, started_at, completed_at, status,
                           extinction_time, records_found, message
                    FROM runs WHERE run_id = ?
                """, (run_id,)).fetchone()
        except Exception as e:
            self.logger.error(f"Failed to read run {run_id}: {str(e)}")
            return None
        if row is None:
            return None
        started = datetime.fromisoformat(row[4])
        completed = datetime.fromisoformat(row[5]) if row[5] else None
        return RunRecord(row[0], row[1], row[2], row[3], started, completed, row[6], row[7], row[8], row[9])

    def get_run_history(self, limit: int = 50) -> List[Dict[str, Any]]:
        """Most recent runs first"""
        try:
            with sqlite3.connect(self.db_path) as conn:
                cursor = conn.cursor()
                cursor.execute("SELECT * FROM runs ORDER BY started_at DESC, rowid DESC LIMIT ?", (limit,))
                columns = [desc[0] for desc in cursor.description]
                return [dict(zip(columns, row)) for row in cursor.fetchall()]
        except Exception as e:
            self.logger.error(f"Failed to get run history: {str(e)}")
            return []

    def get_flags_for_run(self, run_id: str) -> Dict[str, bool]:
        try:
            with sqlite3.connect(self.db_path) as conn:
                rows = conn.execute("SELECT flag, passed FROM acceptance_flags WHERE run_id = ? ORDER BY id",
                                    (run_id,)).fetchall()
            return {flag: bool(passed) for flag, passed in rows}
        except Exception as e:
            self.logger.error(f"Failed to get flags for run {run_id}: {str(e)}")
            return {}

    def export_runs_to_csv(self, output_file: str) -> Optional[str]:
        """Export the run history to CSV"""
        history = self.get_run_history(limit=-1)
        if not history:
            self.logger.warning("No runs recorded yet")
            return None
        pd.DataFrame(history).to_csv(output_file, index=False)
        self.logger.info(f"Exported {len(history)} runs to {output_file}")
        return output_file
