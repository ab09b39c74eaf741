"""
Environment Configuration Loader for the level set laboratory
Loads environment variables from a .env file and provides typed access
"""

import os
from pathlib import Path
from typing import Optional
import logging

from core.config import ENV_PREFIX

# Try to load python-dotenv if available, otherwise use os.environ
try:
    from dotenv import load_dotenv
except ImportError:
    load_dotenv = None


class EnvironmentConfig:
    """Environment configuration manager"""

    def __init__(self, env_file: Optional[str] = None, prefix: str = ENV_PREFIX):
        """Initialize environment configuration"""
        self.prefix = prefix
        self._load_env_file(env_file or '.env')

    def _load_env_file(self, env_file: str):
        """Load .env file if it exists; existing variables win"""
        env_path = Path(env_file)
        if not env_path.exists():
            return
        if load_dotenv is None:
            logging.warning(f"python-dotenv not installed, ignoring {env_path}")
            return
        try:
            load_dotenv(env_path, override=False)
        except Exception as e:
            logging.warning(f"Could not load .env file: {e}")

    def key(self, name: str) -> str:
        """Prefixed variable name"""
        return f"{self.prefix}{name}"

    def get(self, name: str, default: Optional[str] = None) -> Optional[str]:
        """Get environment variable value"""
        return os.environ.get(self.key(name), default)

    def get_bool(self, name: str, default: bool = False) -> bool:
        """Get boolean environment variable"""
        value = self.get(name, str(default)).lower()
        return value in ('true', '1', 'yes', 'on', 'enabled')

    def get_int(self, name: str, default: int = 0) -> int:
        """Get integer environment variable"""
        try:
            return int(self.get(name, str(default)))
        except ValueError:
            return default

    def get_float(self, name: str, default: float = 0.0) -> float:
        """Get float environment variable"""
        try:
            return float(self.get(name, str(default)))
        except ValueError:
            return default

    def scenario_override(self, dotted_key: str) -> Optional[str]:
        """Raw override for a scenario key, e.g. evolve.t_max -> LEVELSET_EVOLVE_T_MAX"""
        return self.get(dotted_key.upper().replace('.', '_'))

    # Logging Configuration
    @property
    def log_level(self) -> str:
        """Get log level"""
        return self.get('LOG_LEVEL', 'INFO')

    @property
    def log_file(self) -> Optional[str]:
        """Get log file path (unset = console only)"""
        return self.get('LOG_FILE')

    # Output Configuration
    @property
    def output_dir(self) -> Optional[str]:
        """Default output directory overriding the scenario's"""
        return self.get('OUTPUT_DIR')

    @property
    def results_db_path(self) -> Optional[str]:
        """Run ledger path (unset = runs.db inside the output directory)"""
        return self.get('RESULTS_DB_PATH')

    # Compute Configuration
    @property
    def threads(self) -> int:
        """Worker threads for compiled kernels and per-candidate analyses (0 = library default)"""
        return self.get_int('THREADS', 0)

    @property
    def run_scenario_tests(self) -> bool:
        """Whether the slow full-scenario tests run"""
        return self.get_bool('RUN_SCENARIO_TESTS', False)

    def __repr__(self) -> str:
        """String representation of configuration"""
        return f"EnvironmentConfig(prefix={self.prefix}, log_level={self.log_level}, threads={self.threads})"


# Global instance
env_config = EnvironmentConfig()
