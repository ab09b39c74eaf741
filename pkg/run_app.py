#!/usr/bin/env python3
"""
Level Set Laboratory - Runner
Run this script to execute the command line application with src/ on the path
"""

import subprocess
import sys
import os

def main():
    # Set up the environment
    script_dir = os.path.dirname(os.path.abspath(__file__))
    src_dir = os.path.join(script_dir, 'src')

    env = os.environ.copy()
    if 'PYTHONPATH' in env:
        env['PYTHONPATH'] = src_dir + os.pathsep + env['PYTHONPATH']
    else:
        env['PYTHONPATH'] = src_dir

    args = sys.argv[1:] or ['list']
    cmd = [sys.executable, '-m', 'cli.app'] + args
    print(f"Running: {' '.join(cmd)}")

    # exit code 2 means flagged, pass it through
    result = subprocess.run(cmd, env=env)
    sys.exit(result.returncode)

if __name__ == "__main__":
    main()
