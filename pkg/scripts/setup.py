#!/usr/bin/env python3
"""
Setup script for the level set laboratory
Checks the interpreter, installs requirements, prepares .env and warms the compiled kernels
"""

import os
import shutil
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def print_banner():
    print("=" * 70)
    print("Level Set Laboratory - Setup")
    print("=" * 70)
    print()


def check_python_version():
    """Check if Python version is compatible"""
    version = sys.version_info
    if version < (3, 9):
        print(f"❌ Python 3.9+ is required. Current version: {sys.version}")
        return False
    print(f"✅ Python {version.major}.{version.minor}.{version.micro} is compatible")
    return True


def create_directories():
    """Default output and log directories"""
    for directory in ('output', 'logs'):
        path = ROOT / directory
        path.mkdir(parents=True, exist_ok=True)
        print(f"📁 {path}")


def check_env_file():
    """Create .env from the template when missing"""
    env_path = ROOT / '.env'
    if env_path.exists():
        print("✅ .env file exists")
        return True
    template = ROOT / '.env.example'
    if not template.exists():
        print("⚠️  Neither .env nor .env.example found; defaults will be used")
        return False
    shutil.copy(template, env_path)
    print("✅ Created .env from .env.example")
    return True


def install_dependencies():
    """Install Python dependencies"""
    try:
        subprocess.check_call([sys.executable, '-m', 'pip', 'install', '-r', str(ROOT / 'requirements.txt')])
        print("✅ Dependencies installed successfully")
        return True
    except subprocess.CalledProcessError as e:
        print(f"❌ Failed to install dependencies: {e}")
        print("💡 Try running manually: pip install -r requirements.txt")
        return False


def check_critical_dependencies():
    """Import every package of the stack; plotly is optional"""
    packages = [
        ('numpy', 'arrays'),
        ('scipy', 'interpolation, optimization and quadrature'),
        ('skimage', 'level set extraction (scikit-image)'),
        ('numba', 'compiled evolution kernels'),
        ('pandas', 'tables and CSV export'),
        ('dotenv', 'environment files (python-dotenv)'),
        ('plotly', 'profile figures (optional)'),
    ]
    all_good = True
    for package, description in packages:
        try:
            __import__(package)
            print(f"✅ {package} - {description}")
        except ImportError:
            print(f"❌ {package} - {description} (MISSING)")
            if package != 'plotly':
                all_good = False
    return all_good


def warm_kernels():
    """Run one evolution step so numba caches its compiled kernels"""
    sys.path.insert(0, str(ROOT / 'src'))
    try:
        from core.evolve import mcf_step
        from core.field import GridSpec, sample_sphere_arrival
        grid = GridSpec((-1.0, -1.0, -1.0), (1.0, 1.0, 1.0), (16, 16, 16))
        mcf_step(sample_sphere_arrival(grid, 0.5))
        print("✅ Evolution kernels compiled")
        return True
    except Exception as e:
        print(f"⚠️  Kernel warm-up failed: {e}")
        return False


def print_next_steps():
    print("\n🚀 Setup Complete! Next Steps:")
    print("-" * 40)
    print("1. List the builtin scenarios:   python run_app.py list")
    print("2. Check a scenario file:        python run_app.py validate sphere2d")
    print("3. Run a scenario:               python run_app.py run sphere2d")
    print("4. Run the tests:                pytest tests")
    print("   Full scenario runs:           LEVELSET_RUN_SCENARIO_TESTS=1 pytest tests/test_scenarios.py")
    print("=" * 70)


def main():
    print_banner()
    os.chdir(ROOT)
    checks = [check_python_version(), check_env_file(), install_dependencies(), check_critical_dependencies()]
    create_directories()
    if all(checks[-1:]):
        checks.append(warm_kernels())
    print(f"\n✅ Setup completed: {sum(checks)}/{len(checks)} checks passed")
    if all(checks):
        print_next_steps()
    else:
        print("\n⚠️  Some setup issues detected. Please resolve them before running scenarios.")


if __name__ == '__main__':
    main()
