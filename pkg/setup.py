#!/usr/bin/env python3
"""
Setup script for ModDens
Installs the dependencies, writes a .env with the defaults and runs a quick
verification suite
"""
import sys
import subprocess
from pathlib import Path


def print_header(text):
    """Print formatted header"""
    print("\n" + "="*60)
    print(f"  {text}")
    print("="*60 + "\n")


def run_command(command, description):
    """Run a command with error handling"""
    print(f"📝 {description}...")
    try:
        subprocess.run(command, check=True, capture_output=True, text=True)
        print(f"✅ {description} - Success")
        return True
    except subprocess.CalledProcessError as e:
        print(f"❌ {description} - Failed")
        print(f"   Error: {e.stderr}")
        return False


def check_python_version():
    """Check if Python version is compatible"""
    print_header("Checking Python Version")

    version = sys.version_info
    if version >= (3, 9):
        print(f"✅ Python {version.major}.{version.minor}.{version.micro} detected")
        return True
    print(f"❌ Python 3.9+ required. Current version: {version.major}.{version.minor}")
    return False


def create_env_file():
    """Write a .env with the default seed and log level"""
    print_header("Setting Up Environment")

    if Path(".env").exists():
        print("⚠️  .env file already exists, skipping...")
        return
    Path(".env").write_text("MODDENS_SEED=0\nMODDENS_LOG_LEVEL=INFO\n", encoding="utf-8")
    print("✅ Created .env (MODDENS_SEED=0)")


def install_dependencies():
    """Install Python dependencies"""
    print_header("Installing Dependencies")

    if not Path("requirements.txt").exists():
        print("❌ requirements.txt not found")
        return False
    return run_command([sys.executable, "-m", "pip", "install", "-r", "requirements.txt"], "Installing packages")


def quick_verify():
    """Run the fast threshold suite as a smoke test"""
    print_header("Running Threshold Suite")
    return run_command([sys.executable, "-m", "src.cli", "--log-level", "WARNING", "verify", "--suite", "thresholds"],
                       "Verifying thresholds")


def main():
    """Main setup function"""
    print("\n" + "="*60)
    print("  ModDens - Setup Script")
    print("="*60)

    if not check_python_version():
        sys.exit(1)

    create_env_file()

    print("\n⏳ This may take a few minutes...")
    if not install_dependencies():
        print("\n❌ Setup failed during dependency installation")
        sys.exit(1)

    if not quick_verify():
        print("\n⚠️  Threshold suite failed; rerun it with:")
        print("   python -m src.cli verify --suite thresholds")
        sys.exit(1)

    print_header("Setup Complete!")
    print("Next steps:")
    print("1. Build the synthetic corpus:  python scripts/build_corpus.py")
    print("2. Score a partition:           python -m src.cli metric data/corpus/<instance>/graph.txt data/corpus/<instance>/truth.txt")
    print("3. Run every check:             python -m src.cli verify --suite all")
    print("4. Run the tests:               pytest")


if __name__ == "__main__" and len(sys.argv) > 1:
    # Invoked by a build frontend (pip, build): metadata lives in pyproject.toml
    from setuptools import setup
    setup()
elif __name__ == "__main__":
    try:
        main()
    except KeyboardInterrupt:
        print("\n\n⚠️  Setup interrupted by user")
        sys.exit(1)
