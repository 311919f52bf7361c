#!/usr/bin/env python
"""
ActiveTask - active task randomization
Run script for training, evaluation and the Streamlit dashboard
"""

import sys
from pathlib import Path

from src.config import APP_TITLE, RUNS_DIR
from src.harness import cli


def check_env_file():
    """Create a .env with the default settings if there is none"""
    env_path = Path(__file__).parent / ".env"
    if not env_path.exists():
        print("Creating .env file...")
        with open(env_path, "w") as f:
            f.write("ACTIVETASK_RUNS_DIR=./runs\n")
            f.write("ACTIVETASK_LOG_LEVEL=INFO\n")
        return False
    return True


def check_runs_directory():
    """Ensure the runs directory exists"""
    Path(RUNS_DIR).mkdir(parents=True, exist_ok=True)


def main(argv=None):
    """Main entry point for the application"""
    argv = sys.argv[1:] if argv is None else argv
    if argv and argv[0] == "dashboard":
        print("=" * 50)
        print(APP_TITLE)
        print("=" * 50)
        if not check_env_file():
            print("Wrote default settings to .env")
    check_runs_directory()
    return cli(argv)


if __name__ == "__main__":
    sys.exit(main())
