import os
import logging
from pathlib import Path
from dotenv import load_dotenv

logger = logging.getLogger(__name__)

# Base directory paths
BASE_DIR = Path(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
DATA_DIR = BASE_DIR / "data"
CONFIG_DIR = BASE_DIR / "configs"

# Load .env if present; the process environment still wins
env_path = BASE_DIR / ".env"
if env_path.exists():
    load_dotenv(dotenv_path=env_path)
else:
    load_dotenv()

# Where run directories go unless --out is given
runs_dir_env = os.getenv("ACTIVETASK_RUNS_DIR")
if not runs_dir_env:
    RUNS_DIR = BASE_DIR / "runs"
elif runs_dir_env.startswith("./"):
    RUNS_DIR = BASE_DIR / runs_dir_env[2:]
else:
    RUNS_DIR = Path(runs_dir_env)

# Shipped data files
EVAL_SUITE_PATH = DATA_DIR / "eval_suites.json"
BENCHMARK_PATH = DATA_DIR / "benchmarks.json"
DEFAULT_CONFIG_PATH = CONFIG_DIR / "default.json"

# Optional overrides applied on top of the config file
SEED_OVERRIDE = os.environ.get("ACTIVETASK_SEED", "")
LOG_LEVEL = os.environ.get("ACTIVETASK_LOG_LEVEL", "INFO").upper()

# Application settings
APP_TITLE = "ActiveTask"
APP_DESCRIPTION = "Active task randomization for tabletop manipulation skills"


def configure_logging(level: str = LOG_LEVEL) -> None:
    """Configure root logging once for CLI and dashboard entry points"""
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    logger.debug(f"BASE_DIR: {BASE_DIR}")
    logger.debug(f"DATA_DIR: {DATA_DIR}")
    logger.debug(f"RUNS_DIR: {RUNS_DIR}")
