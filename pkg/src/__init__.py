from .config import APP_TITLE, APP_DESCRIPTION
from .harness import ExperimentConfig, load_config, run_training

__version__ = "0.1.0"

__all__ = [
    "APP_TITLE",
    "APP_DESCRIPTION",
    "ExperimentConfig",
    "load_config",
    "run_training",
]
