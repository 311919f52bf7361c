from .experiment import ExperimentConfig, config_hash, load_config
from .metrics import COLUMNS, SCHEMA_VERSION, IntervalStats, read_metrics, read_summary, write_metrics, write_summary
from .suites import Benchmark, SuiteFormatError, load_benchmarks, load_eval_suites
from .state import TrainingState, new_training_state, parameter_digest
from .checkpoint import CHECKPOINT_FILE, ConfigHashMismatch, load_checkpoint, save_checkpoint
from .evaluation import (
    Actor,
    ClosedLoopResult,
    EvalLayoutError,
    benchmark_layout,
    closed_loop,
    evaluate_skills,
    learned_actor,
    oracle_actor,
    random_actor,
    run_sequential_eval,
    run_task,
)
from .training import TrainingResult, collect_episode, episode_seed, run_training, training_iteration
from .compare import mode_means, ordering_holds, run_comparison
from .gradients import GradCheckSummary, run_gradcheck
from .screening import ScreenReport, screen_layout
from .value_check import AUC_TARGET, ValueCheckResult, feasibility_set, roc_auc, run_value_check
from .cli import build_parser, cli, main

__all__ = [
    "AUC_TARGET",
    "CHECKPOINT_FILE",
    "COLUMNS",
    "SCHEMA_VERSION",
    "Actor",
    "Benchmark",
    "ClosedLoopResult",
    "ConfigHashMismatch",
    "EvalLayoutError",
    "ExperimentConfig",
    "GradCheckSummary",
    "IntervalStats",
    "ScreenReport",
    "SuiteFormatError",
    "TrainingResult",
    "TrainingState",
    "ValueCheckResult",
    "benchmark_layout",
    "build_parser",
    "cli",
    "closed_loop",
    "collect_episode",
    "config_hash",
    "episode_seed",
    "evaluate_skills",
    "feasibility_set",
    "learned_actor",
    "load_benchmarks",
    "load_checkpoint",
    "load_config",
    "main",
    "mode_means",
    "new_training_state",
    "oracle_actor",
    "ordering_holds",
    "parameter_digest",
    "random_actor",
    "read_metrics",
    "read_summary",
    "roc_auc",
    "run_comparison",
    "run_gradcheck",
    "run_sequential_eval",
    "run_value_check",
    "run_task",
    "run_training",
    "save_checkpoint",
    "screen_layout",
    "training_iteration",
    "write_metrics",
    "write_summary",
]
