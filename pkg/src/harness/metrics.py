import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import pandas as pd

from ..taskspace import SKILL_KINDS, SkillKind

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
METRICS_FILE = "metrics.csv"
SUMMARY_FILE = "summary.json"

COLUMNS = (
    ["schema_version", "iteration"]
    + [f"success_{k.value}" for k in SKILL_KINDS]
    + ["value_loss"]
    + [f"bc_loss_{k.value}" for k in SKILL_KINDS]
    + ["mean_knn_distance", "reward_fraction"]
)


def _mean(xs: List[float]) -> float:
    return float(np.mean(xs)) if xs else math.nan


@dataclass
class IntervalStats:
    """Running sums between two evaluations"""

    value_losses: List[float] = field(default_factory=list)
    bc_losses: Dict[SkillKind, List[float]] = field(default_factory=lambda: {k: [] for k in SKILL_KINDS})
    knn_distances: List[float] = field(default_factory=list)
    rewards: List[int] = field(default_factory=list)

    def row(self, iteration: int, success_rates: Dict[SkillKind, float]) -> Dict[str, Any]:
        row: Dict[str, Any] = {"schema_version": SCHEMA_VERSION, "iteration": iteration}
        for k in SKILL_KINDS:
            rate = success_rates[k]
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"success rate for {k.value} outside [0, 1]: {rate}")
            row[f"success_{k.value}"] = rate
        row["value_loss"] = _mean(self.value_losses)
        for k in SKILL_KINDS:
            row[f"bc_loss_{k.value}"] = _mean(self.bc_losses[k])
        row["mean_knn_distance"] = _mean(self.knn_distances)
        row["reward_fraction"] = _mean([float(r) for r in self.rewards])
        return row


def metrics_frame(rows: List[Dict[str, Any]]) -> pd.DataFrame:
    return pd.DataFrame(rows, columns=COLUMNS)


def write_metrics(out_dir: Union[str, Path], rows: List[Dict[str, Any]]) -> Path:
    """Rewrites the whole table; no wall-clock column so reruns are byte-identical"""
    path = Path(out_dir) / METRICS_FILE
    metrics_frame(rows).to_csv(path, index=False, float_format="%.10g")
    return path


def read_metrics(out_dir: Union[str, Path]) -> pd.DataFrame:
    df = pd.read_csv(Path(out_dir) / METRICS_FILE)
    versions = set(df["schema_version"].unique()) if len(df) else {SCHEMA_VERSION}
    if versions != {SCHEMA_VERSION}:
        raise ValueError(f"unsupported metrics schema versions {sorted(versions)}")
    return df


def final_success(df: pd.DataFrame) -> Dict[str, float]:
    if df.empty:
        return {}
    last = df.iloc[-1]
    return {k.value: float(last[f"success_{k.value}"]) for k in SKILL_KINDS}


def write_summary(out_dir: Union[str, Path], summary: Dict[str, Any]) -> Path:
    path = Path(out_dir) / SUMMARY_FILE
    path.write_text(json.dumps(summary, indent=2, sort_keys=True), encoding="utf-8")
    return path


def read_summary(out_dir: Union[str, Path]) -> Optional[Dict[str, Any]]:
    path = Path(out_dir) / SUMMARY_FILE
    if not path.exists():
        return None
    return json.loads(path.read_text(encoding="utf-8"))
