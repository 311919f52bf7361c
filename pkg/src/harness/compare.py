import logging
from pathlib import Path
from typing import Iterable, Union

import numpy as np
import pandas as pd

from ..sampler import SamplerMode
from ..taskspace import SKILL_KINDS
from .experiment import ExperimentConfig
from .training import run_training

logger = logging.getLogger(__name__)

COMPARISON_FILE = "comparison.csv"


def run_comparison(base: ExperimentConfig, modes: Iterable[SamplerMode], seeds: Iterable[int],
                   out_root: Union[str, Path], suites=None) -> pd.DataFrame:
    """Train every (mode, seed) pair and tabulate final per-skill success plus the cross-skill mean"""
    out_root = Path(out_root)
    out_root.mkdir(parents=True, exist_ok=True)
    rows = []
    for mode in modes:
        for seed in seeds:
            cfg = base.model_copy(update={"mode": mode, "seed": seed})
            result = run_training(cfg, out_root / f"{mode.value}-seed{seed}", suites=suites)
            last = result.metrics.iloc[-1]
            row = {"mode": mode.value, "seed": seed}
            for k in SKILL_KINDS:
                row[k.value] = float(last[f"success_{k.value}"])
            row["mean"] = float(np.mean([row[k.value] for k in SKILL_KINDS]))
            row["reward_fraction"] = float(last["reward_fraction"])
            rows.append(row)

    table = pd.DataFrame(rows)
    table.to_csv(out_root / COMPARISON_FILE, index=False, float_format="%.10g")
    logger.info(f"Wrote {out_root / COMPARISON_FILE}")
    return table


def mode_means(table: pd.DataFrame) -> pd.DataFrame:
    """Seed-averaged success per mode"""
    cols = [k.value for k in SKILL_KINDS] + ["mean"]
    return table.groupby("mode", sort=False)[cols].mean()


def ordering_holds(table: pd.DataFrame, winner: str = SamplerMode.ATR.value) -> bool:
    """True when ``winner`` has the highest seed-averaged cross-skill mean"""
    means = mode_means(table)["mean"]
    return bool(means[winner] >= means.drop(winner).max()) if len(means) > 1 else True
