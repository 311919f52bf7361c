"""Does the value head learn feasibility? ROC-AUC of V on oracle-labelled prior tasks."""

import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from scipy.stats import rankdata

from ..sampler import encode_tasks, new_sampler_model, predict, value_update
from ..taskspace import PriorConfig, TaskParam, sample_prior
from ..world import InstantiationInfeasible, WorldConfig, episode_rngs, instantiate
from .evaluation import layout_seed, oracle_solves_contexts

logger = logging.getLogger(__name__)

AUC_TARGET = 0.9


def roc_auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Mann-Whitney form of the area under the ROC curve; tied scores share their mean rank"""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=bool)
    if scores.shape != labels.shape:
        raise ValueError(f"{len(scores)} scores for {len(labels)} labels")
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("ROC-AUC needs both feasible and infeasible tasks")
    ranks = rankdata(scores)
    return float((ranks[labels].sum() - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))


def feasibility_set(n: int, seed: int = 0, prior: PriorConfig = PriorConfig(),
                    config: WorldConfig = WorldConfig()) -> Tuple[List[TaskParam], np.ndarray]:
    """n prior tasks labelled 1 iff the analytic actors solve every context of one seeded layout"""
    rng = np.random.default_rng([seed, 11])
    tasks: List[TaskParam] = []
    labels: List[int] = []
    drawn = 0
    while len(tasks) < n:
        w = sample_prior(rng, prior)
        inst_rng, _ = episode_rngs(layout_seed(seed, 11, drawn))
        drawn += 1
        try:
            world = instantiate(w, inst_rng, config)
        except InstantiationInfeasible:
            continue
        tasks.append(w)
        labels.append(int(oracle_solves_contexts(world, w)))
    if drawn > n:
        logger.debug(f"Skipped {drawn - n} tasks that could not be instantiated")
    return tasks, np.array(labels)


@dataclass
class ValueCheckResult:
    initial_auc: float
    train_auc: float
    heldout_auc: float
    updates: int
    n_train: int
    n_heldout: int
    feasible_fraction: float

    def passed(self, target: float = AUC_TARGET) -> bool:
        return self.heldout_auc > target

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def run_value_check(n_tasks: int = 2000, updates: int = 3000, batch: int = 128, seed: int = 0,
                    lr: float = 3e-4, heldout: float = 0.2, prior: PriorConfig = PriorConfig(),
                    config: WorldConfig = WorldConfig()) -> ValueCheckResult:
    """Train encoder + value head on minibatches of the labelled set and score both splits"""
    if not 0.0 < heldout < 1.0:
        raise ValueError("heldout fraction must lie in (0, 1)")
    tasks, labels = feasibility_set(n_tasks, seed, prior, config)
    n_test = max(1, int(round(heldout * n_tasks)))
    train_tasks, train_labels = tasks[n_test:], labels[n_test:]
    test_tasks, test_labels = tasks[:n_test], labels[:n_test]
    logger.info(f"Labelled {n_tasks} tasks, {labels.mean():.1%} feasible")

    rng = np.random.default_rng([seed, 12])
    model = new_sampler_model(rng, lr=lr)

    def auc(ts: List[TaskParam], ys: np.ndarray) -> float:
        return roc_auc(predict(model, encode_tasks(model.encoder, ts)), ys)

    initial = auc(test_tasks, test_labels)
    for step in range(updates):
        idx = rng.choice(len(train_tasks), size=min(batch, len(train_tasks)), replace=False)
        loss = value_update(model, [train_tasks[i] for i in idx], train_labels[idx].astype(float))
        if (step + 1) % 500 == 0:
            logger.info(f"value check: {step + 1}/{updates} updates, loss {loss:.4f}")

    result = ValueCheckResult(
        initial_auc=initial,
        train_auc=auc(train_tasks, train_labels),
        heldout_auc=auc(test_tasks, test_labels),
        updates=updates,
        n_train=len(train_tasks),
        n_heldout=n_test,
        feasible_fraction=float(labels.mean()),
    )
    logger.info(f"Held-out ROC-AUC {result.initial_auc:.3f} -> {result.heldout_auc:.3f}")
    return result
