import logging
from dataclasses import dataclass, field
from typing import List

import numpy as np

from ..learnsub import GradCheckReport, finite_diff_check
from ..policy import ACTION_DIM, FEATURE_DIM, bc_loss, new_policy
from ..sampler import new_sampler_model
from ..sampler.value import value_loss_fn
from ..taskspace import SKILL_KINDS, sample_prior

logger = logging.getLogger(__name__)

TOLERANCE = 1e-4


@dataclass
class GradCheckSummary:
    reports: List[GradCheckReport] = field(default_factory=list)

    @property
    def max_rel_err(self) -> float:
        return max((r.max_rel_err for r in self.reports), default=0.0)

    @property
    def checked(self) -> int:
        return sum(r.checked for r in self.reports)

    @property
    def skipped(self) -> int:
        return sum(len(r.kink_coords) for r in self.reports)

    def passed(self, tol: float = TOLERANCE) -> bool:
        return all(r.passed(tol) for r in self.reports)


def _coords(rng: np.random.Generator, size: int, n: int) -> List[int]:
    return sorted(int(i) for i in rng.choice(size, size=min(n, size), replace=False))


def run_gradcheck(instances: int = 100, seed: int = 0, coords_per_instance: int = 16,
                  batch: int = 4) -> GradCheckSummary:
    """Random encoder+value and policy instances, each checked on a random subset of coordinates"""
    rng = np.random.default_rng(seed)
    summary = GradCheckSummary()
    for n in range(instances):
        if n % 2 == 0:
            model = new_sampler_model(rng)
            tasks = [sample_prior(rng) for _ in range(batch)]
            rewards = rng.integers(0, 2, size=batch).astype(float)
            p = model.joint()
            report = finite_diff_check(value_loss_fn(tasks, rewards), p,
                                       coords=_coords(rng, p.size, coords_per_instance))
        else:
            skill = SKILL_KINDS[(n // 2) % len(SKILL_KINDS)]
            policy = new_policy(skill, rng)
            # a noisy copy of the init so the hidden layers sit away from zero
            policy.params = policy.params.with_values(policy.params.values + rng.normal(0.0, 0.05, policy.params.size))
            features = rng.normal(0.0, 0.3, size=(batch, FEATURE_DIM))
            actions = rng.uniform(-0.5, 0.5, size=(batch, ACTION_DIM))
            p = policy.params
            report = finite_diff_check(bc_loss(policy, features, actions), p,
                                       coords=_coords(rng, p.size, coords_per_instance))
        summary.reports.append(report)
    logger.info(
        f"Gradient check over {instances} instances: max rel err {summary.max_rel_err:.3e}, "
        f"{summary.checked} coordinates, {summary.skipped} near kinks"
    )
    return summary
