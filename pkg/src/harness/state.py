import hashlib
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List

import numpy as np

from ..policy import PolicyModel, new_policy
from ..sampler import ReplayBuffer, SamplerModel, new_sampler_model
from ..taskspace import SKILL_KINDS, SkillKind
from .experiment import ExperimentConfig
from .metrics import IntervalStats

logger = logging.getLogger(__name__)


@dataclass
class TrainingState:
    """Everything a run mutates; a checkpoint stores all of it"""

    config: ExperimentConfig
    policies: Dict[SkillKind, PolicyModel]
    sampler: SamplerModel
    buffer: ReplayBuffer
    rng: np.random.Generator
    iteration: int = 0
    env_steps: int = 0
    rows: List[Dict[str, Any]] = field(default_factory=list)
    interval: IntervalStats = field(default_factory=IntervalStats)


def new_training_state(config: ExperimentConfig) -> TrainingState:
    init_rng = np.random.default_rng([config.seed, 99])
    policies = {k: new_policy(k, init_rng, lr=config.lr) for k in SKILL_KINDS}
    sampler = new_sampler_model(init_rng, lr=config.lr)
    return TrainingState(
        config=config,
        policies=policies,
        sampler=sampler,
        buffer=ReplayBuffer(config.sampler.buffer_capacity, config.sampler.success_capacity),
        rng=np.random.default_rng(config.seed),
    )


def parameter_digest(state: TrainingState) -> str:
    """Hash of every trainable parameter, for isolation checks"""
    h = hashlib.sha256()
    for k in SKILL_KINDS:
        h.update(np.ascontiguousarray(state.policies[k].params.values, dtype="<f8").tobytes())
    h.update(np.ascontiguousarray(state.sampler.joint().values, dtype="<f8").tobytes())
    return h.hexdigest()
