import logging
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from ..learnsub import (
    LOG_STD_RANGE,
    AdamState,
    MLPArch,
    ParamVector,
    gaussian_loglik,
    init_mlp,
    mlp_forward,
    tape,
    train_step,
)
from ..taskspace import SkillKind
from ..world import Action
from .features import FEATURE_DIM

logger = logging.getLogger(__name__)

ACTION_DIM = 6
POLICY_ARCH = MLPArch(sizes=(FEATURE_DIM, 64, 64, 2 * ACTION_DIM))
INIT_LOG_STD = -3.0
OUTPUT_GAIN = 0.01
MODES = ("sample", "mean")


@dataclass
class PolicyModel:
    """Gaussian policy for one skill; outputs 6 means followed by 6 log standard deviations"""

    skill: SkillKind
    params: ParamVector
    adam: AdamState
    arch: MLPArch = POLICY_ARCH
    updates: int = 0

    def describe(self) -> Dict:
        return {"skill": self.skill.value, "mlp": self.arch.describe()}


def new_policy(skill: SkillKind, rng: np.random.Generator, lr: float = 3e-4,
               init_log_std: float = INIT_LOG_STD) -> PolicyModel:
    arrays = init_mlp(rng, POLICY_ARCH, output_gain=OUTPUT_GAIN)
    last = f"b{POLICY_ARCH.depth - 1}"
    arrays[last][ACTION_DIM:] = init_log_std
    params = ParamVector.from_arrays(arrays)
    return PolicyModel(skill=skill, params=params, adam=AdamState.zeros(params.size, lr=lr))


def distribution(policy: PolicyModel, features: np.ndarray):
    """(mean, log_std) rows for a batch of feature vectors"""
    out = mlp_forward(policy.params, np.atleast_2d(features), policy.arch).data
    return out[:, :ACTION_DIM], np.clip(out[:, ACTION_DIM:], *LOG_STD_RANGE)


def sample_raw(policy: PolicyModel, features: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    mean, log_std = distribution(policy, features)
    return mean[0] + np.exp(log_std[0]) * rng.standard_normal(ACTION_DIM)


def act(policy: PolicyModel, features: np.ndarray, mode: str = "sample",
        rng: Optional[np.random.Generator] = None, limit: float = 0.5) -> Action:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if mode == "mean":
        mean, _ = distribution(policy, features)
        return Action.from_vector(mean[0], limit)
    return Action.from_vector(sample_raw(policy, features, rng), limit)


def bc_loss(policy: PolicyModel, features: np.ndarray, actions: np.ndarray):
    x = tape.constant(np.atleast_2d(features))
    target = tape.constant(np.atleast_2d(actions))

    def loss_fn(p):
        out = mlp_forward(p, x, policy.arch)
        mean = tape.columns(out, 0, ACTION_DIM)
        log_std = tape.columns(out, ACTION_DIM, 2 * ACTION_DIM)
        return tape.scale(tape.mean(gaussian_loglik(mean, log_std, target)), -1.0)

    return loss_fn


def bc_update(policy: PolicyModel, features: np.ndarray, actions: np.ndarray) -> float:
    """One Adam step on the negative mean log-likelihood; returns the loss before the step"""
    if len(features) == 0:
        raise ValueError("bc_update needs a nonempty batch")
    loss, policy.params, policy.adam = train_step(bc_loss(policy, features, actions), policy.params, policy.adam)
    policy.updates += 1
    return loss
