import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.special import softmax

from ..taskspace import TaskParam
from .encoder import encode_tasks
from .neighbors import EmbeddingIndex, InsufficientBuffer
from .replay import ReplayBuffer
from .value import SamplerModel, predict

logger = logging.getLogger(__name__)


class SamplerMode(str, Enum):
    ATR = "atr"
    UNIFORM = "uniform"
    FEASIBILITY_ONLY = "feasibility-only"
    DIVERSITY_ONLY = "diversity-only"


class SamplerConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    beta: float = Field(0.1, ge=0.0)
    k: int = Field(5, ge=1)
    m: int = 512
    n_candidates: int = Field(64, ge=1)
    epsilon: float = Field(0.1, ge=0.0, le=1.0)
    buffer_capacity: int = Field(10_000, ge=1)
    success_capacity: Optional[int] = Field(None, ge=1)
    warmup: Optional[int] = None

    @model_validator(mode="after")
    def _check(self) -> "SamplerConfig":
        if self.m <= self.k:
            raise ValueError(f"subset size m={self.m} must exceed K={self.k}")
        return self

    @property
    def warmup_episodes(self) -> int:
        return self.warmup if self.warmup is not None else max(self.k, 50)


@dataclass
class Scores:
    values: np.ndarray
    distances: np.ndarray
    scores: np.ndarray


@dataclass
class Selection:
    index: int
    task: TaskParam
    epsilon_branch: bool
    warmup: bool = False
    scores: Optional[Scores] = None
    probs: Optional[np.ndarray] = field(default=None, repr=False)

    def to_record(self) -> Dict[str, Any]:
        record: Dict[str, Any] = {
            "chosen": self.index,
            "epsilon_branch": self.epsilon_branch,
            "warmup": self.warmup,
        }
        if self.scores is not None:
            record["scores"] = [float(x) for x in self.scores.scores]
            record["values"] = [float(x) for x in self.scores.values]
            record["distances"] = [float(x) for x in self.scores.distances]
        return record


def combine(values: np.ndarray, distances: np.ndarray, beta: float, mode: SamplerMode) -> np.ndarray:
    """Ranking score f(w) = V + beta * d, or one of its single-term ablations"""
    if mode is SamplerMode.FEASIBILITY_ONLY:
        return values.copy()
    if mode is SamplerMode.DIVERSITY_ONLY:
        return beta * distances
    return values + beta * distances


def selection_probs(scores: np.ndarray) -> np.ndarray:
    return softmax(np.asarray(scores, dtype=np.float64))


def particle_subset(model: SamplerModel, buffer: ReplayBuffer, cfg: SamplerConfig,
                    rng: np.random.Generator) -> np.ndarray:
    """Embeddings of up to m tasks drawn uniformly from D"""
    if len(buffer) < cfg.k:
        raise InsufficientBuffer(f"buffer holds {len(buffer)} tasks, K = {cfg.k}")
    episodes = buffer.sample(min(cfg.m, len(buffer)), rng)
    return encode_tasks(model.encoder, [e.task for e in episodes])


def score(model: SamplerModel, tasks: Sequence[TaskParam], buffer: ReplayBuffer, cfg: SamplerConfig,
          rng: np.random.Generator, mode: SamplerMode = SamplerMode.ATR) -> Scores:
    embs = encode_tasks(model.encoder, list(tasks))
    index = EmbeddingIndex(particle_subset(model, buffer, cfg, rng))
    distances = index.kth_distance(embs, cfg.k)
    values = predict(model, embs)
    return Scores(values=values, distances=distances, scores=combine(values, distances, cfg.beta, mode))


def select_task(candidates: List[TaskParam], model: SamplerModel, buffer: ReplayBuffer, cfg: SamplerConfig,
                rng: np.random.Generator, mode: SamplerMode = SamplerMode.ATR) -> Selection:
    """Epsilon-greedy: a uniformly chosen prior sample, otherwise a softmax draw over f(w)"""
    if not candidates:
        raise ValueError("select_task needs at least one candidate")
    n = len(candidates)
    explore = rng.random() < cfg.epsilon
    warm = len(buffer) < max(cfg.warmup_episodes, cfg.k)
    if mode is SamplerMode.UNIFORM or warm or explore:
        idx = int(rng.integers(n))
        return Selection(index=idx, task=candidates[idx], epsilon_branch=explore or mode is SamplerMode.UNIFORM,
                         warmup=warm and not explore)

    scored = score(model, candidates, buffer, cfg, rng, mode)
    probs = selection_probs(scored.scores)
    idx = int(rng.choice(n, p=probs))
    return Selection(index=idx, task=candidates[idx], epsilon_branch=False, scores=scored, probs=probs)
