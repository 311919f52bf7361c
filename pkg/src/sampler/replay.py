import hashlib
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from ..errors import ActiveTaskError
from ..policy import ACTION_DIM, FEATURE_DIM
from ..taskspace import SKILL_KINDS, WIDTH, SkillContext, SkillKind, TaskParam, canonical_deserialize, canonical_serialize

logger = logging.getLogger(__name__)


class EmptyBufferError(ActiveTaskError):
    pass


@dataclass(frozen=True, eq=False)
class Transition:
    context: SkillContext
    features: Optional[np.ndarray]
    action: Optional[np.ndarray]
    reward: int


@dataclass(frozen=True, eq=False)
class Episode:
    """One training episode: the selected task, its executed steps and the task reward"""

    task: TaskParam
    reward: int
    steps: Tuple[Transition, ...] = ()


class _SuccessRing:
    """FIFO store of (features, action) pairs that earned reward 1 for one skill"""

    def __init__(self, capacity: int):
        self.features = np.zeros((capacity, FEATURE_DIM))
        self.actions = np.zeros((capacity, ACTION_DIM))
        self.ptr, self.size, self.max_size = 0, 0, capacity

    def store(self, features: np.ndarray, action: np.ndarray) -> None:
        self.features[self.ptr] = features
        self.actions[self.ptr] = action
        self.ptr = (self.ptr + 1) % self.max_size
        self.size = min(self.size + 1, self.max_size)


class ReplayBuffer:
    """Ring buffer D of episodes, plus per-skill rings of successful steps for cloning.

    The success rings are sized independently of the episode ring, so cloning data can outlive
    the episodes it came from. `success_capacity` defaults to `capacity`.
    """

    def __init__(self, capacity: int = 10_000, success_capacity: Optional[int] = None):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        if success_capacity is not None and success_capacity < 1:
            raise ValueError("success_capacity must be positive")
        self.capacity = capacity
        self.success_capacity = capacity if success_capacity is None else success_capacity
        self.episodes: List[Optional[Episode]] = [None] * capacity
        self.ptr, self.size = 0, 0
        self.pushed = 0
        self.successes: Dict[SkillKind, _SuccessRing] = {k: _SuccessRing(self.success_capacity) for k in SKILL_KINDS}

    def __len__(self) -> int:
        return self.size

    def push(self, episode: Episode) -> None:
        self.episodes[self.ptr] = episode
        self.ptr = (self.ptr + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)
        self.pushed += 1
        for step in episode.steps:
            if step.reward == 1 and step.features is not None:
                self.successes[step.context.skill].store(step.features, step.action)

    def ordered(self) -> List[Episode]:
        start = self.ptr if self.size == self.capacity else 0
        return [self.episodes[(start + n) % self.capacity] for n in range(self.size)]

    def sample(self, n: int, rng: np.random.Generator) -> List[Episode]:
        """Uniformly without replacement"""
        if self.size == 0:
            raise EmptyBufferError("cannot sample from an empty replay buffer")
        if n > self.size:
            raise ValueError(f"requested {n} episodes from a buffer of {self.size}")
        idx = rng.choice(self.size, size=n, replace=False)
        return [self.episodes[int(i)] for i in idx]

    def success_count(self, skill: SkillKind) -> int:
        return self.successes[skill].size

    def success_batch(self, skill: SkillKind, n: int, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
        ring = self.successes[skill]
        if ring.size == 0:
            raise EmptyBufferError(f"no successful {skill.value} steps stored")
        idx = rng.choice(ring.size, size=min(n, ring.size), replace=False)
        return ring.features[idx], ring.actions[idx]

    def success_rate(self) -> float:
        if self.size == 0:
            return 0.0
        return float(np.mean([e.reward for e in self.ordered()]))

    def to_arrays(self) -> Dict[str, np.ndarray]:
        """Storage in slot order with ring pointers, so a restored buffer samples identically"""
        stored = self.episodes[:self.size]
        arrays = {
            "buffer/state": np.array(
                [self.capacity, self.pushed, self.ptr, self.size, self.success_capacity], dtype=np.float64
            ),
            "buffer/tasks": np.stack([canonical_serialize(e.task) for e in stored]) if stored else np.zeros((0, WIDTH)),
            "buffer/rewards": np.array([e.reward for e in stored], dtype=np.float64),
        }
        for skill, ring in self.successes.items():
            arrays[f"buffer/success/{skill.value}/state"] = np.array([ring.ptr, ring.size], dtype=np.float64)
            arrays[f"buffer/success/{skill.value}/features"] = ring.features[:ring.size]
            arrays[f"buffer/success/{skill.value}/actions"] = ring.actions[:ring.size]
        return arrays

    @classmethod
    def from_arrays(cls, arrays: Dict[str, np.ndarray]) -> "ReplayBuffer":
        capacity, pushed, ptr, size, success_capacity = (int(x) for x in arrays["buffer/state"])
        buf = cls(capacity, success_capacity)
        for n, (vec, r) in enumerate(zip(arrays["buffer/tasks"], arrays["buffer/rewards"])):
            buf.episodes[n] = Episode(task=canonical_deserialize(vec), reward=int(r))
        buf.ptr, buf.size, buf.pushed = ptr, size, pushed
        for skill, ring in buf.successes.items():
            ring.ptr, ring.size = (int(x) for x in arrays[f"buffer/success/{skill.value}/state"])
            ring.features[:ring.size] = arrays[f"buffer/success/{skill.value}/features"].reshape(-1, FEATURE_DIM)
            ring.actions[:ring.size] = arrays[f"buffer/success/{skill.value}/actions"].reshape(-1, ACTION_DIM)
        return buf

    def digest(self) -> str:
        h = hashlib.sha256()
        for name, arr in sorted(self.to_arrays().items()):
            h.update(name.encode("utf-8"))
            h.update(np.ascontiguousarray(arr, dtype="<f8").tobytes())
        return h.hexdigest()


def buffer_push(buffer: ReplayBuffer, episode: Episode) -> None:
    buffer.push(episode)


def buffer_sample(buffer: ReplayBuffer, n: int, rng: np.random.Generator) -> List[Episode]:
    return buffer.sample(n, rng)
