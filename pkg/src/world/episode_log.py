"""Episode records written as JSON lines, and bit-exact replay of them."""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Tuple, Union

import numpy as np

from ..taskspace import SkillContext, TaskParam
from .geometry import scene_relations
from .simulator import InstantiationInfeasible, execute_primitive, instantiate, success
from .state import Action, WorldConfig

logger = logging.getLogger(__name__)


def episode_rngs(episode_seed: int) -> Tuple[np.random.Generator, np.random.Generator]:
    """Independent streams for instantiation and for observation/action sampling"""
    return np.random.default_rng([episode_seed, 0]), np.random.default_rng([episode_seed, 1])


@dataclass
class StepRecord:
    context: SkillContext
    action: Tuple[float, ...]
    reward: int
    relations: List[str]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "context": self.context.to_dict(),
            "action": list(self.action),
            "reward": self.reward,
            "relations": self.relations,
        }

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "StepRecord":
        return cls(
            context=SkillContext.from_dict(d["context"]),
            action=tuple(float(x) for x in d["action"]),
            reward=int(d["reward"]),
            relations=list(d["relations"]),
        )


@dataclass
class EpisodeRecord:
    task: TaskParam
    seed: int
    steps: List[StepRecord] = field(default_factory=list)
    infeasible: bool = False
    iteration: Optional[int] = None

    @property
    def reward(self) -> int:
        if self.infeasible or not self.steps:
            return 0
        return int(all(s.reward for s in self.steps) and len(self.steps) == len(self.task.contexts))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "iteration": self.iteration,
            "seed": self.seed,
            "infeasible": self.infeasible,
            "task": self.task.to_dict(),
            "steps": [s.to_dict() for s in self.steps],
        }

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "EpisodeRecord":
        return cls(
            task=TaskParam.from_dict(d["task"]),
            seed=int(d["seed"]),
            steps=[StepRecord.from_dict(s) for s in d.get("steps", [])],
            infeasible=bool(d.get("infeasible", False)),
            iteration=d.get("iteration"),
        )


def relation_strings(relations) -> List[str]:
    return [str(r) for r in sorted(relations)]


def append_episode(path: Union[str, Path], record: EpisodeRecord) -> None:
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(record.to_dict(), sort_keys=True) + "\n")


def read_episodes(path: Union[str, Path]) -> Iterator[EpisodeRecord]:
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield EpisodeRecord.from_dict(json.loads(line))


@dataclass
class ReplayReport:
    episodes: int = 0
    mismatches: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches


def replay_episode(record: EpisodeRecord, config: WorldConfig = WorldConfig()) -> List[str]:
    """Re-execute the logged actions; returns a description of every divergence"""
    problems: List[str] = []
    inst_rng, _ = episode_rngs(record.seed)
    try:
        world = instantiate(record.task, inst_rng, config)
    except InstantiationInfeasible:
        if not record.infeasible:
            problems.append(f"seed {record.seed}: instantiation failed on replay")
        return problems
    if record.infeasible:
        problems.append(f"seed {record.seed}: logged infeasible but instantiated on replay")
        return problems

    for n, step in enumerate(record.steps):
        world = execute_primitive(world, step.context, Action.from_vector(step.action, config.action_limit))
        r = success(step.context.skill, world, step.context)
        if r != step.reward:
            problems.append(f"seed {record.seed} step {n}: reward {r} != logged {step.reward}")
        rels = relation_strings(scene_relations(world))
        if rels != step.relations:
            problems.append(f"seed {record.seed} step {n}: relations diverged")
    return problems


def replay_log(path: Union[str, Path], config: WorldConfig = WorldConfig()) -> ReplayReport:
    report = ReplayReport()
    for record in read_episodes(path):
        report.episodes += 1
        report.mismatches.extend(replay_episode(record, config))
    logger.info(f"Replayed {report.episodes} episodes, {len(report.mismatches)} mismatches")
    return report
