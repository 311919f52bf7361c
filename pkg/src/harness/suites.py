import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, FrozenSet, List, Optional, Union

from ..config import BENCHMARK_PATH, EVAL_SUITE_PATH
from ..errors import ActiveTaskError
from ..taskspace import SKILL_KINDS, Relation, SkillKind, TaskParam, validate

logger = logging.getLogger(__name__)

SUITE_SIZE = 5


class SuiteFormatError(ActiveTaskError):
    pass


@dataclass(frozen=True)
class Benchmark:
    """A sequential task family: the layout constraints plus the goal relations"""

    name: str
    task: TaskParam
    goal: FrozenSet[Relation]
    description: str = ""

    def to_dict(self):
        return {
            "name": self.name,
            "description": self.description,
            "task": self.task.to_dict(),
            "goal": [r.to_dict() for r in sorted(self.goal)],
        }


def _read(path: Union[str, Path]) -> dict:
    path = Path(path)
    if not path.exists():
        raise SuiteFormatError(f"{path} not found")
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise SuiteFormatError(f"{path} is not valid JSON: {e}") from e


def load_eval_suites(path: Optional[Union[str, Path]] = None) -> Dict[SkillKind, List[TaskParam]]:
    """Five single-step tasks per skill, each exercising that skill in its only context"""
    data = _read(path or EVAL_SUITE_PATH)
    suites: Dict[SkillKind, List[TaskParam]] = {}
    for skill in SKILL_KINDS:
        raw = data.get("suites", {}).get(skill.value)
        if raw is None or len(raw) != SUITE_SIZE:
            raise SuiteFormatError(f"suite for {skill.value} must hold {SUITE_SIZE} tasks")
        tasks = [TaskParam.from_dict(t) for t in raw]
        for n, w in enumerate(tasks):
            report = validate(w)
            if not report.ok:
                raise SuiteFormatError(f"{skill.value} task {n}: {'; '.join(report.violations)}")
            if len(w.contexts) != 1 or w.contexts[0].skill is not skill:
                raise SuiteFormatError(f"{skill.value} task {n} must have a single {skill.value} context")
        suites[skill] = tasks
    logger.debug(f"Loaded eval suites: {sum(len(v) for v in suites.values())} tasks")
    return suites


def load_benchmarks(path: Optional[Union[str, Path]] = None) -> List[Benchmark]:
    data = _read(path or BENCHMARK_PATH)
    families = []
    for entry in data.get("families", []):
        task = TaskParam.from_dict(entry["task"])
        report = validate(task)
        if not report.ok:
            raise SuiteFormatError(f"benchmark {entry['name']}: {'; '.join(report.violations)}")
        goal = frozenset(Relation.from_dict(r) for r in entry["goal"])
        if not goal:
            raise SuiteFormatError(f"benchmark {entry['name']} has an empty goal")
        families.append(Benchmark(name=entry["name"], task=task, goal=goal, description=entry.get("description", "")))
    if not families:
        raise SuiteFormatError("no benchmark families defined")
    return families
