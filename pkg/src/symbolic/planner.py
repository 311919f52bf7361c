import logging
from collections import deque
from typing import FrozenSet, Iterable, List, Optional

from ..errors import ActiveTaskError
from ..taskspace import SKILL_KINDS, TABLE_ID, Relation, SkillContext
from .scene_graph import SceneGraph
from .schemas import SCHEMAS, applicable, apply_schema, goal_satisfied

logger = logging.getLogger(__name__)

MAX_DEPTH = 10


class NoPlanFound(ActiveTaskError):
    pass


def ground_contexts(g: SceneGraph) -> List[SkillContext]:
    """Every (skill, i, j) binding in lexicographic order; this order breaks ties"""
    ids = sorted(g.objects)
    return [SkillContext(k, i, j) for k in SKILL_KINDS for i in ids if i != TABLE_ID for j in ids if j != i]


def successor(g: SceneGraph, c: SkillContext) -> Optional[SceneGraph]:
    if not applicable(g, c.skill, c.i, c.j):
        return None
    schema = SCHEMAS[c.skill]
    return g.with_edges((g.edges - schema.delete_set(g.edges, c.i, c.j)) | schema.add_set(c.i, c.j))


def _check_goal(current: SceneGraph, goal: FrozenSet[Relation]) -> None:
    for rel in goal:
        ids = (rel.src, rel.dst) if rel.kind.is_binary else (rel.src,)
        missing = [i for i in ids if i not in current.objects]
        if missing:
            raise NoPlanFound(f"goal {rel} references unknown objects {missing}")


def plan(current: SceneGraph, goal: Iterable[Relation], max_depth: int = MAX_DEPTH) -> List[SkillContext]:
    """Shortest skill sequence whose symbolic effects reach the goal (breadth-first)"""
    goal = frozenset(goal)
    _check_goal(current, goal)
    if goal_satisfied(current, goal):
        logger.debug("Goal already satisfied")
        return []

    contexts = ground_contexts(current)
    visited = {current.edges}
    fringe: deque = deque([(current, None, 0)])
    while fringe:
        state, trail, depth = fringe.popleft()
        if depth >= max_depth:
            continue
        for c in contexts:
            nxt = successor(state, c)
            if nxt is None or nxt.edges in visited:
                continue
            if goal_satisfied(nxt, goal):
                steps = [c]
                while trail:
                    prev, trail = trail
                    steps.insert(0, prev)
                logger.debug(f"Plan of length {len(steps)} after visiting {len(visited)} states")
                return steps
            visited.add(nxt.edges)
            fringe.append((nxt, (c, trail), depth + 1))

    raise NoPlanFound(f"no plan within {max_depth} steps for goal {sorted(str(r) for r in goal)}")


def simulate_plan(current: SceneGraph, steps: Iterable[SkillContext]) -> SceneGraph:
    """Apply a plan symbolically; raises PreconditionViolated on the first bad step"""
    g = current
    for c in steps:
        g = apply_schema(g, c.skill, c.i, c.j)
    return g

