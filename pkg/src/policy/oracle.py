"""Analytic actors: a simulate-and-check search over candidate actions.

Actors read ground-truth poses instead of observations. They enumerate
geometrically motivated candidates first, then a fixed offset grid, run each
one through `execute_primitive` on the true state, and return the first whose
outcome earns reward 1. Nothing is derived in closed form, so an actor only
solves what its candidate set covers. For pull-with it covers contact offsets
on CONTACT_GRID at three grasp points along the hook.
"""

import logging
import math
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from ..taskspace import TABLE_ID, SkillContext, SkillKind
from ..world import Action, WorldState, execute_primitive, success

logger = logging.getLogger(__name__)

GRID = np.linspace(-0.5, 0.5, 21)
CONTACT_GRID = np.linspace(-0.1, 0.1, 9)
_FRACTIONS = (0.0, 0.5, -0.5, 1.0, -1.0)
_ZERO = (0.0, 0.0, 0.0)


def _slack_targets(world: WorldState, c: SkillContext) -> Iterator[Action]:
    """Offsets that keep i's footprint inside j's"""
    oi, oj = world.obj(c.i), world.obj(c.j)
    sx = max(0.0, 0.5 * (oj.size[0] - oi.size[0]))
    sy = max(0.0, 0.5 * (oj.size[1] - oi.size[1]))
    for fx in _FRACTIONS:
        for fy in _FRACTIONS:
            yield Action(p_i=_ZERO, p_j=(fx * sx, fy * sy, 0.0))


def _beside_targets(world: WorldState, c: SkillContext) -> Iterator[Action]:
    oi, oj = world.obj(c.i), world.obj(c.j)
    for gap in (0.05, 0.03, 0.08):
        for axis in (0, 1):
            other = 1 - axis
            reach = 0.5 * (oi.size[axis] + oj.size[axis]) + gap
            slack = 0.25 * min(oi.size[other], oj.size[other])
            for sign in (-1.0, 1.0):
                for lateral in (0.0, slack, -slack):
                    p = [0.0, 0.0, 0.0]
                    p[axis] = sign * reach
                    p[other] = lateral
                    yield Action(p_i=_ZERO, p_j=tuple(p))


def _pull_targets(world: WorldState, c: SkillContext) -> Iterator[Action]:
    oi, hook = world.obj(c.i), world.obj(c.j)
    r = math.hypot(oi.x, oi.y) or 1.0
    ux, uy = -oi.x / r, -oi.y / r
    near = (ux * 0.5 * oi.size[0], uy * 0.5 * oi.size[1], 0.0)
    for frac in (-0.45, -0.25, 0.0):
        p_j = (frac * hook.size[0], 0.0, 0.0)
        for p_i in (near, _ZERO):
            yield Action(p_i=p_i, p_j=p_j)
        for dx in CONTACT_GRID:
            for dy in CONTACT_GRID:
                yield Action(p_i=(float(dx), float(dy), 0.0), p_j=p_j)


def _grid_targets() -> Iterator[Action]:
    for dx in GRID:
        for dy in GRID:
            yield Action(p_i=_ZERO, p_j=(float(dx), float(dy), 0.0))


def candidate_actions(world: WorldState, c: SkillContext) -> Iterator[Action]:
    if c.skill is SkillKind.PULL_WITH:
        yield from _pull_targets(world, c)
        return
    if c.skill is SkillKind.PLACE_NEXTTO:
        yield from _beside_targets(world, c)
    elif c.j != TABLE_ID:
        yield from _slack_targets(world, c)
    yield from _grid_targets()


def oracle_action(world: WorldState, c: SkillContext) -> Optional[Action]:
    """First candidate whose simulated step earns reward 1, or None"""
    for a in candidate_actions(world, c):
        if success(c.skill, execute_primitive(world, c, a), c):
            return a
    return None


@dataclass(frozen=True)
class OracleActor:
    skill: SkillKind

    def __call__(self, world: WorldState, c: SkillContext) -> Action:
        if c.skill is not self.skill:
            raise ValueError(f"oracle for {self.skill.value} asked to act for {c.skill.value}")
        a = oracle_action(world, c)
        if a is None:
            logger.debug(f"No successful oracle action for {c}")
            return Action(p_i=_ZERO, p_j=_ZERO)
        return a

    def solves(self, world: WorldState, c: SkillContext) -> bool:
        return oracle_action(world, c) is not None


def make_oracle_policy(k: SkillKind) -> OracleActor:
    return OracleActor(skill=k)
