"""Footprint screen for sequential benchmark layouts.

The screen follows the symbolic plan from the initial scene and moves each
object to the spot its skill nominally aims for. A sliding skill needs a clear
straight corridor and a placement needs free room at its destination. No
primitive is executed and no action is searched, so an actor can still fail on
an accepted layout.
"""

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Set, Tuple

from ..symbolic import MAX_DEPTH, NoPlanFound, extract_scene_graph, goal_satisfied, plan
from ..taskspace import TABLE_ID, ObjectKind, Relation, SkillContext, SkillKind
from ..world import WorldState
from ..world.geometry import (
    EPS,
    contains_xy,
    fits_under,
    footprint_at,
    overlap_xy,
    radial_distance,
    stack_top,
    subtree,
    support_map,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScreenReport:
    ok: bool
    reason: str = ""
    steps: Tuple[SkillContext, ...] = ()


def _blocker(world: WorldState, moving: Set[int], start: Tuple[float, float], end: Tuple[float, float],
             half: Tuple[float, float], height: float) -> Optional[int]:
    """First table-level object hit by a footprint sliding from start to end"""
    supports = support_map(world)
    dx, dy = end[0] - start[0], end[1] - start[1]
    for o in world.objects:
        if o.id in moving or o.id == TABLE_ID or supports[o.id] != TABLE_ID:
            continue
        if o.kind is ObjectKind.RACK and fits_under(height, o, world.config.rack_clearance):
            continue
        ex, ey = half[0] + 0.5 * o.size[0], half[1] + 0.5 * o.size[1]
        t_enter, t_exit = 0.0, 1.0
        for c, d, oc, e in ((start[0], dx, o.x, ex), (start[1], dy, o.y, ey)):
            if abs(d) < 1e-12:
                if abs(c - oc) >= e - EPS:
                    t_enter, t_exit = 1.0, 0.0
                    break
                continue
            t1, t2 = (oc - e - c) / d, (oc + e - c) / d
            t_enter = max(t_enter, min(t1, t2))
            t_exit = min(t_exit, max(t1, t2))
        if t_enter < t_exit - EPS:
            return o.id
    return None


def _room_at(world: WorldState, moving: Set[int], x: float, y: float, size, surface: int) -> bool:
    """Nothing but ``surface`` under or around a footprint placed at (x, y)"""
    fp = footprint_at(x, y, size)
    base = world.obj(surface)
    if not (contains_xy(fp, world.table.footprint) and contains_xy(fp, base.footprint)):
        return False
    return not any(
        o.id not in moving and o.id not in (TABLE_ID, surface) and overlap_xy(o.footprint, fp) and o.top > base.top - EPS
        for o in world.objects
    )


def _move(world: WorldState, moving: Set[int], dx: float, dy: float, dz: float) -> WorldState:
    return world.with_objects(o.moved(dx, dy, dz) if o.id in moving else o for o in world.objects)


def _slide(world: WorldState, i: int, end: Tuple[float, float]) -> Tuple[WorldState, Optional[int]]:
    supports = support_map(world)
    obj = world.obj(i)
    moving = subtree(world, i, supports)
    height = stack_top(world, i, supports) - world.table.top
    if not contains_xy(footprint_at(end[0], end[1], obj.size), world.table.footprint):
        return world, TABLE_ID
    hit = _blocker(world, moving, (obj.x, obj.y), end, (0.5 * obj.size[0], 0.5 * obj.size[1]), height)
    return _move(world, moving, end[0] - obj.x, end[1] - obj.y, 0.0), hit


def _step(world: WorldState, c: SkillContext) -> Tuple[WorldState, str]:
    """Predicted world after c and the reason it cannot be done ('' when it can)"""
    cfg = world.config
    obj, other = world.obj(c.i), world.obj(c.j)

    if c.skill is SkillKind.PULL_WITH:
        r = radial_distance(obj)
        near = r - 0.5 * math.hypot(obj.size[0], obj.size[1]) - cfg.contact_margin
        if near > cfg.reach + other.size[0] + cfg.hook_margin:
            return world, f"{c}: object {c.i} is beyond the hook"
        scale = (cfg.reach - cfg.pull_margin) / r
        world, hit = _slide(world, c.i, (obj.x * scale, obj.y * scale))
        return world, f"{c}: pull path blocked by object {hit}" if hit is not None else ""

    if c.skill is SkillKind.PUSH_UNDER:
        supports = support_map(world)
        if not fits_under(stack_top(world, c.i, supports) - world.table.top, other, cfg.rack_clearance):
            return world, f"{c}: stack is too tall for rack {c.j}"
        if not contains_xy(footprint_at(other.x, other.y, obj.size), other.footprint):
            return world, f"{c}: object {c.i} is wider than rack {c.j}"
        world, hit = _slide(world, c.i, (other.x, other.y))
        return world, f"{c}: push path blocked by object {hit}" if hit is not None else ""

    moving = subtree(world, c.i)
    if c.skill is SkillKind.PLACE_ONTO:
        if radial_distance(other) > cfg.reach:
            return world, f"{c}: object {c.j} is out of reach"
        if not _room_at(world, moving, other.x, other.y, obj.size, c.j):
            return world, f"{c}: no room on object {c.j}"
        return _move(world, moving, other.x - obj.x, other.y - obj.y, other.top - obj.z), ""

    gap = 0.5 * sum(cfg.nextto_gap)
    for axis in (0, 1):
        for sign in (1.0, -1.0):
            offset = sign * (0.5 * (obj.size[axis] + other.size[axis]) + gap)
            x, y = (other.x + offset, other.y) if axis == 0 else (other.x, other.y + offset)
            if math.hypot(x, y) <= cfg.reach and _room_at(world, moving, x, y, obj.size, TABLE_ID):
                return _move(world, moving, x - obj.x, y - obj.y, world.table.top - obj.z), ""
    return world, f"{c}: no free spot beside object {c.j}"


def screen_layout(world: WorldState, goal: Iterable[Relation]) -> ScreenReport:
    """Accept a layout when its initial plan can be carried out without collisions"""
    goal = frozenset(goal)
    try:
        steps = tuple(plan(extract_scene_graph(world), goal, MAX_DEPTH))
    except NoPlanFound as e:
        return ScreenReport(ok=False, reason=f"no plan: {e}")
    predicted = world
    for c in steps:
        predicted, reason = _step(predicted, c)
        if reason:
            logger.debug(f"Layout screened out: {reason}")
            return ScreenReport(ok=False, reason=reason, steps=steps)
    if not goal_satisfied(extract_scene_graph(predicted), goal):
        return ScreenReport(ok=False, reason="predicted end state misses the goal", steps=steps)
    return ScreenReport(ok=True, steps=steps)
