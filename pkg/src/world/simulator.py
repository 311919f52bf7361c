import logging
import math
from collections import deque
from dataclasses import replace
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

from ..errors import ActiveTaskError
from ..taskspace import (
    SKILL_KINDS,
    TABLE_ID,
    ObjectKind,
    RelationKind,
    SkillContext,
    SkillKind,
    TaskParam,
    validate,
)
from .geometry import (
    EPS,
    Footprint,
    check_invariants,
    contains_xy,
    fits_under,
    footprint_at,
    in_workspace,
    is_nextto,
    is_on,
    is_under,
    overlap_xy,
    radial_distance,
    stack_top,
    subtree,
    support_map,
)
from .state import Action, ObjectState, WorldConfig, WorldState, table_state

logger = logging.getLogger(__name__)


class InvalidTaskError(ActiveTaskError):
    pass


class InstantiationInfeasible(ActiveTaskError):
    pass


class UnknownSkill(ActiveTaskError):
    pass


# ---------------------------------------------------------------------------
# Instantiation M(w)
# ---------------------------------------------------------------------------

def instantiate(w: TaskParam, rng: np.random.Generator, config: WorldConfig = WorldConfig()) -> WorldState:
    """Place every object of w on the table so that all initial relations hold"""
    report = validate(w)
    if not report.ok:
        raise InvalidTaskError("; ".join(report.violations))

    specs = {o.id: o for o in w.objects}
    parent: Dict[int, int] = {o.id: TABLE_ID for o in w.objects if o.id != TABLE_ID}
    under_of: Dict[int, int] = {}
    must_reach: Set[int] = set()
    nextto_pairs: List[Tuple[int, int]] = []
    for rel in w.init_relations:
        if rel.kind is RelationKind.ON:
            parent[rel.src] = rel.dst
        elif rel.kind is RelationKind.UNDER:
            under_of[rel.src] = rel.dst
        elif rel.kind is RelationKind.INWORKSPACE:
            must_reach.add(rel.src)
        else:
            nextto_pairs.append((rel.src, rel.dst))
    must_leave = {c.i for c in w.contexts if c.skill is SkillKind.PULL_WITH}

    # Conditions that no amount of resampling can fix
    if must_reach & must_leave:
        raise InstantiationInfeasible("an object must be both inside and outside the reach radius")
    for child, par in parent.items():
        if par == TABLE_ID:
            continue
        c, p = specs[child].size, specs[par].size
        if c[0] > p[0] + EPS or c[1] > p[1] + EPS:
            raise InstantiationInfeasible(f"object {child} does not fit on top of object {par}")
    for obj, rack_id in under_of.items():
        rack = specs[rack_id]
        if rack.kind is not ObjectKind.RACK or parent[obj] != TABLE_ID or parent.get(rack_id) != TABLE_ID:
            raise InstantiationInfeasible(f"under({obj}, {rack_id}) cannot be realised")
        if specs[obj].size[0] > rack.size[0] or specs[obj].size[1] > rack.size[1]:
            raise InstantiationInfeasible(f"object {obj} is wider than rack {rack_id}")
    for a, b in nextto_pairs:
        if parent.get(a) != TABLE_ID or parent.get(b) != TABLE_ID:
            raise InstantiationInfeasible(f"nextto({a}, {b}) needs both objects on the table")

    table = table_state(config)
    free = [i for i in sorted(parent) if parent[i] == TABLE_ID and i not in under_of]
    anchored = _nextto_forest(free, nextto_pairs)
    stacked = _support_order(parent)

    for round_idx in range(config.instantiation_rounds):
        poses: Dict[int, Tuple[float, float]] = {}
        z: Dict[int, float] = {}
        for obj, anchor in anchored:
            size = specs[obj].size
            if anchor is None:
                poses[obj] = _uniform_within(rng, table.footprint, size)
            else:
                poses[obj] = _beside(rng, poses[anchor], specs[anchor].size, size, config.nextto_gap)
            z[obj] = table.top
        for obj, rack_id in sorted(under_of.items()):
            rack_fp = footprint_at(*poses[rack_id], specs[rack_id].size)
            poses[obj] = _uniform_within(rng, rack_fp, specs[obj].size)
            z[obj] = table.top
        for obj in stacked:
            par = parent[obj]
            par_fp = footprint_at(*poses[par], specs[par].size)
            poses[obj] = _uniform_within(rng, par_fp, specs[obj].size)
            z[obj] = z[par] + specs[par].size[2]

        objects = [table] + [
            ObjectState(id=i, kind=specs[i].kind, size=tuple(specs[i].size), pose=(poses[i][0], poses[i][1], z[i], 0.0))
            for i in sorted(poses)
        ]
        world = WorldState(objects=tuple(objects), config=config)
        if _realises(world, w, must_reach, must_leave):
            logger.debug(f"Instantiated task after {round_idx + 1} rounds")
            return world

    raise InstantiationInfeasible(f"no non-overlapping placement found in {config.instantiation_rounds} rounds")


def _nextto_forest(free: Sequence[int], pairs: Iterable[Tuple[int, int]]) -> List[Tuple[int, Optional[int]]]:
    """Placement order over table-level objects; each entry is placed beside its anchor"""
    adjacency: Dict[int, List[int]] = {i: [] for i in free}
    for a, b in pairs:
        if a in adjacency and b in adjacency:
            adjacency[a].append(b)
            adjacency[b].append(a)
    order: List[Tuple[int, Optional[int]]] = []
    seen: Set[int] = set()
    for root in free:
        if root in seen:
            continue
        seen.add(root)
        order.append((root, None))
        queue = deque([root])
        while queue:
            node = queue.popleft()
            for nb in sorted(adjacency[node]):
                if nb not in seen:
                    seen.add(nb)
                    order.append((nb, node))
                    queue.append(nb)
    return order


def _support_order(parent: Dict[int, int]) -> List[int]:
    """Stacked objects, parents before children"""
    order: List[int] = []
    placed = {TABLE_ID} | {i for i, p in parent.items() if p == TABLE_ID}
    pending = sorted(i for i, p in parent.items() if p != TABLE_ID)
    while pending:
        ready = [i for i in pending if parent[i] in placed]
        order.extend(ready)
        placed.update(ready)
        pending = [i for i in pending if i not in placed]
    return order


def _uniform_within(rng: np.random.Generator, region: Footprint, size) -> Tuple[float, float]:
    hx, hy = 0.5 * size[0], 0.5 * size[1]
    x = float(rng.uniform(region[0] + hx, region[1] - hx)) if region[1] - region[0] > 2 * hx else 0.5 * (region[0] + region[1])
    y = float(rng.uniform(region[2] + hy, region[3] - hy)) if region[3] - region[2] > 2 * hy else 0.5 * (region[2] + region[3])
    return x, y


def _beside(rng: np.random.Generator, anchor_xy, anchor_size, size, gap_range) -> Tuple[float, float]:
    lo, hi = gap_range
    margin = 0.1 * (hi - lo)
    gap = float(rng.uniform(lo + margin, hi - margin))
    side = int(rng.integers(4))
    ax, ay = anchor_xy
    if side < 2:
        sign = 1.0 if side == 0 else -1.0
        slack = 0.5 * min(anchor_size[1], size[1])
        return ax + sign * (0.5 * (anchor_size[0] + size[0]) + gap), ay + float(rng.uniform(-slack, slack))
    sign = 1.0 if side == 2 else -1.0
    slack = 0.5 * min(anchor_size[0], size[0])
    return ax + float(rng.uniform(-slack, slack)), ay + sign * (0.5 * (anchor_size[1] + size[1]) + gap)


def _realises(world: WorldState, w: TaskParam, must_reach: Set[int], must_leave: Set[int]) -> bool:
    if check_invariants(world):
        return False
    for rel in w.init_relations:
        if rel.kind is RelationKind.ON and not is_on(world, rel.src, rel.dst):
            return False
        if rel.kind is RelationKind.UNDER and not is_under(world, rel.src, rel.dst):
            return False
        if rel.kind is RelationKind.NEXTTO and not is_nextto(world, rel.src, rel.dst):
            return False
    if any(not in_workspace(world, i) for i in must_reach):
        return False
    if any(in_workspace(world, i) for i in must_leave):
        return False
    return True


# ---------------------------------------------------------------------------
# Primitives
# ---------------------------------------------------------------------------

def execute_primitive(world: WorldState, c: SkillContext, a: Action) -> WorldState:
    """One single-timestep skill execution; invalid grasps leave the poses unchanged"""
    if c.skill not in SKILL_KINDS:
        raise UnknownSkill(f"unknown skill {c.skill!r}")
    world.obj(c.i)
    world.obj(c.j)

    reach_before = frozenset(o.id for o in world.objects if o.id != TABLE_ID and in_workspace(world, o.id))
    handler = _PRIMITIVES[c.skill]
    moved = None
    if c.i != TABLE_ID and c.i != c.j:
        moved = handler(world, c.i, c.j, a)
    objects = moved if moved is not None else world.objects
    return replace(world, objects=tuple(objects), step_count=world.step_count + 1, reach_before=reach_before)


def _band_ok(o: ObjectState, p, band) -> bool:
    """Grasp or contact point relative to o's centroid lies in o's graspable band"""
    hx, hy, h = 0.5 * o.size[0], 0.5 * o.size[1], o.size[2]
    lo, hi = band
    return abs(p[0]) <= hx and abs(p[1]) <= hy and (lo - 0.5) * h <= p[2] <= (hi - 0.5) * h


def _shift(world: WorldState, ids: Set[int], dx: float, dy: float, dz: float) -> Tuple[ObjectState, ...]:
    return tuple(o.moved(dx, dy, dz) if o.id in ids else o for o in world.objects)


def _place_onto(world: WorldState, i: int, j: int, a: Action):
    cfg = world.config
    obj, target = world.obj(i), world.obj(j)
    supports = support_map(world)
    moving = subtree(world, i, supports)
    if j in moving or not in_workspace(world, i) or not _band_ok(obj, a.p_i, cfg.grasp_band):
        return None
    if a.p_j[2] < 0.0:
        return None
    tx, ty = target.x + a.p_j[0], target.y + a.p_j[1]
    if math.hypot(tx, ty) > cfg.reach:
        return None
    new_fp = footprint_at(tx, ty, obj.size)
    if not contains_xy(new_fp, world.table.footprint):
        return None

    beneath = [o for o in world.objects if o.id not in moving and o.id != TABLE_ID and overlap_xy(o.footprint, new_fp)]
    beneath.append(world.table)
    highest = max(beneath, key=lambda o: o.top)
    release = target.top + a.p_j[2]
    if release < highest.top - EPS:
        return None
    if any(o.id != highest.id and o.top > highest.top - EPS for o in beneath):
        return None
    if not contains_xy(new_fp, highest.footprint):
        return None
    return _shift(world, moving, tx - obj.x, ty - obj.y, highest.top - obj.z)


def _place_nextto(world: WorldState, i: int, j: int, a: Action):
    cfg = world.config
    obj, anchor = world.obj(i), world.obj(j)
    supports = support_map(world)
    moving = subtree(world, i, supports)
    if j in moving or not in_workspace(world, i) or not _band_ok(obj, a.p_i, cfg.grasp_band):
        return None
    tx, ty = anchor.x + a.p_j[0], anchor.y + a.p_j[1]
    if math.hypot(tx, ty) > cfg.reach:
        return None
    new_fp = footprint_at(tx, ty, obj.size)
    if not contains_xy(new_fp, world.table.footprint):
        return None
    if any(o.id not in moving and o.id != TABLE_ID and overlap_xy(o.footprint, new_fp) for o in world.objects):
        return None
    return _shift(world, moving, tx - obj.x, ty - obj.y, world.table.top - obj.z)


def _push_under(world: WorldState, i: int, j: int, a: Action):
    cfg = world.config
    obj, rack = world.obj(i), world.obj(j)
    supports = support_map(world)
    if supports[i] != TABLE_ID or not in_workspace(world, i) or not _band_ok(obj, a.p_i, cfg.grasp_band):
        return None
    tx, ty = rack.x + a.p_j[0], rack.y + a.p_j[1]
    dist = math.hypot(tx - obj.x, ty - obj.y)
    if dist < EPS:
        return None
    ux, uy = (tx - obj.x) / dist, (ty - obj.y) / dist
    moving = subtree(world, i, supports)
    travel = _sweep(world, obj, moving, ux, uy, dist, supports)
    if travel <= 0.0:
        return None
    return _shift(world, moving, ux * travel, uy * travel, 0.0)


def _pull_with(world: WorldState, i: int, j: int, a: Action):
    cfg = world.config
    obj, hook = world.obj(i), world.obj(j)
    supports = support_map(world)
    if hook.kind is not ObjectKind.HOOK or not in_workspace(world, j) or not _band_ok(hook, a.p_j, cfg.grasp_band):
        return None
    if supports[i] != TABLE_ID or in_workspace(world, i):
        return None
    # head sits at the hook's +x end; the lever is what sticks out past the grasp
    lever = max(0.0, 0.5 * hook.size[0] - a.p_j[0])
    qx, qy = obj.x + a.p_i[0], obj.y + a.p_i[1]
    fp = obj.footprint
    m = cfg.contact_margin
    if not (fp[0] - m <= qx <= fp[1] + m and fp[2] - m <= qy <= fp[3] + m):
        return None
    if math.hypot(qx, qy) > cfg.reach + lever + cfg.hook_margin:
        return None
    r = radial_distance(obj)
    dist = r - (cfg.reach - cfg.pull_margin)
    ux, uy = -obj.x / r, -obj.y / r
    moving = subtree(world, i, supports)
    travel = _sweep(world, obj, moving, ux, uy, dist, supports)
    if travel <= 0.0:
        return None
    return _shift(world, moving, ux * travel, uy * travel, 0.0)


def _sweep(world: WorldState, obj: ObjectState, moving: Set[int], ux: float, uy: float, dist: float, supports) -> float:
    """Distance obj can slide along (ux, uy) before touching an obstacle or the table edge"""
    cfg = world.config
    height = stack_top(world, obj.id, supports) - world.table.top
    hx, hy = 0.5 * obj.size[0], 0.5 * obj.size[1]
    cx, cy = obj.x, obj.y
    t_max = dist

    for o in world.objects:
        if o.id in moving or o.id == TABLE_ID or supports[o.id] != TABLE_ID:
            continue
        if o.kind is ObjectKind.RACK and fits_under(height, o, cfg.rack_clearance):
            continue
        ex, ey = hx + 0.5 * o.size[0], hy + 0.5 * o.size[1]
        t_enter, t_exit = -math.inf, math.inf
        blocked = True
        for c, u, oc, e in ((cx, ux, o.x, ex), (cy, uy, o.y, ey)):
            if abs(u) < 1e-12:
                if abs(c - oc) >= e - EPS:
                    blocked = False
                    break
                continue
            t1, t2 = (oc - e - c) / u, (oc + e - c) / u
            t_enter = max(t_enter, min(t1, t2))
            t_exit = min(t_exit, max(t1, t2))
        if blocked and t_enter < t_exit - EPS and t_exit > EPS and t_enter < t_max:
            t_max = max(0.0, t_enter)

    tfp = world.table.footprint
    for c, u, h, lo, hi in ((cx, ux, hx, tfp[0], tfp[1]), (cy, uy, hy, tfp[2], tfp[3])):
        if u > 1e-12:
            t_max = min(t_max, (hi - h - c) / u)
        elif u < -1e-12:
            t_max = min(t_max, (lo + h - c) / u)
    return max(0.0, t_max)


_PRIMITIVES = {
    SkillKind.PLACE_ONTO: _place_onto,
    SkillKind.PLACE_NEXTTO: _place_nextto,
    SkillKind.PUSH_UNDER: _push_under,
    SkillKind.PULL_WITH: _pull_with,
}


# ---------------------------------------------------------------------------
# Rewards R_k
# ---------------------------------------------------------------------------

def success(k: SkillKind, world_after: WorldState, c: SkillContext) -> int:
    """Binary reward of skill k for context c in the post-step world"""
    if k not in SKILL_KINDS:
        raise UnknownSkill(f"unknown skill {k!r}")
    i, j = c.i, c.j
    if i == j or i == TABLE_ID:
        return 0
    if k is SkillKind.PLACE_ONTO:
        return int(is_on(world_after, i, j))
    if k is SkillKind.PLACE_NEXTTO:
        return int(is_nextto(world_after, i, j))
    if k is SkillKind.PUSH_UNDER:
        obj, rack = world_after.obj(i), world_after.obj(j)
        tall = obj.size[2] >= world_after.config.rack_clearance * rack.size[2]
        return int(not tall and is_under(world_after, i, j))
    before = world_after.reach_before
    return int(before is not None and i not in before and in_workspace(world_after, i))
