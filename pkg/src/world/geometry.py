"""Axis-aligned footprint geometry and the spatial predicates of the scene graph."""

import math
from typing import Dict, FrozenSet, List, Optional, Set, Tuple

from ..taskspace import TABLE_ID, ObjectKind, Relation, RelationKind
from .state import ObjectState, WorldState

EPS = 1e-9
Z_TOL = 1e-6

Footprint = Tuple[float, float, float, float]


def footprint_at(x: float, y: float, size) -> Footprint:
    hx, hy = 0.5 * size[0], 0.5 * size[1]
    return (x - hx, x + hx, y - hy, y + hy)


def overlap_xy(a: Footprint, b: Footprint) -> bool:
    """True when the open interiors intersect by more than EPS on both axes"""
    return min(a[1], b[1]) - max(a[0], b[0]) > EPS and min(a[3], b[3]) - max(a[2], b[2]) > EPS


def contains_xy(inner: Footprint, outer: Footprint) -> bool:
    return (
        inner[0] >= outer[0] - EPS
        and inner[1] <= outer[1] + EPS
        and inner[2] >= outer[2] - EPS
        and inner[3] <= outer[3] + EPS
    )


def box_gap(a: Footprint, b: Footprint) -> float:
    """Euclidean distance between two rectangles, 0 when they touch or overlap"""
    dx = max(0.0, max(a[0], b[0]) - min(a[1], b[1]))
    dy = max(0.0, max(a[2], b[2]) - min(a[3], b[3]))
    return math.hypot(dx, dy)


def radial_distance(o: ObjectState) -> float:
    return math.hypot(o.x, o.y)


def in_workspace(world: WorldState, object_id: int) -> bool:
    """Closed ball: a centroid exactly at the reach radius counts as inside"""
    return radial_distance(world.obj(object_id)) <= world.config.reach


def parent_of(world: WorldState, o: ObjectState) -> Optional[int]:
    """The object whose top face carries o, or None for the table itself"""
    if o.id == TABLE_ID:
        return None
    fp = o.footprint
    best = None
    for p in world.objects:
        if p.id == o.id or abs(o.z - p.top) > Z_TOL or not contains_xy(fp, p.footprint):
            continue
        if best is None or best == TABLE_ID:
            best = p.id
    return best


def support_map(world: WorldState) -> Dict[int, Optional[int]]:
    return {o.id: parent_of(world, o) for o in world.objects}


def subtree(world: WorldState, object_id: int, supports: Optional[Dict[int, Optional[int]]] = None) -> Set[int]:
    """object_id together with everything resting on it, transitively"""
    supports = supports if supports is not None else support_map(world)
    members = {object_id}
    grew = True
    while grew:
        grew = False
        for child, par in supports.items():
            if par in members and child not in members:
                members.add(child)
                grew = True
    return members


def stack_top(world: WorldState, object_id: int, supports: Optional[Dict[int, Optional[int]]] = None) -> float:
    return max(world.obj(k).top for k in subtree(world, object_id, supports))


def fits_under(stack_height: float, rack: ObjectState, clearance: float) -> bool:
    return stack_height < clearance * rack.size[2] - EPS


def is_on(world: WorldState, i: int, j: int) -> bool:
    if i == j or i == TABLE_ID:
        return False
    a, b = world.obj(i), world.obj(j)
    return abs(a.z - b.top) <= Z_TOL and contains_xy(a.footprint, b.footprint)


def is_under(world: WorldState, i: int, j: int, supports=None) -> bool:
    if i == j or i == TABLE_ID:
        return False
    a, rack = world.obj(i), world.obj(j)
    if rack.kind is not ObjectKind.RACK or a.z < rack.z - Z_TOL or a.z >= rack.top:
        return False
    height = stack_top(world, i, supports) - rack.z
    return contains_xy(a.footprint, rack.footprint) and fits_under(height, rack, world.config.rack_clearance)


def is_nextto(world: WorldState, i: int, j: int) -> bool:
    if i == j or TABLE_ID in (i, j):
        return False
    if not (is_on(world, i, TABLE_ID) and is_on(world, j, TABLE_ID)):
        return False
    lo, hi = world.config.nextto_gap
    gap = box_gap(world.obj(i).footprint, world.obj(j).footprint)
    return lo - EPS <= gap <= hi + EPS


def scene_relations(world: WorldState) -> FrozenSet[Relation]:
    """All on/under/nextto/inworkspace edges holding in the world"""
    supports = support_map(world)
    edges: List[Relation] = []
    ids = world.ids
    for i in ids:
        if i == TABLE_ID:
            continue
        if in_workspace(world, i):
            edges.append(Relation(RelationKind.INWORKSPACE, i))
        for j in ids:
            if j == i:
                continue
            if is_on(world, i, j):
                edges.append(Relation(RelationKind.ON, i, j))
            if is_under(world, i, j, supports):
                edges.append(Relation(RelationKind.UNDER, i, j))
            if is_nextto(world, i, j):
                edges.append(Relation(RelationKind.NEXTTO, i, j))
    return frozenset(edges)


def check_invariants(world: WorldState) -> List[str]:
    """Overlap and support violations; empty when the world is consistent"""
    problems: List[str] = []
    if world.step_count < 0:
        problems.append("negative step count")
    table_fp = world.table.footprint
    supports = support_map(world)
    clearance = world.config.rack_clearance
    for o in world.objects:
        if o.id == TABLE_ID:
            continue
        if supports[o.id] is None:
            problems.append(f"object {o.id} is not supported")
        if not contains_xy(o.footprint, table_fp):
            problems.append(f"object {o.id} leaves the table")

    objs = [o for o in world.objects if o.id != TABLE_ID]
    for n, a in enumerate(objs):
        for b in objs[n + 1:]:
            if supports[a.id] != supports[b.id] or not overlap_xy(a.footprint, b.footprint):
                continue
            if b.kind is ObjectKind.RACK and fits_under(stack_top(world, a.id, supports) - b.z, b, clearance):
                continue
            if a.kind is ObjectKind.RACK and fits_under(stack_top(world, b.id, supports) - a.z, a, clearance):
                continue
            problems.append(f"objects {a.id} and {b.id} overlap")
    return problems
