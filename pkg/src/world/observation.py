import logging
import math
from typing import Dict, List, Tuple

import numpy as np

from ..taskspace import TABLE_ID, EnvContext, ObjectKind
from .geometry import Z_TOL, scene_relations
from .state import ObjectState, Observation, WorldState

logger = logging.getLogger(__name__)

# Outward normals of the faces a camera above the table can see
_TOP = (0.0, 0.0, 1.0)
_SIDES = ((1.0, 0.0, 0.0), (-1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, -1.0, 0.0))


def camera_direction(env: EnvContext) -> np.ndarray:
    """Unit vector pointing from the scene toward the camera"""
    cp, sp = math.cos(env.camera_pitch), math.sin(env.camera_pitch)
    return np.array([cp * math.cos(env.camera_yaw), cp * math.sin(env.camera_yaw), sp])


def _visible_faces(o: ObjectState, cam: np.ndarray, top_only: bool) -> List[Tuple[Tuple[float, float, float], float]]:
    lx, ly, h = o.size
    faces = [(_TOP, lx * ly * float(cam[2]))]
    if not top_only:
        for n in _SIDES:
            facing = float(np.dot(n, cam))
            if facing <= 0.0:
                continue
            area = (ly if n[0] else lx) * h
            faces.append((n, area * facing))
    return [(n, w) for n, w in faces if w > 0.0]


def _sample_face(o: ObjectState, normal, count: int, rng: np.random.Generator) -> np.ndarray:
    lx, ly, h = o.size
    u = rng.uniform(-0.5, 0.5, size=(count, 3))
    pts = np.empty((count, 3))
    pts[:, 0] = o.x + u[:, 0] * lx
    pts[:, 1] = o.y + u[:, 1] * ly
    pts[:, 2] = o.z + (u[:, 2] + 0.5) * h
    if normal[0]:
        pts[:, 0] = o.x + 0.5 * lx * normal[0]
    elif normal[1]:
        pts[:, 1] = o.y + 0.5 * ly * normal[1]
    else:
        pts[:, 2] = o.top
    return pts


def _occluded(points: np.ndarray, owner: int, world: WorldState) -> np.ndarray:
    hidden = np.zeros(len(points), dtype=bool)
    for y in world.objects:
        if y.id in (owner, TABLE_ID):
            continue
        x0, x1, y0, y1 = y.footprint
        inside = (points[:, 0] > x0) & (points[:, 0] < x1) & (points[:, 1] > y0) & (points[:, 1] < y1)
        if y.kind is ObjectKind.RACK:
            below = points[:, 2] < y.top - Z_TOL
        else:
            below = (points[:, 2] >= y.z - Z_TOL) & (points[:, 2] < y.top - Z_TOL)
        hidden |= inside & below
    return hidden


def observe(world: WorldState, env: EnvContext, rng: np.random.Generator) -> Observation:
    """Segmented point cloud of the visible surfaces, with isotropic Gaussian noise"""
    cam = camera_direction(env)
    cfg = world.config
    chunks: List[np.ndarray] = []
    owners: List[np.ndarray] = []

    for o in world.objects:
        is_table = o.id == TABLE_ID
        total = cfg.table_points if is_table else cfg.points_per_object
        faces = _visible_faces(o, cam, top_only=is_table)
        weights = np.array([w for _, w in faces])
        counts = rng.multinomial(total, weights / weights.sum())
        pts = np.concatenate([_sample_face(o, n, int(k), rng) for (n, _), k in zip(faces, counts)], axis=0)
        keep = ~_occluded(pts, o.id, world)
        chunks.append(pts[keep])
        owners.append(np.full(int(keep.sum()), o.id, dtype=np.int64))

    points = np.concatenate(chunks, axis=0)
    owner = np.concatenate(owners)
    # drawn even at zero noise so the stream position does not depend on the scale
    noise = rng.normal(0.0, 1.0, size=points.shape)
    points = points + env.noise_scale * noise

    masks: Dict[int, np.ndarray] = {o.id: np.flatnonzero(owner == o.id) for o in world.objects}
    empty = [i for i, m in masks.items() if len(m) == 0]
    if empty:
        logger.debug(f"Objects fully occluded: {empty}")
    return Observation(
        points=points,
        masks=masks,
        kinds={o.id: o.kind for o in world.objects},
        relations=scene_relations(world),
    )
