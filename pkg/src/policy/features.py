import logging
import math

import numpy as np

from ..errors import ActiveTaskError
from ..taskspace import OBJECT_KINDS, Relation, RelationKind, SkillContext
from ..world import Observation

logger = logging.getLogger(__name__)

PER_OBJECT = 16
FEATURE_DIM = 2 * PER_OBJECT + 4
MIN_EXTENT = 1e-3


class EmptyMask(ActiveTaskError):
    pass


def _masked_points(obs: Observation, object_id: int) -> np.ndarray:
    pts = obs.object_points(object_id)
    if len(pts) == 0:
        raise EmptyMask(f"object {object_id} has no visible points")
    return pts


def _object_block(obs: Observation, object_id: int, pts: np.ndarray) -> np.ndarray:
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    centroid = pts.mean(axis=0)
    extents = np.maximum(hi - lo, MIN_EXTENT)
    kind = np.zeros(len(OBJECT_KINDS))
    kind[obs.kinds[object_id].index] = 1.0
    reachable = float(Relation(RelationKind.INWORKSPACE, object_id) in obs.relations)
    clear = float(not any(r.kind is RelationKind.ON and r.dst == object_id for r in obs.relations))
    radial = math.hypot(centroid[0], centroid[1])
    return np.concatenate([centroid, extents, kind, [reachable, clear, lo[2], radial]])


def featurize(obs: Observation, c: SkillContext) -> np.ndarray:
    """36-d descriptor of the two target objects, read from their masked points only"""
    pts_i = _masked_points(obs, c.i)
    pts_j = _masked_points(obs, c.j)
    block_i = _object_block(obs, c.i, pts_i)
    block_j = _object_block(obs, c.j, pts_j)
    lo_i, hi_i = pts_i.min(axis=0), pts_i.max(axis=0)
    lo_j, hi_j = pts_j.min(axis=0), pts_j.max(axis=0)
    displacement = block_j[:3] - block_i[:3]
    dx = max(0.0, max(lo_i[0], lo_j[0]) - min(hi_i[0], hi_j[0]))
    dy = max(0.0, max(lo_i[1], lo_j[1]) - min(hi_i[1], hi_j[1]))
    f = np.concatenate([block_i, block_j, displacement, [math.hypot(dx, dy)]])
    assert f.shape == (FEATURE_DIM,)
    return f
