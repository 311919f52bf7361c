from dataclasses import dataclass, replace
from typing import Dict, FrozenSet, Iterable, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from ..errors import ActiveTaskError
from ..taskspace import TABLE_ID, TABLE_SIZE, ObjectKind

Vec3 = Tuple[float, float, float]
Pose = Tuple[float, float, float, float]


class UnknownObject(ActiveTaskError):
    pass


class WorldConfig(BaseModel):
    """Geometry constants of the tabletop world (meters)"""

    model_config = ConfigDict(frozen=True)

    reach: float = 0.8
    rack_clearance: float = 0.6
    grasp_band: Tuple[float, float] = (0.2, 0.8)
    nextto_gap: Tuple[float, float] = (0.01, 0.10)
    table_center: Tuple[float, float] = (0.7, 0.0)
    # pull-with: hook head tolerance and stopping distance inside the reach radius
    hook_margin: float = 0.05
    pull_margin: float = 0.05
    contact_margin: float = 0.05
    action_limit: float = 0.5
    instantiation_rounds: int = 200
    points_per_object: int = 64
    table_points: int = 128


@dataclass(frozen=True)
class ObjectState:
    id: int
    kind: ObjectKind
    size: Vec3
    pose: Pose

    @property
    def x(self) -> float:
        return self.pose[0]

    @property
    def y(self) -> float:
        return self.pose[1]

    @property
    def z(self) -> float:
        return self.pose[2]

    @property
    def top(self) -> float:
        return self.pose[2] + self.size[2]

    @property
    def centroid(self) -> Vec3:
        return (self.pose[0], self.pose[1], self.pose[2] + 0.5 * self.size[2])

    @property
    def footprint(self) -> Tuple[float, float, float, float]:
        hx, hy = 0.5 * self.size[0], 0.5 * self.size[1]
        return (self.pose[0] - hx, self.pose[0] + hx, self.pose[1] - hy, self.pose[1] + hy)

    def moved(self, dx: float, dy: float, dz: float) -> "ObjectState":
        x, y, z, yaw = self.pose
        return replace(self, pose=(x + dx, y + dy, z + dz, yaw))

    def to_dict(self) -> Dict:
        return {"id": self.id, "kind": self.kind.value, "size": list(self.size), "pose": list(self.pose)}


@dataclass(frozen=True)
class WorldState:
    objects: Tuple[ObjectState, ...]
    config: WorldConfig = WorldConfig()
    step_count: int = 0
    # ids inside the reach radius before the most recent step (None before any step)
    reach_before: Optional[FrozenSet[int]] = None

    def obj(self, object_id: int) -> ObjectState:
        for o in self.objects:
            if o.id == object_id:
                return o
        raise UnknownObject(f"no object with id {object_id}")

    @property
    def ids(self) -> Tuple[int, ...]:
        return tuple(o.id for o in self.objects)

    @property
    def table(self) -> ObjectState:
        return self.obj(TABLE_ID)

    def with_objects(self, objects: Iterable[ObjectState]) -> "WorldState":
        return replace(self, objects=tuple(sorted(objects, key=lambda o: o.id)))

    def to_dict(self) -> Dict:
        return {"objects": [o.to_dict() for o in self.objects], "step_count": self.step_count}


def table_state(config: WorldConfig) -> ObjectState:
    cx, cy = config.table_center
    return ObjectState(id=TABLE_ID, kind=ObjectKind.TABLE, size=TABLE_SIZE, pose=(cx, cy, 0.0, 0.0))


@dataclass(frozen=True)
class Action:
    p_i: Vec3
    p_j: Vec3

    @classmethod
    def from_vector(cls, v, limit: float = 0.5) -> "Action":
        v = np.clip(np.asarray(v, dtype=np.float64).reshape(6), -limit, limit)
        return cls(p_i=tuple(float(x) for x in v[:3]), p_j=tuple(float(x) for x in v[3:]))

    def vector(self) -> np.ndarray:
        return np.array(self.p_i + self.p_j, dtype=np.float64)


@dataclass(frozen=True, eq=False)
class Observation:
    points: np.ndarray
    masks: Dict[int, np.ndarray]
    kinds: Dict[int, ObjectKind]
    relations: FrozenSet

    def object_points(self, object_id: int) -> np.ndarray:
        return self.points[self.masks[object_id]]
