"""Value types for the task-parameter space w = (O, E, C, u)."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional, Tuple

TABLE_ID = 0
TABLE_SIZE = (1.0, 1.4, 0.05)
MAX_OBJECTS = 6


class ObjectKind(str, Enum):
    TABLE = "table"
    RACK = "rack"
    CONTAINER = "container"
    HOOK = "hook"
    BOX = "box"
    CAN = "can"

    @property
    def index(self) -> int:
        return OBJECT_KINDS.index(self)


class RelationKind(str, Enum):
    ON = "on"
    UNDER = "under"
    NEXTTO = "nextto"
    INWORKSPACE = "inworkspace"

    @property
    def index(self) -> int:
        return RELATION_KINDS.index(self)

    @property
    def is_binary(self) -> bool:
        return self is not RelationKind.INWORKSPACE


class SkillKind(str, Enum):
    PLACE_ONTO = "place-onto"
    PLACE_NEXTTO = "place-nextto"
    PUSH_UNDER = "push-under"
    PULL_WITH = "pull-with"

    @property
    def index(self) -> int:
        return SKILL_KINDS.index(self)


# Enum orders are part of the serialized layout and of planner tie-breaking
OBJECT_KINDS: Tuple[ObjectKind, ...] = tuple(ObjectKind)
RELATION_KINDS: Tuple[RelationKind, ...] = tuple(RelationKind)
SKILL_KINDS: Tuple[SkillKind, ...] = tuple(SkillKind)


@dataclass(frozen=True)
class ObjectSpec:
    id: int
    kind: ObjectKind
    size: Tuple[float, float, float]

    def to_dict(self) -> Dict[str, Any]:
        return {"id": self.id, "kind": self.kind.value, "size": list(self.size)}

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "ObjectSpec":
        return cls(id=int(d["id"]), kind=ObjectKind(d["kind"]), size=tuple(float(s) for s in d["size"]))


def table_spec() -> ObjectSpec:
    return ObjectSpec(id=TABLE_ID, kind=ObjectKind.TABLE, size=TABLE_SIZE)


@dataclass(frozen=True, order=True)
class Relation:
    kind: RelationKind
    src: int
    dst: Optional[int] = None

    def __str__(self) -> str:
        if self.kind.is_binary:
            return f"{self.kind.value}({self.src}, {self.dst})"
        return f"{self.kind.value}({self.src})"

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind.value, "src": self.src, "dst": self.dst}

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "Relation":
        kind = RelationKind(d["kind"])
        dst = d.get("dst")
        return cls(kind=kind, src=int(d["src"]), dst=None if dst is None or not kind.is_binary else int(dst))


def on(i: int, j: int) -> Relation:
    return Relation(RelationKind.ON, i, j)


def under(i: int, j: int) -> Relation:
    return Relation(RelationKind.UNDER, i, j)


def nextto(i: int, j: int) -> Relation:
    return Relation(RelationKind.NEXTTO, i, j)


def inworkspace(i: int) -> Relation:
    return Relation(RelationKind.INWORKSPACE, i)


@dataclass(frozen=True)
class SkillContext:
    skill: SkillKind
    i: int
    j: int

    def __str__(self) -> str:
        return f"{self.skill.value}({self.i}, {self.j})"

    def to_dict(self) -> Dict[str, Any]:
        return {"skill": self.skill.value, "i": self.i, "j": self.j}

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "SkillContext":
        return cls(skill=SkillKind(d["skill"]), i=int(d["i"]), j=int(d["j"]))


@dataclass(frozen=True)
class EnvContext:
    camera_yaw: float = 0.0
    camera_pitch: float = 0.7
    noise_scale: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {"camera_yaw": self.camera_yaw, "camera_pitch": self.camera_pitch, "noise_scale": self.noise_scale}

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "EnvContext":
        return cls(
            camera_yaw=float(d["camera_yaw"]),
            camera_pitch=float(d["camera_pitch"]),
            noise_scale=float(d["noise_scale"]),
        )


@dataclass(frozen=True)
class TaskParam:
    objects: Tuple[ObjectSpec, ...]
    init_relations: Tuple[Relation, ...]
    contexts: Tuple[SkillContext, ...]
    env: EnvContext = field(default_factory=EnvContext)

    def object(self, object_id: int) -> ObjectSpec:
        for obj in self.objects:
            if obj.id == object_id:
                return obj
        raise KeyError(object_id)

    @property
    def object_ids(self) -> Tuple[int, ...]:
        return tuple(obj.id for obj in self.objects)

    def kinds(self) -> Dict[int, ObjectKind]:
        return {obj.id: obj.kind for obj in self.objects}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "objects": [o.to_dict() for o in self.objects],
            "init_relations": [r.to_dict() for r in self.init_relations],
            "contexts": [c.to_dict() for c in self.contexts],
            "env": self.env.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "TaskParam":
        return cls(
            objects=tuple(ObjectSpec.from_dict(o) for o in d["objects"]),
            init_relations=tuple(Relation.from_dict(r) for r in d.get("init_relations", [])),
            contexts=tuple(SkillContext.from_dict(c) for c in d["contexts"]),
            env=EnvContext.from_dict(d["env"]) if "env" in d else EnvContext(),
        )
