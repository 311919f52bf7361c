import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..errors import ActiveTaskError
from .params import (
    MAX_OBJECTS,
    TABLE_ID,
    TABLE_SIZE,
    EnvContext,
    ObjectKind,
    ObjectSpec,
    Relation,
    RelationKind,
    SkillContext,
    SkillKind,
    TaskParam,
    table_spec,
)

logger = logging.getLogger(__name__)

# Kinds that can carry other objects in a sampled initial scene
SUPPORT_KINDS = (ObjectKind.RACK, ObjectKind.CONTAINER, ObjectKind.BOX)

PITCH_RANGE = (0.2, 1.2)
NOISE_RANGE = (0.0, 0.01)


class PriorExhaustedError(ActiveTaskError):
    pass


class PriorConfig(BaseModel):
    """Parameters of the task prior p(w)"""

    model_config = ConfigDict(frozen=True)

    object_count: Tuple[int, int] = (2, 6)
    kind_weights: Dict[ObjectKind, float] = Field(
        default_factory=lambda: {
            ObjectKind.RACK: 1.0,
            ObjectKind.CONTAINER: 1.0,
            ObjectKind.HOOK: 1.0,
            ObjectKind.BOX: 1.0,
            ObjectKind.CAN: 1.0,
        }
    )
    # (length, width, height) ranges in meters, each a (low, high) pair
    size_ranges: Dict[ObjectKind, Tuple[Tuple[float, float], Tuple[float, float], Tuple[float, float]]] = Field(
        default_factory=lambda: {
            ObjectKind.RACK: ((0.25, 0.40), (0.20, 0.35), (0.18, 0.30)),
            ObjectKind.CONTAINER: ((0.10, 0.20), (0.10, 0.20), (0.03, 0.06)),
            ObjectKind.HOOK: ((0.30, 0.45), (0.04, 0.08), (0.03, 0.05)),
            ObjectKind.BOX: ((0.04, 0.10), (0.04, 0.10), (0.05, 0.15)),
            ObjectKind.CAN: ((0.05, 0.09), (0.05, 0.09), (0.08, 0.20)),
        }
    )
    p_stack: float = 0.3
    p_nextto: float = 0.2
    skill_weights: Dict[SkillKind, float] = Field(default_factory=lambda: {s: 1.0 for s in SkillKind})
    contexts_per_task: int = 1
    camera_yaw: Tuple[float, float] = (-math.pi, math.pi)
    camera_pitch: Tuple[float, float] = PITCH_RANGE
    noise_scale: Tuple[float, float] = NOISE_RANGE
    max_attempts: int = 1000

    @model_validator(mode="after")
    def _check(self) -> "PriorConfig":
        lo, hi = self.object_count
        if not 2 <= lo <= hi <= MAX_OBJECTS:
            raise ValueError(f"object_count must lie within [2, {MAX_OBJECTS}], got {self.object_count}")
        if ObjectKind.TABLE in self.kind_weights:
            raise ValueError("the table is always slot 0 and cannot be sampled as a kind")
        if not any(w > 0 for w in self.kind_weights.values()):
            raise ValueError("kind_weights needs at least one positive weight")
        if not any(w > 0 for w in self.skill_weights.values()):
            raise ValueError("skill_weights needs at least one positive weight")
        for kind, w in self.kind_weights.items():
            if w > 0 and kind not in self.size_ranges:
                raise ValueError(f"no size range configured for {kind.value}")
        if not 0.0 <= self.p_stack <= 1.0 or not 0.0 <= self.p_nextto <= 1.0:
            raise ValueError("relation probabilities must lie in [0, 1]")
        if self.contexts_per_task < 1:
            raise ValueError("contexts_per_task must be at least 1")
        return self

    def object_count_probs(self) -> Dict[int, float]:
        lo, hi = self.object_count
        n = hi - lo + 1
        return {k: 1.0 / n for k in range(lo, hi + 1)}


def _weighted_choice(rng: np.random.Generator, weights: Dict) -> object:
    keys = [k for k, w in weights.items() if w > 0]
    probs = np.array([weights[k] for k in keys], dtype=float)
    return keys[int(rng.choice(len(keys), p=probs / probs.sum()))]


def sample_prior(rng: np.random.Generator, config: PriorConfig = PriorConfig()) -> TaskParam:
    """Draw one structurally valid TaskParam from p(w)"""
    for attempt in range(config.max_attempts):
        lo, hi = config.object_count
        n = int(rng.integers(lo, hi + 1))

        objects: List[ObjectSpec] = [table_spec()]
        for k in range(1, n):
            kind = _weighted_choice(rng, config.kind_weights)
            size = tuple(float(rng.uniform(a, b)) for a, b in config.size_ranges[kind])
            objects.append(ObjectSpec(id=k, kind=kind, size=size))

        relations: List[Relation] = []
        table_level: List[int] = []
        for obj in objects[1:]:
            supports = [o.id for o in objects[1:obj.id] if o.kind in SUPPORT_KINDS]
            if supports and rng.random() < config.p_stack:
                relations.append(Relation(RelationKind.ON, obj.id, int(rng.choice(supports))))
            else:
                relations.append(Relation(RelationKind.ON, obj.id, TABLE_ID))
                table_level.append(obj.id)

        for k in table_level:
            partners = [t for t in table_level if t < k]
            if partners and rng.random() < config.p_nextto:
                relations.append(Relation(RelationKind.NEXTTO, k, int(rng.choice(partners))))

        contexts = []
        movable = [o.id for o in objects[1:]]
        for _ in range(config.contexts_per_task):
            skill = _weighted_choice(rng, config.skill_weights)
            i = int(rng.choice(movable))
            j = int(rng.choice([o.id for o in objects if o.id != i]))
            contexts.append(SkillContext(skill=skill, i=i, j=j))

        env = EnvContext(
            camera_yaw=float(rng.uniform(*config.camera_yaw)),
            camera_pitch=float(rng.uniform(*config.camera_pitch)),
            noise_scale=float(rng.uniform(*config.noise_scale)),
        )
        w = TaskParam(
            objects=tuple(objects),
            init_relations=tuple(relations),
            contexts=tuple(contexts),
            env=env,
        )
        report = validate(w)
        if report.ok:
            return w
        logger.debug(f"Prior attempt {attempt} rejected: {report.violations}")

    raise PriorExhaustedError(f"no valid task after {config.max_attempts} attempts")


@dataclass
class ValidationReport:
    violations: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def validate(w: TaskParam) -> ValidationReport:
    """Structural checks only; physical feasibility is learned"""
    report = ValidationReport()
    v = report.violations

    ids = [o.id for o in w.objects]
    if len(set(ids)) != len(ids):
        v.append("duplicate object id")
    if not 2 <= len(w.objects) <= MAX_OBJECTS:
        v.append(f"object count {len(w.objects)} outside [2, {MAX_OBJECTS}]")
    for o in w.objects:
        if not 0 <= o.id < MAX_OBJECTS:
            v.append(f"object id {o.id} outside [0, {MAX_OBJECTS - 1}]")
        if len(o.size) != 3 or any(not s > 0 for s in o.size):
            v.append(f"object {o.id} has non-positive size")
        if o.kind is ObjectKind.TABLE and o.id != TABLE_ID:
            v.append(f"table must have id {TABLE_ID}")
        if o.id == TABLE_ID and (o.kind is not ObjectKind.TABLE or tuple(o.size) != TABLE_SIZE):
            v.append("object 0 must be the fixed-size table")
    if TABLE_ID not in ids:
        v.append("missing table")

    known = set(ids)
    supports: Dict[int, int] = {}
    for rel in w.init_relations:
        if rel.src not in known:
            v.append(f"dangling id {rel.src} in {rel}")
        if rel.kind.is_binary:
            if rel.dst is None or rel.dst not in known:
                v.append(f"dangling id {rel.dst} in {rel}")
            elif rel.src == rel.dst:
                v.append(f"self relation {rel}")
        if rel.kind is RelationKind.ON:
            if rel.src == TABLE_ID:
                v.append("the table cannot rest on another object")
            if rel.src in supports and supports[rel.src] != rel.dst:
                v.append(f"object {rel.src} has more than one support")
            supports[rel.src] = rel.dst

    if _has_support_cycle(supports):
        v.append("support cycle")

    if not w.contexts:
        v.append("no skill context")
    for c in w.contexts:
        if c.i not in known or c.j not in known:
            v.append(f"dangling id in context {c}")
        if c.i == c.j:
            v.append("i equals j")
        if c.i == TABLE_ID:
            v.append("context target i is the table")

    env = w.env
    if not PITCH_RANGE[0] <= env.camera_pitch <= PITCH_RANGE[1]:
        v.append(f"camera pitch {env.camera_pitch} outside {PITCH_RANGE}")
    if not NOISE_RANGE[0] <= env.noise_scale <= NOISE_RANGE[1]:
        v.append(f"noise scale {env.noise_scale} outside {NOISE_RANGE}")
    return report


def _has_support_cycle(supports: Dict[int, int]) -> bool:
    for start in supports:
        seen = {start}
        node = supports.get(start)
        while node is not None:
            if node in seen:
                return True
            seen.add(node)
            node = supports.get(node)
    return False
