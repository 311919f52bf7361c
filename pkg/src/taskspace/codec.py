"""Fixed-width numeric encoding of a TaskParam.

Layout (float64, width 49):

    [0:6)    presence bit per object slot (slot index == object id)
    [6:30)   per slot: kind index, length, width, height (zero when empty)
    [30:42)  relation codes, 1 + kind*36 + src*6 + dst (0 = empty, dst 0 for inworkspace)
    [42:46)  context codes, 1 + skill*36 + i*6 + j (0 = empty)
    [46:49)  camera yaw, camera pitch, noise scale

Relations and contexts keep their sequence order, so decoding is exact.
"""

import numpy as np

from ..errors import ActiveTaskError
from .params import (
    MAX_OBJECTS,
    OBJECT_KINDS,
    RELATION_KINDS,
    SKILL_KINDS,
    EnvContext,
    ObjectSpec,
    Relation,
    SkillContext,
    TaskParam,
)

MAX_RELATIONS = 12
MAX_CONTEXTS = 4

PRESENCE = slice(0, MAX_OBJECTS)
SLOTS = slice(PRESENCE.stop, PRESENCE.stop + 4 * MAX_OBJECTS)
RELATIONS = slice(SLOTS.stop, SLOTS.stop + MAX_RELATIONS)
CONTEXTS = slice(RELATIONS.stop, RELATIONS.stop + MAX_CONTEXTS)
ENV = slice(CONTEXTS.stop, CONTEXTS.stop + 3)
WIDTH = ENV.stop

_PAIR = MAX_OBJECTS * MAX_OBJECTS


class SerializationError(ActiveTaskError):
    pass


def canonical_serialize(w: TaskParam) -> np.ndarray:
    if len(w.init_relations) > MAX_RELATIONS:
        raise SerializationError(f"{len(w.init_relations)} relations exceed layout capacity {MAX_RELATIONS}")
    if len(w.contexts) > MAX_CONTEXTS:
        raise SerializationError(f"{len(w.contexts)} contexts exceed layout capacity {MAX_CONTEXTS}")

    vec = np.zeros(WIDTH, dtype=np.float64)
    for obj in w.objects:
        if not 0 <= obj.id < MAX_OBJECTS:
            raise SerializationError(f"object id {obj.id} has no slot")
        vec[PRESENCE.start + obj.id] = 1.0
        base = SLOTS.start + 4 * obj.id
        vec[base] = obj.kind.index
        vec[base + 1:base + 4] = obj.size

    for k, rel in enumerate(w.init_relations):
        dst = rel.dst if rel.kind.is_binary else 0
        vec[RELATIONS.start + k] = 1 + rel.kind.index * _PAIR + rel.src * MAX_OBJECTS + dst

    for k, c in enumerate(w.contexts):
        vec[CONTEXTS.start + k] = 1 + c.skill.index * _PAIR + c.i * MAX_OBJECTS + c.j

    vec[ENV] = (w.env.camera_yaw, w.env.camera_pitch, w.env.noise_scale)
    return vec


def canonical_deserialize(vec: np.ndarray) -> TaskParam:
    vec = np.asarray(vec, dtype=np.float64)
    if vec.shape != (WIDTH,):
        raise SerializationError(f"expected width {WIDTH}, got shape {vec.shape}")

    objects = []
    for slot in range(MAX_OBJECTS):
        if vec[PRESENCE.start + slot] == 0.0:
            continue
        base = SLOTS.start + 4 * slot
        kind = OBJECT_KINDS[int(vec[base])]
        size = tuple(float(s) for s in vec[base + 1:base + 4])
        objects.append(ObjectSpec(id=slot, kind=kind, size=size))

    relations = []
    for code in vec[RELATIONS]:
        if code == 0.0:
            break
        kind_idx, rest = divmod(int(code) - 1, _PAIR)
        src, dst = divmod(rest, MAX_OBJECTS)
        kind = RELATION_KINDS[kind_idx]
        relations.append(Relation(kind, src, dst if kind.is_binary else None))

    contexts = []
    for code in vec[CONTEXTS]:
        if code == 0.0:
            break
        skill_idx, rest = divmod(int(code) - 1, _PAIR)
        i, j = divmod(rest, MAX_OBJECTS)
        contexts.append(SkillContext(SKILL_KINDS[skill_idx], i, j))

    yaw, pitch, noise = (float(x) for x in vec[ENV])
    return TaskParam(
        objects=tuple(objects),
        init_relations=tuple(relations),
        contexts=tuple(contexts),
        env=EnvContext(camera_yaw=yaw, camera_pitch=pitch, noise_scale=noise),
    )
