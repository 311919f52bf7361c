"""Relational task encoder phi(w).

Objects are embedded by a shared vertex layer, every relation contributes
g(phi_o(src), phi_o(dst), phi_e(kind)) and the terms are summed per task.
Skill contexts contribute (phi_k(skill), phi_o(i), phi_o(j)), also summed, and
the camera/noise context has its own layer. A linear fusion layer maps the
concatenation to the task embedding.

Inputs are put in a canonical order before evaluation (objects by kind and
size, relations and contexts by kind and endpoint attributes), so relabeling
objects or reordering relations gives bit-identical embeddings.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Sequence, Tuple

import numpy as np

from ..learnsub import BoundParams, MLPArch, ParamVector, init_mlp, mlp_forward, tape
from ..learnsub.tape import Tensor
from ..taskspace import OBJECT_KINDS, RELATION_KINDS, SKILL_KINDS, TaskParam

logger = logging.getLogger(__name__)

NODE_DIM = 16
REL_DIM = 32
EMBED_DIM = 64
SIZE_SCALE = 10.0
NOISE_SCALE = 100.0

VERTEX_ARCH = MLPArch((len(OBJECT_KINDS) + 3, NODE_DIM), prefix="phi_o/")
EDGE_ARCH = MLPArch((len(RELATION_KINDS), NODE_DIM), prefix="phi_e/")
SKILL_ARCH = MLPArch((len(SKILL_KINDS), NODE_DIM), prefix="phi_k/")
ENV_ARCH = MLPArch((4, NODE_DIM), prefix="phi_env/")
RELATION_ARCH = MLPArch((3 * NODE_DIM, REL_DIM, REL_DIM), prefix="g/")
FUSION_ARCH = MLPArch((REL_DIM + 3 * NODE_DIM + NODE_DIM, EMBED_DIM), prefix="fusion/")
ARCHS = (VERTEX_ARCH, EDGE_ARCH, SKILL_ARCH, ENV_ARCH, RELATION_ARCH, FUSION_ARCH)


@dataclass
class TaskEncoder:
    params: ParamVector

    @staticmethod
    def describe() -> List[Dict]:
        return [a.describe() for a in ARCHS]


def new_encoder(rng: np.random.Generator) -> TaskEncoder:
    arrays: Dict[str, np.ndarray] = {}
    for arch in ARCHS:
        arrays.update(init_mlp(rng, arch))
    return TaskEncoder(ParamVector.from_arrays(arrays))


@dataclass(frozen=True)
class TaskGraph:
    """Index form of one task with objects in canonical order"""

    objects: np.ndarray
    edge_kinds: np.ndarray
    edge_src: np.ndarray
    edge_dst: np.ndarray
    ctx_skills: np.ndarray
    ctx_i: np.ndarray
    ctx_j: np.ndarray
    env: np.ndarray


def _object_row(kind_index: int, size) -> Tuple[float, ...]:
    onehot = [0.0] * len(OBJECT_KINDS)
    onehot[kind_index] = 1.0
    return tuple(onehot) + tuple(SIZE_SCALE * float(s) for s in size)


@lru_cache(maxsize=65536)
def task_graph(w: TaskParam) -> TaskGraph:
    rows = {o.id: _object_row(o.kind.index, o.size) for o in w.objects}
    order = sorted(rows, key=lambda i: rows[i])
    slot = {object_id: n for n, object_id in enumerate(order)}

    edges = sorted(
        (r.kind.index, rows[r.src], rows[r.dst if r.kind.is_binary else r.src], r.src, r.dst if r.kind.is_binary else r.src)
        for r in w.init_relations
    )
    contexts = sorted((c.skill.index, rows[c.i], rows[c.j], c.i, c.j) for c in w.contexts)
    env = w.env
    return TaskGraph(
        objects=np.array([rows[i] for i in order], dtype=np.float64).reshape(len(order), -1),
        edge_kinds=np.array([e[0] for e in edges], dtype=np.int64),
        edge_src=np.array([slot[e[3]] for e in edges], dtype=np.int64),
        edge_dst=np.array([slot[e[4]] for e in edges], dtype=np.int64),
        ctx_skills=np.array([c[0] for c in contexts], dtype=np.int64),
        ctx_i=np.array([slot[c[3]] for c in contexts], dtype=np.int64),
        ctx_j=np.array([slot[c[4]] for c in contexts], dtype=np.int64),
        env=np.array([
            math.cos(env.camera_yaw),
            math.sin(env.camera_yaw),
            env.camera_pitch,
            NOISE_SCALE * env.noise_scale,
        ]),
    )


def _onehot(index: np.ndarray, width: int) -> np.ndarray:
    out = np.zeros((len(index), width))
    out[np.arange(len(index)), index] = 1.0
    return out


def encode_batch(p: BoundParams, tasks: Sequence[TaskParam]) -> Tensor:
    """(len(tasks), 64) embeddings as a differentiable tensor"""
    graphs = [task_graph(w) for w in tasks]
    offsets = np.cumsum([0] + [len(g.objects) for g in graphs])
    objects = np.concatenate([g.objects for g in graphs], axis=0)
    edge_task = np.concatenate([np.full(len(g.edge_kinds), b, dtype=np.int64) for b, g in enumerate(graphs)])
    ctx_task = np.concatenate([np.full(len(g.ctx_skills), b, dtype=np.int64) for b, g in enumerate(graphs)])
    src = np.concatenate([g.edge_src + offsets[b] for b, g in enumerate(graphs)])
    dst = np.concatenate([g.edge_dst + offsets[b] for b, g in enumerate(graphs)])
    ci = np.concatenate([g.ctx_i + offsets[b] for b, g in enumerate(graphs)])
    cj = np.concatenate([g.ctx_j + offsets[b] for b, g in enumerate(graphs)])
    edge_kinds = np.concatenate([g.edge_kinds for g in graphs])
    skills = np.concatenate([g.ctx_skills for g in graphs])
    batch = len(graphs)

    h_o = tape.relu(mlp_forward(p, objects, VERTEX_ARCH))
    h_e = tape.relu(mlp_forward(p, _onehot(edge_kinds, len(RELATION_KINDS)), EDGE_ARCH))
    triples = tape.concat([tape.take(h_o, src), tape.take(h_o, dst), h_e], axis=1)
    relational = tape.segment_sum(mlp_forward(p, triples, RELATION_ARCH), edge_task, batch)

    h_k = tape.relu(mlp_forward(p, _onehot(skills, len(SKILL_KINDS)), SKILL_ARCH))
    ctx = tape.concat([h_k, tape.take(h_o, ci), tape.take(h_o, cj)], axis=1)
    contexts = tape.segment_sum(ctx, ctx_task, batch)

    env = tape.relu(mlp_forward(p, np.stack([g.env for g in graphs]), ENV_ARCH))
    return mlp_forward(p, tape.concat([relational, contexts, env], axis=1), FUSION_ARCH)


def encode_tasks(enc: TaskEncoder, tasks: Sequence[TaskParam]) -> np.ndarray:
    if not tasks:
        return np.zeros((0, EMBED_DIM))
    return encode_batch(enc.params.bind(), tasks).data


def encode_task(enc: TaskEncoder, w: TaskParam) -> np.ndarray:
    return encode_tasks(enc, [w])[0]
