import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..learnsub import AdamState, MLPArch, ParamVector, init_mlp, join, mlp_forward, split, tape, train_step
from ..learnsub.params import BoundParams
from ..taskspace import TaskParam
from .encoder import EMBED_DIM, TaskEncoder, encode_batch, new_encoder

logger = logging.getLogger(__name__)

VALUE_ARCH = MLPArch((EMBED_DIM, 64, 1), prefix="", output="sigmoid")
_PARTS = ("encoder", "value")


@dataclass
class ValueHead:
    params: ParamVector


def new_value_head(rng: np.random.Generator) -> ValueHead:
    return ValueHead(ParamVector.from_arrays(init_mlp(rng, VALUE_ARCH)))


def value(v: ValueHead, emb: np.ndarray) -> float:
    """Predicted success probability V(phi(w)) in (0, 1)"""
    return float(mlp_forward(v.params, np.asarray(emb).reshape(1, EMBED_DIM), VALUE_ARCH).data[0, 0])


def values(v: ValueHead, embs: np.ndarray) -> np.ndarray:
    if len(embs) == 0:
        return np.zeros(0)
    return mlp_forward(v.params, embs, VALUE_ARCH).data[:, 0]


class _Scoped:
    """View of joint parameters that strips the part prefix"""

    def __init__(self, bound: BoundParams, part: str):
        self.bound = bound
        self.part = part

    def __getitem__(self, name: str):
        return self.bound[f"{self.part}/{name}"]


@dataclass
class SamplerModel:
    """Task encoder and value head trained jointly through one Adam state"""

    encoder: TaskEncoder
    value_head: ValueHead
    adam: AdamState
    updates: int = 0

    def joint(self) -> ParamVector:
        return join({"encoder": self.encoder.params, "value": self.value_head.params})

    def assign(self, joint: ParamVector) -> None:
        parts = split(joint, _PARTS)
        self.encoder = TaskEncoder(parts["encoder"])
        self.value_head = ValueHead(parts["value"])

    @staticmethod
    def describe():
        return {"encoder": TaskEncoder.describe(), "value": VALUE_ARCH.describe()}


def new_sampler_model(rng: np.random.Generator, lr: float = 3e-4) -> SamplerModel:
    enc = new_encoder(rng)
    head = new_value_head(rng)
    size = enc.params.size + head.params.size
    return SamplerModel(encoder=enc, value_head=head, adam=AdamState.zeros(size, lr=lr))


def value_loss_fn(tasks: Sequence[TaskParam], rewards: Sequence[float]):
    target = tape.constant(np.asarray(rewards, dtype=np.float64).reshape(-1, 1))

    def loss_fn(p):
        emb = encode_batch(_Scoped(p, "encoder"), tasks)
        pred = mlp_forward(_Scoped(p, "value"), emb, VALUE_ARCH)
        return tape.mean(tape.square(tape.sub(pred, target)))

    return loss_fn


def value_update(model: SamplerModel, tasks: Sequence[TaskParam], rewards: Sequence[float]) -> float:
    """One joint Adam step on mean (V(phi(w)) - r)^2; returns the loss before the step"""
    if len(tasks) == 0:
        raise ValueError("value_update needs a nonempty batch")
    loss, joint, model.adam = train_step(value_loss_fn(tasks, rewards), model.joint(), model.adam)
    model.assign(joint)
    model.updates += 1
    return loss


def predict(model: SamplerModel, embs: np.ndarray) -> np.ndarray:
    return values(model.value_head, embs)

