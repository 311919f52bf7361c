from dataclasses import dataclass, replace
from typing import Callable, Tuple

import numpy as np

from . import tape
from .params import BoundParams, ParamVector
from .tape import NonFiniteError, ShapeError, Tensor

LossFn = Callable[[BoundParams], Tensor]


@dataclass(frozen=True, eq=False)
class AdamState:
    m: np.ndarray
    v: np.ndarray
    step: int = 0
    lr: float = 3e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros(cls, size: int, lr: float = 3e-4) -> "AdamState":
        return cls(m=np.zeros(size), v=np.zeros(size), lr=lr)

    def to_arrays(self) -> dict:
        return {"m": self.m, "v": self.v, "hyper": np.array([self.step, self.lr, self.beta1, self.beta2, self.eps])}

    @classmethod
    def from_arrays(cls, arrays: dict) -> "AdamState":
        step, lr, b1, b2, eps = arrays["hyper"]
        return cls(m=arrays["m"].copy(), v=arrays["v"].copy(), step=int(step), lr=float(lr),
                   beta1=float(b1), beta2=float(b2), eps=float(eps))


def grad(loss_fn: LossFn, p: ParamVector) -> Tuple[float, ParamVector]:
    """Loss value and its exact reverse-mode gradient with respect to p"""
    bound = p.bind()
    loss = loss_fn(bound)
    if loss.data.size != 1:
        raise ShapeError(f"loss must be a scalar, got shape {loss.shape}")
    bad = tape.first_non_finite(loss)
    if bad is not None:
        raise NonFiniteError(f"non-finite value produced by op '{bad.op}' with shape {bad.shape}")
    tape.backward(loss)
    g = bound.leaf.grad if bound.leaf.grad is not None else np.zeros_like(p.values)
    return loss.item(), p.with_values(g)


def adam_step(state: AdamState, p: ParamVector, g: ParamVector) -> Tuple[ParamVector, AdamState]:
    if g.size != p.size or state.m.size != p.size:
        raise ShapeError(f"adam_step: sizes {p.size}, {g.size}, {state.m.size} differ")
    t = state.step + 1
    m = state.beta1 * state.m + (1.0 - state.beta1) * g.values
    v = state.beta2 * state.v + (1.0 - state.beta2) * g.values * g.values
    m_hat = m / (1.0 - state.beta1 ** t)
    v_hat = v / (1.0 - state.beta2 ** t)
    values = p.values - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    if not np.all(np.isfinite(values)):
        raise NonFiniteError("adam_step produced non-finite parameters")
    return p.with_values(values), replace(state, m=m, v=v, step=t)


def train_step(loss_fn: LossFn, p: ParamVector, state: AdamState) -> Tuple[float, ParamVector, AdamState]:
    """One Adam update; the returned loss is the value before the step"""
    loss, g = grad(loss_fn, p)
    p_next, state_next = adam_step(state, p, g)
    return loss, p_next, state_next
