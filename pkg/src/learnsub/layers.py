import math
from dataclasses import dataclass
from typing import Dict, Tuple, Union

import numpy as np

from . import tape
from .params import BoundParams, ParamVector
from .tape import ShapeError, Tensor

LOG_STD_RANGE = (-5.0, 2.0)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class MLPArch:
    """Dense stack ``sizes[0] -> ... -> sizes[-1]``; slices are named ``{prefix}w{k}`` / ``{prefix}b{k}``"""

    sizes: Tuple[int, ...]
    prefix: str = ""
    output: str = "linear"

    @property
    def depth(self) -> int:
        return len(self.sizes) - 1

    def describe(self) -> Dict:
        return {"sizes": list(self.sizes), "prefix": self.prefix, "output": self.output}


def glorot(rng: np.random.Generator, fan_in: int, fan_out: int, gain: float = 1.0) -> np.ndarray:
    limit = gain * math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


def init_mlp(rng: np.random.Generator, arch: MLPArch, output_gain: float = 1.0) -> Dict[str, np.ndarray]:
    arrays: Dict[str, np.ndarray] = {}
    for k in range(arch.depth):
        gain = output_gain if k == arch.depth - 1 else 1.0
        arrays[f"{arch.prefix}w{k}"] = glorot(rng, arch.sizes[k], arch.sizes[k + 1], gain)
        arrays[f"{arch.prefix}b{k}"] = np.zeros(arch.sizes[k + 1])
    return arrays


def as_rows(x: Union[Tensor, np.ndarray]) -> Tensor:
    if isinstance(x, Tensor):
        return x if x.data.ndim == 2 else tape.reshape(x, (1, -1))
    x = np.asarray(x, dtype=np.float64)
    return tape.constant(x if x.ndim == 2 else x.reshape(1, -1))


def mlp_forward(p: Union[BoundParams, ParamVector], x: Union[Tensor, np.ndarray], arch: MLPArch) -> Tensor:
    """ReLU hidden layers, linear (or sigmoid) output; rows of x are independent inputs"""
    if isinstance(p, ParamVector):
        p = p.bind()
    h = as_rows(x)
    if h.shape[1] != arch.sizes[0]:
        raise ShapeError(f"{arch.prefix or 'mlp'}: input width {h.shape[1]} != {arch.sizes[0]}")
    for k in range(arch.depth):
        h = tape.add_bias(tape.matmul(h, p[f"{arch.prefix}w{k}"]), p[f"{arch.prefix}b{k}"])
        if k < arch.depth - 1:
            h = tape.relu(h)
    if arch.output == "sigmoid":
        h = tape.sigmoid(h)
    return h


def gaussian_loglik(mean: Union[Tensor, np.ndarray], log_std: Union[Tensor, np.ndarray],
                    a: Union[Tensor, np.ndarray]) -> Tensor:
    """Per-row diagonal Gaussian log density, summed over dimensions; log_std is clamped"""
    mean, log_std, a = as_rows(mean), as_rows(log_std), as_rows(a)
    if not mean.shape == log_std.shape == a.shape:
        raise ShapeError(f"gaussian_loglik: shapes {mean.shape}, {log_std.shape}, {a.shape}")
    ls = tape.clamp(log_std, *LOG_STD_RANGE)
    z = tape.mul(tape.sub(a, mean), tape.exp(tape.scale(ls, -1.0)))
    per_dim = tape.sub(tape.scale(tape.square(z), -0.5), ls)
    rows = tape.sum_axis(per_dim, axis=1)
    offset = tape.constant(np.full(rows.shape, -_HALF_LOG_2PI * mean.shape[1]))
    return tape.add(rows, offset)

