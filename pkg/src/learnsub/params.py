from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Tuple

import numpy as np

from . import tape
from .tape import Tensor

Layout = Tuple[Tuple[str, int, Tuple[int, ...]], ...]


@dataclass(frozen=True, eq=False)
class ParamVector:
    """Flat parameter values plus named (offset, shape) slices that partition them"""

    values: np.ndarray
    layout: Layout

    def __post_init__(self):
        offset = 0
        for name, start, shape in self.layout:
            if start != offset:
                raise ValueError(f"layout gap before {name}")
            offset += int(np.prod(shape)) if shape else 1
        if offset != self.values.size or self.values.ndim != 1:
            raise ValueError(f"layout covers {offset} values, vector has {self.values.size}")

    @classmethod
    def from_arrays(cls, arrays: Mapping[str, np.ndarray]) -> "ParamVector":
        layout: List[Tuple[str, int, Tuple[int, ...]]] = []
        chunks = []
        offset = 0
        for name, arr in arrays.items():
            arr = np.asarray(arr, dtype=np.float64)
            layout.append((name, offset, tuple(arr.shape)))
            chunks.append(arr.ravel())
            offset += arr.size
        values = np.concatenate(chunks) if chunks else np.zeros(0)
        return cls(values=values, layout=tuple(layout))

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(name for name, _, _ in self.layout)

    @property
    def size(self) -> int:
        return int(self.values.size)

    def array(self, name: str) -> np.ndarray:
        for n, start, shape in self.layout:
            if n == name:
                size = int(np.prod(shape)) if shape else 1
                return self.values[start:start + size].reshape(shape)
        raise KeyError(name)

    def arrays(self) -> Dict[str, np.ndarray]:
        return {name: self.array(name) for name in self.names}

    def with_values(self, values: np.ndarray) -> "ParamVector":
        return ParamVector(values=np.asarray(values, dtype=np.float64), layout=self.layout)

    def bind(self) -> "BoundParams":
        return BoundParams(Tensor(self.values.copy(), op="leaf"), self.layout)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values)))

    def arch(self) -> List[List]:
        return [[name, list(shape)] for name, _, shape in self.layout]


class BoundParams:
    """Named tensor views onto one differentiable leaf"""

    def __init__(self, leaf: Tensor, layout: Layout):
        self.leaf = leaf
        self._slots = {name: (start, shape) for name, start, shape in layout}
        self._cache: Dict[str, Tensor] = {}

    def __getitem__(self, name: str) -> Tensor:
        if name not in self._cache:
            start, shape = self._slots[name]
            self._cache[name] = tape.view(self.leaf, start, shape)
        return self._cache[name]

    def __contains__(self, name: str) -> bool:
        return name in self._slots


def join(parts: Mapping[str, ParamVector]) -> ParamVector:
    """Concatenate vectors, prefixing every slice name with its part key"""
    arrays = {}
    for key, p in parts.items():
        for name, arr in p.arrays().items():
            arrays[f"{key}/{name}"] = arr
    return ParamVector.from_arrays(arrays)


def split(joined: ParamVector, keys: Iterable[str]) -> Dict[str, ParamVector]:
    arrays = joined.arrays()
    out = {}
    for key in keys:
        prefix = f"{key}/"
        out[key] = ParamVector.from_arrays({n[len(prefix):]: a for n, a in arrays.items() if n.startswith(prefix)})
    return out
