"""Reverse-mode differentiation over float64 numpy arrays.

Each op returns a new ``Tensor`` that remembers its parents and a closure
mapping the output gradient to one gradient per parent. Shapes must match
exactly; the only implicit expansion is ``add_bias`` over rows.
"""

from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit

from ..errors import ActiveTaskError


class ShapeError(ActiveTaskError):
    pass


class NonFiniteError(ActiveTaskError):
    pass


BackwardFn = Callable[[np.ndarray], Tuple[Optional[np.ndarray], ...]]


class Tensor:
    __slots__ = ("data", "parents", "backward_fn", "op", "kink", "grad")

    def __init__(self, data, parents: Tuple["Tensor", ...] = (), backward_fn: Optional[BackwardFn] = None,
                 op: str = "const", kink: Optional[np.ndarray] = None):
        self.data = np.asarray(data, dtype=np.float64)
        self.parents = parents
        self.backward_fn = backward_fn
        self.op = op
        # activation pattern of piecewise-linear ops, compared across nearby inputs
        self.kink = kink
        self.grad: Optional[np.ndarray] = None

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    def item(self) -> float:
        return float(self.data.reshape(-1)[0])

    def __repr__(self) -> str:
        return f"Tensor(op={self.op}, shape={self.shape})"


def constant(x) -> Tensor:
    return Tensor(np.array(x, dtype=np.float64, copy=True))


def _same(a: Tensor, b: Tensor, op: str) -> None:
    if a.shape != b.shape:
        raise ShapeError(f"{op}: shapes {a.shape} and {b.shape} differ")


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.data.ndim != 2 or b.data.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: cannot multiply {a.shape} by {b.shape}")
    return Tensor(a.data @ b.data, (a, b), lambda g: (g @ b.data.T, a.data.T @ g), "matmul")


def add_bias(x: Tensor, b: Tensor) -> Tensor:
    if x.data.ndim != 2 or b.shape != (x.shape[1],):
        raise ShapeError(f"add_bias: bias {b.shape} does not match rows of {x.shape}")
    return Tensor(x.data + b.data, (x, b), lambda g: (g, g.sum(axis=0)), "add_bias")


def add(a: Tensor, b: Tensor) -> Tensor:
    _same(a, b, "add")
    return Tensor(a.data + b.data, (a, b), lambda g: (g, g), "add")


def sub(a: Tensor, b: Tensor) -> Tensor:
    _same(a, b, "sub")
    return Tensor(a.data - b.data, (a, b), lambda g: (g, -g), "sub")


def mul(a: Tensor, b: Tensor) -> Tensor:
    _same(a, b, "mul")
    return Tensor(a.data * b.data, (a, b), lambda g: (g * b.data, g * a.data), "mul")


def scale(x: Tensor, c: float) -> Tensor:
    return Tensor(x.data * c, (x,), lambda g: (g * c,), "scale")


def relu(x: Tensor) -> Tensor:
    mask = x.data > 0.0
    return Tensor(x.data * mask, (x,), lambda g: (g * mask,), "relu", kink=mask)


def clamp(x: Tensor, lo: float, hi: float) -> Tensor:
    inside = (x.data >= lo) & (x.data <= hi)
    pattern = np.concatenate([(x.data < lo).ravel(), (x.data > hi).ravel()])
    return Tensor(np.clip(x.data, lo, hi), (x,), lambda g: (g * inside,), "clamp", kink=pattern)


def sigmoid(x: Tensor) -> Tensor:
    s = expit(x.data)
    return Tensor(s, (x,), lambda g: (g * s * (1.0 - s),), "sigmoid")


def exp(x: Tensor) -> Tensor:
    e = np.exp(x.data)
    return Tensor(e, (x,), lambda g: (g * e,), "exp")


def square(x: Tensor) -> Tensor:
    return Tensor(x.data * x.data, (x,), lambda g: (2.0 * x.data * g,), "square")


def sum(x: Tensor) -> Tensor:  # noqa: A001
    return Tensor(np.array(x.data.sum()), (x,), lambda g: (np.full(x.shape, float(g)),), "sum")


def mean(x: Tensor) -> Tensor:
    n = x.data.size
    return Tensor(np.array(x.data.mean()), (x,), lambda g: (np.full(x.shape, float(g) / n),), "mean")


def sum_axis(x: Tensor, axis: int) -> Tensor:
    def back(g):
        return (np.broadcast_to(np.expand_dims(g, axis), x.shape).copy(),)

    return Tensor(x.data.sum(axis=axis), (x,), back, "sum_axis")


def concat(parts: Sequence[Tensor], axis: int = -1) -> Tensor:
    sizes = [p.shape[axis] for p in parts]
    cuts = np.cumsum(sizes)[:-1]

    def back(g):
        return tuple(np.split(g, cuts, axis=axis))

    return Tensor(np.concatenate([p.data for p in parts], axis=axis), tuple(parts), back, "concat")


def take(x: Tensor, index: np.ndarray) -> Tensor:
    """Row gather x[index]; repeated indices accumulate in the backward pass"""
    index = np.asarray(index, dtype=np.int64)

    def back(g):
        out = np.zeros_like(x.data)
        np.add.at(out, index, g)
        return (out,)

    return Tensor(x.data[index], (x,), back, "take")


def segment_sum(x: Tensor, segments: np.ndarray, count: int) -> Tensor:
    """Sum rows of x into ``count`` buckets; empty buckets stay zero"""
    segments = np.asarray(segments, dtype=np.int64)
    if x.data.ndim != 2 or len(segments) != x.shape[0]:
        raise ShapeError(f"segment_sum: {len(segments)} segment ids for rows of {x.shape}")
    out = np.zeros((count, x.shape[1]))
    np.add.at(out, segments, x.data)
    return Tensor(out, (x,), lambda g: (g[segments],), "segment_sum")


def columns(x: Tensor, start: int, stop: int) -> Tensor:
    def back(g):
        out = np.zeros_like(x.data)
        out[:, start:stop] = g
        return (out,)

    return Tensor(x.data[:, start:stop], (x,), back, "columns")


def reshape(x: Tensor, shape: Tuple[int, ...]) -> Tensor:
    return Tensor(x.data.reshape(shape), (x,), lambda g: (g.reshape(x.shape),), "reshape")


def view(flat: Tensor, offset: int, shape: Tuple[int, ...]) -> Tensor:
    size = int(np.prod(shape)) if shape else 1

    def back(g):
        out = np.zeros_like(flat.data)
        out[offset:offset + size] = g.ravel()
        return (out,)

    return Tensor(flat.data[offset:offset + size].reshape(shape), (flat,), back, "param")


def topological(root: Tensor) -> List[Tensor]:
    order: List[Tensor] = []
    seen = set()
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node.parents:
            if id(p) not in seen:
                stack.append((p, False))
    return order


def backward(root: Tensor) -> None:
    """Accumulate d root / d node into ``node.grad`` for every node reachable from root"""
    order = topological(root)
    for node in order:
        node.grad = None
    root.grad = np.ones_like(root.data)
    for node in reversed(order):
        if node.grad is None or node.backward_fn is None:
            continue
        for parent, pg in zip(node.parents, node.backward_fn(node.grad)):
            if pg is None:
                continue
            parent.grad = pg.copy() if parent.grad is None else parent.grad + pg


def first_non_finite(root: Tensor) -> Optional[Tensor]:
    for node in topological(root):
        if not np.all(np.isfinite(node.data)):
            return node
    return None


def kink_pattern(root: Tensor) -> np.ndarray:
    """Concatenated activation masks of every relu/clamp node, in graph order"""
    parts = [node.kink.ravel() for node in topological(root) if node.kink is not None]
    return np.concatenate(parts) if parts else np.zeros(0, dtype=bool)
