"""Minimal reverse-mode automatic differentiation over numpy arrays.

Just enough ops for the navigation-and-answering model: broadcast
arithmetic, matmul, reshape/slice/concat, reductions, tanh, softmax and
log-softmax, embedding lookup, and per-row index picking.  Every value is
a Tensor holding its array and a backward closure; ``backward(loss)``
walks the graph in reverse topological order and accumulates ``.grad`` on
the leaves.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np


class Tensor:
    __slots__ = ("data", "grad", "parents", "bwd")

    def __init__(
        self,
        data,
        parents: tuple["Tensor", ...] = (),
        bwd: Callable[[np.ndarray], None] | None = None,
    ):
        self.data = np.asarray(data)
        self.grad: np.ndarray | None = None
        self.parents = parents
        self.bwd = bwd

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    def accumulate(self, grad: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.array(grad, dtype=self.data.dtype, copy=True)
        else:
            self.grad += grad

    # operator sugar -----------------------------------------------------
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, mul(other, -1.0))

    def __rsub__(self, other):
        return add(mul(self, -1.0), other)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(self, other)

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __truediv__(self, other):
        if isinstance(other, Tensor):
            return mul(self, power(other, -1.0))
        return mul(self, 1.0 / other)

    def __pow__(self, exponent):
        return power(self, exponent)

    def __getitem__(self, key):
        return take_slice(self, key)

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, dtype={self.data.dtype})"


def as_tensor(value, like: Tensor | None = None) -> Tensor:
    if isinstance(value, Tensor):
        return value
    dtype = like.data.dtype if like is not None else None
    return Tensor(np.asarray(value, dtype=dtype))


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum grad over axes that were broadcast to reach ``grad.shape``."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


# --- arithmetic -----------------------------------------------------------

def add(a, b) -> Tensor:
    a = as_tensor(a, like=b if isinstance(b, Tensor) else None)
    b = as_tensor(b, like=a)
    out = Tensor(a.data + b.data, (a, b))

    def bwd(grad):
        a.accumulate(_unbroadcast(grad, a.data.shape))
        b.accumulate(_unbroadcast(grad, b.data.shape))

    out.bwd = bwd
    return out


def mul(a, b) -> Tensor:
    a = as_tensor(a, like=b if isinstance(b, Tensor) else None)
    b = as_tensor(b, like=a)
    out = Tensor(a.data * b.data, (a, b))

    def bwd(grad):
        a.accumulate(_unbroadcast(grad * b.data, a.data.shape))
        b.accumulate(_unbroadcast(grad * a.data, b.data.shape))

    out.bwd = bwd
    return out


def power(a: Tensor, exponent: float) -> Tensor:
    out = Tensor(a.data ** exponent, (a,))

    def bwd(grad):
        a.accumulate(grad * exponent * a.data ** (exponent - 1.0))

    out.bwd = bwd
    return out


def matmul(a: Tensor, b: Tensor) -> Tensor:
    assert a.ndim >= 2 and b.ndim >= 2, "matmul expects >=2-D operands"
    out = Tensor(a.data @ b.data, (a, b))

    def bwd(grad):
        a.accumulate(_unbroadcast(grad @ np.swapaxes(b.data, -1, -2), a.data.shape))
        b.accumulate(_unbroadcast(np.swapaxes(a.data, -1, -2) @ grad, b.data.shape))

    out.bwd = bwd
    return out


def tanh(a: Tensor) -> Tensor:
    value = np.tanh(a.data)
    out = Tensor(value, (a,))

    def bwd(grad):
        a.accumulate(grad * (1.0 - value * value))

    out.bwd = bwd
    return out


def exp(a: Tensor) -> Tensor:
    value = np.exp(a.data)
    out = Tensor(value, (a,))

    def bwd(grad):
        a.accumulate(grad * value)

    out.bwd = bwd
    return out


def log(a: Tensor) -> Tensor:
    out = Tensor(np.log(a.data), (a,))

    def bwd(grad):
        a.accumulate(grad / a.data)

    out.bwd = bwd
    return out


_GELU_C = float(np.sqrt(2.0 / np.pi))


def gelu(a: Tensor) -> Tensor:
    """Smooth GELU (tanh form); smoothness keeps finite differences honest."""
    inner = mul(add(a, mul(power(a, 3.0), 0.044715)), _GELU_C)
    return mul(mul(a, 0.5), add(tanh(inner), 1.0))


# --- shape ops --------------------------------------------------------------

def reshape(a: Tensor, shape: Sequence[int]) -> Tensor:
    out = Tensor(a.data.reshape(shape), (a,))

    def bwd(grad):
        a.accumulate(grad.reshape(a.data.shape))

    out.bwd = bwd
    return out


def swapaxes(a: Tensor, axis1: int, axis2: int) -> Tensor:
    out = Tensor(np.swapaxes(a.data, axis1, axis2), (a,))

    def bwd(grad):
        a.accumulate(np.swapaxes(grad, axis1, axis2))

    out.bwd = bwd
    return out


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = list(tensors)
    out = Tensor(np.concatenate([t.data for t in tensors], axis=axis), tuple(tensors))
    sizes = [t.data.shape[axis] for t in tensors]

    def bwd(grad):
        offset = 0
        for t, size in zip(tensors, sizes):
            index = [slice(None)] * grad.ndim
            index[axis] = slice(offset, offset + size)
            t.accumulate(grad[tuple(index)])
            offset += size

    out.bwd = bwd
    return out


def take_slice(a: Tensor, key) -> Tensor:
    """Basic (non-fancy) indexing: ints and slices only."""
    out = Tensor(a.data[key], (a,))

    def bwd(grad):
        full = np.zeros_like(a.data)
        full[key] += grad
        a.accumulate(full)

    out.bwd = bwd
    return out


# --- reductions --------------------------------------------------------------

def tsum(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    out = Tensor(a.data.sum(axis=axis, keepdims=keepdims), (a,))

    def bwd(grad):
        g = grad
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        a.accumulate(np.broadcast_to(g, a.data.shape).copy())

    out.bwd = bwd
    return out


def tmean(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    count = a.data.size if axis is None else a.data.shape[axis]
    return mul(tsum(a, axis=axis, keepdims=keepdims), 1.0 / count)


# --- softmax family ------------------------------------------------------------

def softmax(a: Tensor, axis: int = -1) -> Tensor:
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    value = e / e.sum(axis=axis, keepdims=True)
    out = Tensor(value, (a,))

    def bwd(grad):
        dot = (grad * value).sum(axis=axis, keepdims=True)
        a.accumulate(value * (grad - dot))

    out.bwd = bwd
    return out


def log_softmax(a: Tensor, axis: int = -1) -> Tensor:
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=axis, keepdims=True))
    value = shifted - log_z
    out = Tensor(value, (a,))

    def bwd(grad):
        soft = np.exp(value)
        a.accumulate(grad - soft * grad.sum(axis=axis, keepdims=True))

    out.bwd = bwd
    return out


# --- lookups ---------------------------------------------------------------------

def embedding(table: Tensor, ids: np.ndarray) -> Tensor:
    ids = np.asarray(ids)
    out = Tensor(table.data[ids], (table,))

    def bwd(grad):
        full = np.zeros_like(table.data)
        np.add.at(full, ids, grad)
        table.accumulate(full)

    out.bwd = bwd
    return out


def take_rows(a: Tensor, indices: np.ndarray) -> Tensor:
    """Pick one entry per row along the last axis: out[i] = a[i, indices[i]]."""
    indices = np.asarray(indices)
    rows = np.arange(a.data.shape[0])
    out = Tensor(a.data[rows, indices], (a,))

    def bwd(grad):
        full = np.zeros_like(a.data)
        np.add.at(full, (rows, indices), grad)
        a.accumulate(full)

    out.bwd = bwd
    return out


# --- graph traversal ----------------------------------------------------------------

def backward(loss: Tensor) -> None:
    """Accumulate gradients of a scalar loss into every reachable tensor."""
    assert loss.data.size == 1, "backward expects a scalar loss"
    topo: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(loss, False)]
    while stack:
        node, processed = stack.pop()
        if processed:
            topo.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for parent in node.parents:
            if id(parent) not in seen:
                stack.append((parent, False))
    loss.accumulate(np.ones_like(loss.data))
    for node in reversed(topo):
        if node.bwd is not None and node.grad is not None:
            node.bwd(node.grad)
