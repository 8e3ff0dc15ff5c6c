"""Float64 tensors with reverse-mode automatic differentiation.

Every learnable component in this package is built from the operations in
this module.  Each operation records its inputs and a backward rule on an
implicit tape (the graph of ``_parents`` links); ``backward`` replays that
tape exactly once in reverse topological order.  Storage is row-major
float64 throughout.  There is no broadcasting beyond bias-add, scalar
operands and the explicit ``broadcast_to`` op: shape bugs should fail
loudly at the call site.
"""

from __future__ import annotations

import contextlib
from typing import Callable, Iterable, Sequence

import numpy as np


class ShapeError(ValueError):
    """Raised when operand shapes do not conform for an operation."""


def _mismatch(op: str, *shapes: tuple) -> ShapeError:
    return ShapeError(f"{op}: incompatible shapes " + " and ".join(str(s) for s in shapes))


_GRAD_ENABLED = True


@contextlib.contextmanager
def no_grad():
    """Disable tape recording inside the block (pure forward evaluation)."""
    global _GRAD_ENABLED
    prev = _GRAD_ENABLED
    _GRAD_ENABLED = False
    try:
        yield
    finally:
        _GRAD_ENABLED = prev


def _as_array(data) -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64)
    return np.ascontiguousarray(arr)


class Tensor:
    """A dense float64 array that may participate in the tape."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward_fn", "op")

    def __init__(self, data, requires_grad: bool = False):
        self.data = _as_array(data)
        self.grad: np.ndarray | None = None
        self.requires_grad = bool(requires_grad)
        self._parents: tuple[Tensor, ...] = ()
        self._backward_fn: Callable[[np.ndarray], Iterable[np.ndarray | None]] | None = None
        self.op = "leaf"

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        return float(self.data)

    def __repr__(self) -> str:
        rg = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}, op={self.op!r}{rg})"

    # -- operator sugar -------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(self, other)

    def __neg__(self):
        return scale(self, -1.0)

    def __sub__(self, other):
        if isinstance(other, Tensor):
            return add(self, scale(other, -1.0))
        return add(self, -float(other))

    def __mul__(self, other):
        if isinstance(other, Tensor):
            return mul(self, other)
        return scale(self, float(other))

    def __rmul__(self, other):
        return scale(self, float(other))

    def __truediv__(self, other):
        return scale(self, 1.0 / float(other))

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, index):
        return take(self, index)

    def reshape(self, *shape) -> "Tensor":
        return reshape(self, shape if len(shape) > 1 else shape[0])

    def transpose(self, *axes) -> "Tensor":
        return transpose(self, axes)

    def sum(self, axis=None) -> "Tensor":
        return reduce_sum(self, axis)

    def mean(self, axis=None) -> "Tensor":
        return reduce_mean(self, axis)

    def backward(self) -> None:
        backward(self)


def _node(data: np.ndarray, parents: Sequence[Tensor], backward_fn, op: str) -> Tensor:
    out = Tensor.__new__(Tensor)
    out.data = data
    out.grad = None
    out.op = op
    if _GRAD_ENABLED and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backward_fn = backward_fn
    else:
        out.requires_grad = False
        out._parents = ()
        out._backward_fn = None
    return out


def _ensure_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


# -- elementwise and structural ops -------------------------------------


def add(a: Tensor, b) -> Tensor:
    """Elementwise add.  ``b`` may be same-shape, a trailing-axis bias
    vector, or a python scalar; anything else is a shape error."""
    a = _ensure_tensor(a)
    if not isinstance(b, Tensor):
        c = float(b)
        return _node(a.data + c, (a,), lambda g: (g,), "add_scalar")
    if a.shape == b.shape:
        return _node(a.data + b.data, (a, b), lambda g: (g, g), "add")
    if b.ndim == 1 and a.ndim >= 1 and a.shape[-1] == b.shape[0]:
        def bw(g):
            return g, g.reshape(-1, b.shape[0]).sum(axis=0)
        return _node(a.data + b.data, (a, b), bw, "bias_add")
    if b.ndim == 0:
        return _node(a.data + b.data, (a, b), lambda g: (g, g.sum()), "add")
    raise _mismatch("add", a.shape, b.shape)


def mul(a: Tensor, b: Tensor) -> Tensor:
    """Elementwise (Hadamard) product of same-shape tensors."""
    if a.shape != b.shape:
        if b.ndim == 0:
            return _node(a.data * b.data, (a, b),
                         lambda g: (g * b.data, (g * a.data).sum()), "mul")
        raise _mismatch("mul", a.shape, b.shape)
    return _node(a.data * b.data, (a, b),
                 lambda g: (g * b.data, g * a.data), "mul")


def scale(a: Tensor, c: float) -> Tensor:
    return _node(a.data * c, (a,), lambda g: (g * c,), "scale")


def _reduce_to(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum gradient ``g`` down to ``shape`` (undo batch broadcasting)."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for ax, n in enumerate(shape):
        if n == 1 and g.shape[ax] != 1:
            g = g.sum(axis=ax, keepdims=True)
    return g


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product.  Operands must have ndim >= 2; leading batch axes
    follow numpy matmul broadcasting."""
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise _mismatch("matmul", a.shape, b.shape)
    try:
        out = np.matmul(a.data, b.data)
    except ValueError as exc:
        raise _mismatch("matmul", a.shape, b.shape) from exc

    def bw(g):
        ga = np.matmul(g, np.swapaxes(b.data, -1, -2))
        gb = np.matmul(np.swapaxes(a.data, -1, -2), g)
        return _reduce_to(ga, a.shape), _reduce_to(gb, b.shape)

    return _node(out, (a, b), bw, "matmul")


def linear(x: Tensor, w: Tensor, b: Tensor | None = None) -> Tensor:
    """Affine map ``x @ w + b`` with ``b`` broadcast over leading axes."""
    out = matmul(x, w)
    return add(out, b) if b is not None else out


def relu(x: Tensor) -> Tensor:
    mask = x.data > 0
    return _node(np.where(mask, x.data, 0.0), (x,), lambda g: (g * mask,), "relu")


def signed_sqrt(x: Tensor) -> Tensor:
    """sign(x) * sqrt(|x|), with subgradient 0 at the kink x = 0."""
    out = np.sqrt(np.maximum(x.data, 0.0)) - np.sqrt(np.maximum(-x.data, 0.0))

    def bw(g):
        mag = np.abs(x.data)
        d = np.zeros_like(mag)
        nz = mag > 0
        d[nz] = 0.5 / np.sqrt(mag[nz])
        return (g * d,)

    return _node(out, (x,), bw, "signed_sqrt")


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    if x.shape[axis % max(x.ndim, 1)] < 1:
        raise ShapeError(f"softmax: empty axis {axis} in shape {x.shape}")
    shifted = x.data - np.max(x.data, axis=axis, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=axis, keepdims=True)

    def bw(g):
        inner = (g * out).sum(axis=axis, keepdims=True)
        return (out * (g - inner),)

    return _node(out, (x,), bw, "softmax")


def log_softmax(x: Tensor, axis: int = -1) -> Tensor:
    shifted = x.data - np.max(x.data, axis=axis, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=axis, keepdims=True))
    out = shifted - lse

    def bw(g):
        return (g - np.exp(out) * g.sum(axis=axis, keepdims=True),)

    return _node(out, (x,), bw, "log_softmax")


def layer_norm(x: Tensor, gain: Tensor, bias: Tensor, eps: float = 1e-12) -> Tensor:
    """Normalize the last axis to zero mean / unit variance, then apply an
    elementwise affine ``gain * xhat + bias``."""
    d = x.shape[-1]
    if gain.shape != (d,) or bias.shape != (d,):
        raise _mismatch("layer_norm", x.shape, gain.shape, bias.shape)
    mu = x.data.mean(axis=-1, keepdims=True)
    var = x.data.var(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = (x.data - mu) * inv
    out = xhat * gain.data + bias.data

    def bw(g):
        dxhat = g * gain.data
        m1 = dxhat.mean(axis=-1, keepdims=True)
        m2 = (dxhat * xhat).mean(axis=-1, keepdims=True)
        dx = inv * (dxhat - m1 - xhat * m2)
        flat_g = g.reshape(-1, d)
        flat_xhat = xhat.reshape(-1, d)
        return dx, (flat_g * flat_xhat).sum(axis=0), flat_g.sum(axis=0)

    return _node(out, (x, gain, bias), bw, "layer_norm")


def embedding(table: Tensor, ids) -> Tensor:
    """Row lookup: ``out[t] = table[ids[t]]``."""
    idx = np.asarray(ids, dtype=np.int64)
    if idx.ndim != 1:
        raise ShapeError(f"embedding: ids must be 1-D, got shape {idx.shape}")
    if idx.size and (idx.min() < 0 or idx.max() >= table.shape[0]):
        raise ValueError(f"embedding: id out of range for table of {table.shape[0]} rows")
    out = table.data[idx]

    def bw(g):
        gt = np.zeros_like(table.data)
        np.add.at(gt, idx, g)
        return (gt,)

    return _node(out, (table,), bw, "embedding")


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = [_ensure_tensor(t) for t in tensors]
    if not tensors:
        raise ShapeError("concat: empty input list")
    ref = list(tensors[0].shape)
    for t in tensors[1:]:
        s = list(t.shape)
        s[axis] = ref[axis]
        if s != ref:
            raise _mismatch("concat", tensors[0].shape, t.shape)
    out = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def bw(g):
        return tuple(np.split(g, splits, axis=axis))

    return _node(out, tensors, bw, "concat")


def reshape(x: Tensor, shape) -> Tensor:
    shape = tuple(int(s) for s in (shape if isinstance(shape, (tuple, list)) else (shape,)))
    if int(np.prod(shape)) != x.size:
        raise _mismatch("reshape", x.shape, shape)
    return _node(x.data.reshape(shape), (x,), lambda g: (g.reshape(x.shape),), "reshape")


def transpose(x: Tensor, axes) -> Tensor:
    axes = tuple(axes)
    if sorted(axes) != list(range(x.ndim)):
        raise ShapeError(f"transpose: axes {axes} invalid for shape {x.shape}")
    inv = np.argsort(axes)
    return _node(np.ascontiguousarray(x.data.transpose(axes)), (x,),
                 lambda g: (g.transpose(inv),), "transpose")


def broadcast_to(x: Tensor, shape) -> Tensor:
    """Explicit broadcast; the backward pass sums over the expanded axes."""
    shape = tuple(int(s) for s in shape)
    try:
        out = np.broadcast_to(x.data, shape).copy()
    except ValueError as exc:
        raise _mismatch("broadcast_to", x.shape, shape) from exc

    def bw(g):
        extra = g.ndim - x.ndim
        if extra:
            g = g.sum(axis=tuple(range(extra)))
        keep = tuple(ax for ax in range(x.ndim) if x.shape[ax] == 1 and g.shape[ax] != 1)
        if keep:
            g = g.sum(axis=keep, keepdims=True)
        return (g,)

    return _node(out, (x,), bw, "broadcast_to")


def take(x: Tensor, index) -> Tensor:
    """Basic (non-fancy) indexing with gradient scatter-add."""
    out = x.data[index]
    if np.isscalar(out) or out.ndim == 0:
        out = np.asarray(out, dtype=np.float64)

    def bw(g):
        gx = np.zeros_like(x.data)
        np.add.at(gx, index, g)
        return (gx,)

    return _node(np.array(out, copy=True), (x,), bw, "take")


def gather(x: Tensor, index, axis: int = -1) -> Tensor:
    """``take_along_axis`` with gradient scatter-add along ``axis``."""
    idx = np.asarray(index, dtype=np.int64)
    if idx.ndim != x.ndim:
        raise ShapeError(f"gather: index ndim {idx.ndim} != tensor ndim {x.ndim}")
    out = np.take_along_axis(x.data, idx, axis=axis)

    def bw(g):
        gx = np.zeros_like(x.data)
        np.put_along_axis(gx, idx, g, axis=axis)
        return (gx,)

    return _node(out, (x,), bw, "gather")


def reduce_sum(x: Tensor, axis=None) -> Tensor:
    out = x.data.sum(axis=axis)

    def bw(g):
        if axis is None:
            return (np.full(x.shape, g),)
        return (np.broadcast_to(np.expand_dims(g, axis), x.shape).copy(),)

    return _node(np.asarray(out, dtype=np.float64), (x,), bw, "sum")


def reduce_mean(x: Tensor, axis=None) -> Tensor:
    n = x.size if axis is None else x.shape[axis]
    out = x.data.mean(axis=axis)

    def bw(g):
        if axis is None:
            return (np.full(x.shape, g / n),)
        return (np.broadcast_to(np.expand_dims(g / n, axis), x.shape).copy(),)

    return _node(np.asarray(out, dtype=np.float64), (x,), bw, "mean")


# -- backward pass -------------------------------------------------------


def backward(loss: Tensor) -> None:
    """Accumulate d(loss)/d(leaf) into ``.grad`` of every reachable leaf
    that requires grad.  ``loss`` must be scalar."""
    if loss.data.ndim != 0:
        raise ValueError(f"backward: loss must be scalar, got shape {loss.shape}")
    if not loss.requires_grad:
        return

    # Iterative topological sort; tapes can hold tens of thousands of nodes.
    topo: list[Tensor] = []
    visited: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(loss, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            topo.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if p.requires_grad and id(p) not in visited:
                stack.append((p, False))

    grads: dict[int, np.ndarray] = {id(loss): np.ones((), dtype=np.float64)}
    for node in reversed(topo):
        g = grads.pop(id(node), None)
        if g is None:
            continue
        if node._backward_fn is None:
            node.grad = g if node.grad is None else node.grad + g
            continue
        for parent, pg in zip(node._parents, node._backward_fn(g)):
            if pg is None or not parent.requires_grad:
                continue
            pg = np.asarray(pg, dtype=np.float64)
            key = id(parent)
            if key in grads:
                grads[key] = grads[key] + pg
            else:
                grads[key] = pg


# -- parameters ----------------------------------------------------------


class Parameter:
    """A named leaf tensor.  Frozen parameters (``trainable=False``) never
    record onto the tape and always report an all-zero gradient."""

    __slots__ = ("name", "tensor", "trainable")

    def __init__(self, name: str, data, trainable: bool = True):
        self.name = name
        self.tensor = Tensor(data, requires_grad=trainable)
        self.trainable = trainable

    @property
    def data(self) -> np.ndarray:
        return self.tensor.data

    @property
    def grad(self) -> np.ndarray:
        if not self.trainable or self.tensor.grad is None:
            return np.zeros_like(self.tensor.data)
        return self.tensor.grad

    def zero_grad(self) -> None:
        self.tensor.grad = None

    def freeze(self) -> None:
        self.trainable = False
        self.tensor.requires_grad = False
        self.tensor.grad = None

    def __repr__(self) -> str:
        return f"Parameter({self.name!r}, shape={self.tensor.shape}, trainable={self.trainable})"


def check_unique_names(params: Sequence[Parameter]) -> None:
    seen: set[str] = set()
    for p in params:
        if p.name in seen:
            raise ValueError(f"duplicate parameter name: {p.name}")
        seen.add(p.name)


# -- gradient checking ---------------------------------------------------


def grad_check(fn: Callable[[Sequence[Tensor]], Tensor],
               point: Sequence[Tensor],
               epsilon: float = 1e-5) -> float:
    """Compare tape gradients of ``fn`` at ``point`` against central finite
    differences.  Returns the max elementwise relative error, with
    denominator max(|analytic|, |fd|, 1e-8)."""
    for t in point:
        t.zero_grad() if isinstance(t, Parameter) else None
    inputs = [t.tensor if isinstance(t, Parameter) else t for t in point]
    for t in inputs:
        t.grad = None
        t.requires_grad = True

    loss = fn(inputs)
    if loss.data.ndim != 0:
        raise ValueError("grad_check: fn must return a scalar")
    backward(loss)
    analytic = [np.zeros_like(t.data) if t.grad is None else t.grad.copy() for t in inputs]

    worst = 0.0
    with no_grad():
        for t, an in zip(inputs, analytic):
            flat = t.data.reshape(-1)
            for i in range(flat.size):
                orig = flat[i]
                flat[i] = orig + epsilon
                up = fn(inputs).item()
                flat[i] = orig - epsilon
                down = fn(inputs).item()
                flat[i] = orig
                fd = (up - down) / (2.0 * epsilon)
                a = an.reshape(-1)[i]
                err = abs(a - fd) / max(abs(a), abs(fd), 1e-8)
                worst = max(worst, err)
    return worst


# -- initializers --------------------------------------------------------


def normal_init(rng: np.random.Generator, shape, std: float) -> np.ndarray:
    return rng.normal(0.0, std, size=shape).astype(np.float64)


def fan_in_init(rng: np.random.Generator, fan_in: int, shape) -> np.ndarray:
    """Weight init with unit-variance preservation for linear maps."""
    return normal_init(rng, shape, 1.0 / np.sqrt(max(fan_in, 1)))
