"""Minimal reverse-mode automatic differentiation over numpy arrays.

Tensors record their parents and vector-Jacobian closures as they are
created; `grad` replays the implicit tape in reverse topological order.
Gradient recording can be switched off (`no_grad`) for inference, in which
case the same operations run without building a graph.
"""

from contextlib import contextmanager

import numpy as np

from .errors import UnrecordedOperation

_GRAD_ENABLED = True


@contextmanager
def no_grad():
    global _GRAD_ENABLED
    prev = _GRAD_ENABLED
    _GRAD_ENABLED = False
    try:
        yield
    finally:
        _GRAD_ENABLED = prev


def _unbroadcast(grad, shape):
    """Reduce a broadcasted gradient back to `shape`."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for ax, dim in enumerate(shape):
        if dim == 1 and grad.shape[ax] != 1:
            grad = grad.sum(axis=ax, keepdims=True)
    return grad.reshape(shape)


class Tensor:
    __slots__ = ("value", "parents", "is_param")
    __array_priority__ = 100

    def __init__(self, value, parents=(), is_param=False):
        self.value = np.asarray(value, dtype=float)
        self.parents = parents if _GRAD_ENABLED else ()
        self.is_param = is_param

    @property
    def shape(self):
        return self.value.shape

    @property
    def ndim(self):
        return self.value.ndim

    # --- arithmetic ---

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return add(self, mul(other, -1.0))

    def __rsub__(self, other):
        return add(mul(self, -1.0), other)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return mul(self, power(other, -1.0)) if isinstance(other, Tensor) \
            else mul(self, 1.0 / np.asarray(other, dtype=float))

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __pow__(self, p):
        return power(self, p)

    def __getitem__(self, idx):
        return getitem(self, idx)


def as_tensor(x):
    return x if isinstance(x, Tensor) else Tensor(np.asarray(x, dtype=float))


def constant(x):
    return Tensor(np.asarray(x, dtype=float))


def parameter(x):
    return Tensor(np.asarray(x, dtype=float), is_param=True)


def _make(value, *parent_vjps):
    parents = tuple((p, fn) for p, fn in parent_vjps if isinstance(p, Tensor))
    return Tensor(value, parents=parents)


# --- primitives ---

def add(a, b):
    a, b = as_tensor(a), as_tensor(b)
    return _make(a.value + b.value,
                 (a, lambda g: _unbroadcast(g, a.shape)),
                 (b, lambda g: _unbroadcast(g, b.shape)))


def mul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    return _make(a.value * b.value,
                 (a, lambda g: _unbroadcast(g * b.value, a.shape)),
                 (b, lambda g: _unbroadcast(g * a.value, b.shape)))


def power(a, p):
    a = as_tensor(a)
    p = float(p)
    return _make(a.value ** p,
                 (a, lambda g: g * p * a.value ** (p - 1.0)))


def matmul(a, b):
    a, b = as_tensor(a), as_tensor(b)

    def da(g):
        grad = g @ np.swapaxes(b.value, -1, -2)
        return _unbroadcast(grad, a.shape) if grad.shape != a.shape else grad

    def db(g):
        grad = np.swapaxes(a.value, -1, -2) @ g
        return _unbroadcast(grad, b.shape) if grad.shape != b.shape else grad

    return _make(a.value @ b.value, (a, da), (b, db))


def exp(a):
    a = as_tensor(a)
    out = np.exp(a.value)
    return _make(out, (a, lambda g: g * out))


def log(a):
    a = as_tensor(a)
    return _make(np.log(a.value), (a, lambda g: g / a.value))


def sqrt(a):
    a = as_tensor(a)
    out = np.sqrt(a.value)
    return _make(out, (a, lambda g: g * 0.5 / out))


def tanh(a):
    a = as_tensor(a)
    out = np.tanh(a.value)
    return _make(out, (a, lambda g: g * (1.0 - out ** 2)))


def sigmoid(a):
    a = as_tensor(a)
    out = 1.0 / (1.0 + np.exp(-a.value))
    return _make(out, (a, lambda g: g * out * (1.0 - out)))


def silu(a):
    a = as_tensor(a)
    s = 1.0 / (1.0 + np.exp(-a.value))
    out = a.value * s
    return _make(out, (a, lambda g: g * (s + out * (1.0 - s))))


def relu(a):
    a = as_tensor(a)
    mask = a.value > 0
    return _make(a.value * mask, (a, lambda g: g * mask))


def tsum(a, axis=None, keepdims=False):
    a = as_tensor(a)
    out = a.value.sum(axis=axis, keepdims=keepdims)

    def da(g):
        g = np.asarray(g)
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return np.broadcast_to(g, a.shape).copy()

    return _make(out, (a, da))


def tmean(a, axis=None, keepdims=False):
    a = as_tensor(a)
    count = a.value.size if axis is None else a.shape[axis]
    return mul(tsum(a, axis=axis, keepdims=keepdims), 1.0 / count)


def reshape(a, shape):
    a = as_tensor(a)
    return _make(a.value.reshape(shape), (a, lambda g: g.reshape(a.shape)))


def swapaxes(a, ax1, ax2):
    a = as_tensor(a)
    return _make(np.swapaxes(a.value, ax1, ax2),
                 (a, lambda g: np.swapaxes(g, ax1, ax2)))


def concat(tensors, axis=-1):
    tensors = [as_tensor(t) for t in tensors]
    sizes = [t.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def slicer(k):
        def da(g):
            sl = [slice(None)] * g.ndim
            sl[axis if axis >= 0 else g.ndim + axis] = slice(offsets[k], offsets[k + 1])
            return g[tuple(sl)]
        return da

    value = np.concatenate([t.value for t in tensors], axis=axis)
    return _make(value, *[(t, slicer(k)) for k, t in enumerate(tensors)])


def getitem(a, idx):
    a = as_tensor(a)

    def da(g):
        out = np.zeros(a.shape)
        np.add.at(out, idx, g)
        return out

    return _make(a.value[idx], (a, da))


def softmax(a, axis=-1):
    a = as_tensor(a)
    shifted = a.value - a.value.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=axis, keepdims=True)

    def da(g):
        dot = (g * out).sum(axis=axis, keepdims=True)
        return out * (g - dot)

    return _make(out, (a, da))


def log_softmax(a, axis=-1):
    a = as_tensor(a)
    shifted = a.value - a.value.max(axis=axis, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=axis, keepdims=True))
    out = shifted - lse
    probs = np.exp(out)

    def da(g):
        return g - probs * g.sum(axis=axis, keepdims=True)

    return _make(out, (a, da))


def where(mask, a, b):
    """Select with a constant boolean mask; gradients flow to both branches."""
    mask = np.asarray(mask, dtype=bool)
    a, b = as_tensor(a), as_tensor(b)
    return _make(np.where(mask, a.value, b.value),
                 (a, lambda g: _unbroadcast(g * mask, a.shape)),
                 (b, lambda g: _unbroadcast(g * ~mask, b.shape)))


def layer_norm(a, gain, bias, axis=-1, eps=1e-6):
    """Composite layer normalization built from recorded primitives."""
    mu = tmean(a, axis=axis, keepdims=True)
    centered = a - mu
    var = tmean(mul(centered, centered), axis=axis, keepdims=True)
    inv = power(add(var, eps), -0.5)
    return add(mul(mul(centered, inv), gain), bias)


def grad(loss: Tensor, params) -> dict:
    """Gradients of a scalar loss with respect to named parameter tensors."""
    if not isinstance(loss, Tensor):
        raise UnrecordedOperation("loss is not a recorded tensor")
    if loss.value.size != 1:
        raise UnrecordedOperation("loss must be scalar")
    if not loss.parents and not loss.is_param:
        raise UnrecordedOperation("loss carries no recorded operations "
                                  "(built under no_grad or from constants)")

    order = []
    seen = set()
    stack = [(loss, False)]
    while stack:
        node, processed = stack.pop()
        if processed:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for parent, _ in node.parents:
            if id(parent) not in seen:
                stack.append((parent, False))

    grads = {id(loss): np.ones_like(loss.value)}
    for node in reversed(order):
        g = grads.pop(id(node), None)
        if g is None:
            continue
        for parent, vjp in node.parents:
            contribution = vjp(g)
            if id(parent) in grads:
                grads[id(parent)] = grads[id(parent)] + contribution
            else:
                grads[id(parent)] = contribution
        if node.is_param:
            grads[id(node)] = g  # keep leaves
    return {name: grads.get(id(p), np.zeros(p.shape)) for name, p in params.items()}
