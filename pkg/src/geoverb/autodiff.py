"""Minimal reverse-mode automatic differentiation over numpy arrays.

Every differentiable primitive registers a vector-Jacobian product in
``_VJP``. ``backward`` walks the graph in reverse topological order and
refuses nodes whose primitive has no registered VJP. Complex quantities are
carried as (real, imag) pairs of real tensors; see ``cmul`` and ``cmatmul``.
"""

from __future__ import annotations

from typing import Callable, Iterable, Sequence

import numpy as np

_VJP: dict[str, Callable] = {}


class UnsupportedPrimitiveError(RuntimeError):
    pass


def _register(name):
    def deco(fn):
        _VJP[name] = fn
        return fn

    return deco


class Tensor:
    __slots__ = ("value", "grad", "parents", "op", "ctx", "requires_grad", "name")

    def __init__(self, value, requires_grad=False, parents=(), op="leaf", ctx=None, name=None):
        self.value = np.asarray(value, dtype=np.float64)
        self.requires_grad = requires_grad
        self.parents = parents
        self.op = op
        self.ctx = ctx
        self.name = name
        self.grad = np.zeros_like(self.value) if (requires_grad and op == "leaf") else None

    @property
    def shape(self):
        return self.value.shape

    @property
    def ndim(self):
        return self.value.ndim

    def __repr__(self):
        return f"Tensor(op={self.op}, shape={self.shape})"

    def __add__(self, o):
        return add(self, o)

    __radd__ = __add__

    def __sub__(self, o):
        return sub(self, o)

    def __rsub__(self, o):
        return sub(o, self)

    def __mul__(self, o):
        return mul(self, o)

    __rmul__ = __mul__

    def __truediv__(self, o):
        return div(self, o)

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, o):
        return matmul(self, o)

    def __getitem__(self, idx):
        return getitem(self, idx)

    def sum(self, axis=None, keepdims=False):
        return tsum(self, axis, keepdims)

    def mean(self, axis=None, keepdims=False):
        return mean(self, axis, keepdims)

    def reshape(self, *shape):
        return reshape(self, shape[0] if len(shape) == 1 and isinstance(shape[0], tuple) else shape)

    def transpose(self, *axes):
        return transpose(self, axes or None)


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _node(value, parents, op, ctx=None):
    parents = tuple(parents)
    rg = any(p.requires_grad for p in parents)
    return Tensor(value, rg, parents if rg else (), op if rg else "const", ctx)


def _unbroadcast(g, shape):
    if g.shape == shape:
        return g
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for i, s in enumerate(shape):
        if s == 1 and g.shape[i] != 1:
            g = g.sum(axis=i, keepdims=True)
    return g


# ---------------------------------------------------------------- elementwise


def add(a, b):
    a, b = as_tensor(a), as_tensor(b)
    return _node(a.value + b.value, (a, b), "add")


@_register("add")
def _(node, g):
    a, b = node.parents
    return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)


def sub(a, b):
    a, b = as_tensor(a), as_tensor(b)
    return _node(a.value - b.value, (a, b), "sub")


@_register("sub")
def _(node, g):
    a, b = node.parents
    return _unbroadcast(g, a.shape), -_unbroadcast(g, b.shape)


def mul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    return _node(a.value * b.value, (a, b), "mul")


@_register("mul")
def _(node, g):
    a, b = node.parents
    return _unbroadcast(g * b.value, a.shape), _unbroadcast(g * a.value, b.shape)


def div(a, b):
    a, b = as_tensor(a), as_tensor(b)
    return _node(a.value / b.value, (a, b), "div")


@_register("div")
def _(node, g):
    a, b = node.parents
    return (
        _unbroadcast(g / b.value, a.shape),
        _unbroadcast(-g * a.value / b.value**2, b.shape),
    )


def exp(x):
    x = as_tensor(x)
    return _node(np.exp(x.value), (x,), "exp")


@_register("exp")
def _(node, g):
    return (g * node.value,)


def log(x):
    x = as_tensor(x)
    return _node(np.log(x.value), (x,), "log")


@_register("log")
def _(node, g):
    return (g / node.parents[0].value,)


def tanh(x):
    x = as_tensor(x)
    return _node(np.tanh(x.value), (x,), "tanh")


@_register("tanh")
def _(node, g):
    return (g * (1.0 - node.value**2),)


def sigmoid(x):
    x = as_tensor(x)
    return _node(0.5 * (1.0 + np.tanh(0.5 * x.value)), (x,), "sigmoid")


@_register("sigmoid")
def _(node, g):
    s = node.value
    return (g * s * (1.0 - s),)


def relu(x):
    x = as_tensor(x)
    return _node(np.maximum(x.value, 0.0), (x,), "relu")


@_register("relu")
def _(node, g):
    return (g * (node.parents[0].value > 0),)


def square(x):
    x = as_tensor(x)
    return _node(x.value**2, (x,), "square")


@_register("square")
def _(node, g):
    return (2.0 * g * node.parents[0].value,)


def sqrt(x):
    x = as_tensor(x)
    return _node(np.sqrt(x.value), (x,), "sqrt")


@_register("sqrt")
def _(node, g):
    return (0.5 * g / node.value,)


def clamp_min(x, floor: float):
    """``max(x, floor)``; the gradient is zero where the floor is active."""
    x = as_tensor(x)
    return _node(np.maximum(x.value, floor), (x,), "clamp_min", floor)


@_register("clamp_min")
def _(node, g):
    return (g * (node.parents[0].value > node.ctx),)


def swish(x):
    return mul(x, sigmoid(x))


# ---------------------------------------------------------------- reductions


def tsum(x, axis=None, keepdims=False):
    x = as_tensor(x)
    return _node(x.value.sum(axis=axis, keepdims=keepdims), (x,), "sum", (axis, keepdims))


@_register("sum")
def _(node, g):
    x = node.parents[0]
    axis, keepdims = node.ctx
    if axis is not None and not keepdims:
        g = np.expand_dims(g, axis)
    return (np.broadcast_to(g, x.shape),)


def mean(x, axis=None, keepdims=False):
    x = as_tensor(x)
    n = x.value.size if axis is None else np.prod([x.shape[a] for a in np.atleast_1d(axis)])
    return mul(tsum(x, axis, keepdims), 1.0 / n)


# ---------------------------------------------------------------- shape ops


def reshape(x, shape):
    x = as_tensor(x)
    return _node(x.value.reshape(shape), (x,), "reshape")


@_register("reshape")
def _(node, g):
    return (g.reshape(node.parents[0].shape),)


def transpose(x, axes=None):
    x = as_tensor(x)
    return _node(np.transpose(x.value, axes), (x,), "transpose", axes)


@_register("transpose")
def _(node, g):
    axes = node.ctx
    inv = None if axes is None else np.argsort(axes)
    return (np.transpose(g, inv),)


def swap_last(x):
    axes = list(range(x.ndim))
    axes[-1], axes[-2] = axes[-2], axes[-1]
    return transpose(x, tuple(axes))


def getitem(x, idx):
    """Indexing; integer-array indices act as a gather (used for RPE tables)."""
    x = as_tensor(x)
    return _node(x.value[idx], (x,), "gather", idx)


@_register("gather")
def _(node, g):
    out = np.zeros_like(node.parents[0].value)
    np.add.at(out, node.ctx, g)
    return (out,)


def concat(xs: Sequence, axis=-1):
    xs = [as_tensor(x) for x in xs]
    sizes = [x.shape[axis] for x in xs]
    return _node(np.concatenate([x.value for x in xs], axis=axis), xs, "concat", (axis, sizes))


@_register("concat")
def _(node, g):
    axis, sizes = node.ctx
    return tuple(np.split(g, np.cumsum(sizes)[:-1], axis=axis))


def pad_axis(x, before: int, after: int, axis: int):
    x = as_tensor(x)
    widths = [(0, 0)] * x.ndim
    widths[axis] = (before, after)
    return _node(np.pad(x.value, widths), (x,), "pad", (before, axis))


@_register("pad")
def _(node, g):
    before, axis = node.ctx
    n = node.parents[0].shape[axis]
    return (np.take(g, np.arange(before, before + n), axis=axis),)


def roll(x, shift: int, axis: int):
    x = as_tensor(x)
    return _node(np.roll(x.value, shift, axis=axis), (x,), "roll", (shift, axis))


@_register("roll")
def _(node, g):
    shift, axis = node.ctx
    return (np.roll(g, -shift, axis=axis),)


# ---------------------------------------------------------------- linear algebra


def matmul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    return _node(a.value @ b.value, (a, b), "matmul")


@_register("matmul")
def _(node, g):
    a, b = node.parents
    av, bv = a.value, b.value
    ga = gb = None
    if a.requires_grad:
        if bv.ndim == 1:
            ga = np.multiply.outer(g, bv)
        else:
            ga = g @ np.swapaxes(bv, -1, -2)
        ga = _unbroadcast(ga, a.shape)
    if b.requires_grad:
        if av.ndim == 1:
            gb = np.multiply.outer(av, g)
        elif bv.ndim == 2:
            gb = av.reshape(-1, av.shape[-1]).T @ g.reshape(-1, g.shape[-1])
        else:
            gb = _unbroadcast(np.swapaxes(av, -1, -2) @ g, b.shape)
    return ga, gb


def linear(x, w, b=None):
    y = matmul(x, w)
    return y if b is None else add(y, b)


# ---------------------------------------------------------------- fused ops


def softmax(x, axis=-1):
    x = as_tensor(x)
    z = x.value - x.value.max(axis=axis, keepdims=True)
    e = np.exp(z)
    return _node(e / e.sum(axis=axis, keepdims=True), (x,), "softmax", axis)


@_register("softmax")
def _(node, g):
    s = node.value
    return (s * (g - (g * s).sum(axis=node.ctx, keepdims=True)),)


def log_softmax(x, axis=-1):
    x = as_tensor(x)
    z = x.value - x.value.max(axis=axis, keepdims=True)
    out = z - np.log(np.exp(z).sum(axis=axis, keepdims=True))
    return _node(out, (x,), "log_softmax", axis)


@_register("log_softmax")
def _(node, g):
    s = np.exp(node.value)
    return (g - s * g.sum(axis=node.ctx, keepdims=True),)


def layer_norm(x, gamma=None, beta=None, eps=1e-5):
    """Normalise over the last axis, then scale/shift."""
    x = as_tensor(x)
    mu = x.value.mean(axis=-1, keepdims=True)
    xc = x.value - mu
    inv = 1.0 / np.sqrt((xc**2).mean(axis=-1, keepdims=True) + eps)
    xhat = xc * inv
    y = _node(xhat, (x,), "layer_norm", inv)
    if gamma is not None:
        y = mul(y, gamma)
    if beta is not None:
        y = add(y, beta)
    return y


@_register("layer_norm")
def _(node, g):
    xhat, inv = node.value, node.ctx
    n = xhat.shape[-1]
    gx = inv / n * (n * g - g.sum(-1, keepdims=True) - xhat * (g * xhat).sum(-1, keepdims=True))
    return (gx,)


def depthwise_conv1d(x, w):
    """Same-length depthwise convolution along axis -2.

    ``x``: (..., T, C); ``w``: (K, C) with odd K. out[t] = sum_k x[t + k - K//2] w[k].
    """
    x, w = as_tensor(x), as_tensor(w)
    k = w.shape[0]
    half = k // 2
    xp = np.pad(x.value, [(0, 0)] * (x.ndim - 2) + [(half, half), (0, 0)])
    win = np.lib.stride_tricks.sliding_window_view(xp, k, axis=-2)  # (..., T, C, K)
    out = np.einsum("...tck,kc->...tc", win, w.value)
    return _node(out, (x, w), "depthwise_conv1d", (win, half))


@_register("depthwise_conv1d")
def _(node, g):
    x, w = node.parents
    win, half = node.ctx
    k = w.shape[0]
    gw = None
    if w.requires_grad:
        c = g.shape[-1]
        gw = np.einsum("ntck,ntc->kc", win.reshape(-1, *win.shape[-3:]), g.reshape(-1, g.shape[-2], c))
    gx = None
    if x.requires_grad:
        gp = np.pad(g, [(0, 0)] * (g.ndim - 2) + [(half, half), (0, 0)])
        gwin = np.lib.stride_tricks.sliding_window_view(gp, k, axis=-2)
        gx = np.einsum("...tck,kc->...tc", gwin, w.value[::-1])
    return gx, gw


def conv1d(x, w):
    """Same-length full convolution along axis -2.

    ``x``: (..., T, Cin); ``w``: (K, Cin, Cout) with odd K.
    """
    x, w = as_tensor(x), as_tensor(w)
    k, cin, cout = w.shape
    half = k // 2
    xp = np.pad(x.value, [(0, 0)] * (x.ndim - 2) + [(half, half), (0, 0)])
    win = np.lib.stride_tricks.sliding_window_view(xp, k, axis=-2)  # (..., T, Cin, K)
    cols = np.swapaxes(win, -1, -2).reshape(*win.shape[:-2], k * cin)
    out = cols @ w.value.reshape(k * cin, cout)
    return _node(out, (x, w), "conv1d", (cols, half))


@_register("conv1d")
def _(node, g):
    x, w = node.parents
    cols, half = node.ctx
    k, cin, cout = w.shape
    gw = gx = None
    if w.requires_grad:
        gw = (cols.reshape(-1, k * cin).T @ g.reshape(-1, cout)).reshape(k, cin, cout)
    if x.requires_grad:
        gcols = (g @ w.value.reshape(k * cin, cout).T).reshape(*g.shape[:-1], k, cin)
        t = g.shape[-2]
        gxp = np.zeros(g.shape[:-2] + (t + 2 * half, cin))
        for j in range(k):
            gxp[..., j : j + t, :] += gcols[..., j, :]
        gx = gxp[..., half : half + t, :]
    return gx, gw


def frame(x, win: int, hop: int):
    """(..., L) -> (..., T, win) strided frames, T = 1 + (L - win) // hop."""
    x = as_tensor(x)
    view = np.lib.stride_tricks.sliding_window_view(x.value, win, axis=-1)[..., ::hop, :]
    return _node(np.ascontiguousarray(view), (x,), "frame", (win, hop, x.shape[-1]))


@_register("frame")
def _(node, g):
    win, hop, length = node.ctx
    return (_overlap_add(g, hop, length),)


def _overlap_add(frames, hop, length):
    t, win = frames.shape[-2], frames.shape[-1]
    out = np.zeros(frames.shape[:-2] + (length,))
    for m in range(t):
        out[..., m * hop : m * hop + win] += frames[..., m, :]
    return out


def overlap_add(frames, hop: int):
    """(..., T, win) -> (..., (T-1)*hop + win), summing overlapping frames."""
    frames = as_tensor(frames)
    t, win = frames.shape[-2], frames.shape[-1]
    length = (t - 1) * hop + win
    return _node(_overlap_add(frames.value, hop, length), (frames,), "overlap_add", (win, hop))


@_register("overlap_add")
def _(node, g):
    win, hop = node.ctx
    view = np.lib.stride_tricks.sliding_window_view(g, win, axis=-1)[..., ::hop, :]
    t = node.parents[0].shape[-2]
    return (np.ascontiguousarray(view[..., :t, :]),)


# ---------------------------------------------------------------- complex pairs


def cmul(ar, ai, br, bi):
    """(ar + j ai)(br + j bi) as a (real, imag) pair."""
    return sub(mul(ar, br), mul(ai, bi)), add(mul(ar, bi), mul(ai, br))


def cmatmul(ar, ai, wr, wi):
    return sub(matmul(ar, wr), matmul(ai, wi)), add(matmul(ar, wi), matmul(ai, wr))


# ---------------------------------------------------------------- driver


def _topo(root: Tensor) -> list[Tensor]:
    order, seen = [], set()
    stack = [(root, False)]
    while stack:
        node, done = stack.pop()
        if done:
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


def backward(loss: Tensor) -> None:
    """Accumulate d(loss)/d(leaf) into ``leaf.grad`` for every reachable leaf."""
    if loss.value.size != 1:
        raise ValueError("backward needs a scalar loss")
    if not loss.requires_grad:
        return
    order = _topo(loss)
    grads = {id(loss): np.ones_like(loss.value)}
    for node in reversed(order):
        g = grads.pop(id(node), None)
        if g is None:
            continue
        if node.op == "leaf":
            node.grad += g
            continue
        vjp = _VJP.get(node.op)
        if vjp is None:
            raise UnsupportedPrimitiveError(f"no gradient registered for primitive {node.op!r}")
        for p, pg in zip(node.parents, vjp(node, g)):
            if pg is None or not p.requires_grad:
                continue
            key = id(p)
            if key in grads:
                grads[key] = grads[key] + pg
            else:
                grads[key] = np.array(pg, dtype=np.float64, copy=True)


def zero_grad(params: Iterable[Tensor]) -> None:
    for p in params:
        p.grad = np.zeros_like(p.value)


def grad(loss: Tensor, params: Sequence[Tensor]) -> list[np.ndarray]:
    """Gradients of ``loss`` w.r.t. ``params``; unreached parameters get zeros."""
    zero_grad(params)
    backward(loss)
    return [p.grad for p in params]


def numeric_grad(fn: Callable[[], float], x: np.ndarray, h: float = 1e-5, coords=None) -> np.ndarray:
    """Central finite differences of ``fn`` w.r.t. ``x`` (mutated in place, then restored)."""
    flat = x.reshape(-1)
    out = np.zeros(flat.shape)
    idx = range(flat.size) if coords is None else coords
    for i in idx:
        old = flat[i]
        flat[i] = old + h
        fp = fn()
        flat[i] = old - h
        fm = fn()
        flat[i] = old
        out[i] = (fp - fm) / (2 * h)
    return out.reshape(x.shape)
