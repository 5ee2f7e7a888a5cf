"""Reverse-mode automatic differentiation on float64 numpy arrays.

Tensors record the ops that produced them; `backward()` on a scalar loss
replays the tape in reverse topological order and accumulates gradients on
every reachable tensor with `requires_grad`. Ops that networks need often
(affine map, GRU step, log-softmax) are fused into single graph nodes with
hand-written backward rules, which keeps graphs small enough to train for
millions of environment steps on one core.

Every forward result is checked for NaN/Inf and aborts the run on the first
non-finite value rather than letting it propagate.
"""

from __future__ import annotations

import math

import numpy as np

_NAN_CHECKS = True


def set_nan_checks(enabled: bool) -> None:
    """Enable/disable the non-finite forward check (on by default)."""
    global _NAN_CHECKS
    _NAN_CHECKS = bool(enabled)


def _check_finite(data: np.ndarray, op: str) -> None:
    if not _NAN_CHECKS:
        return
    # A finite sum implies all-finite entries: any NaN poisons the sum and
    # +inf/-inf either survives or cancels to NaN.
    if not math.isfinite(float(data.sum())):
        bad = data[~np.isfinite(data)]
        raise FloatingPointError(
            f"non-finite value in forward op '{op}': "
            f"{bad.size} bad entries, first={bad.flat[0]!r}, shape={data.shape}"
        )


class Tensor:
    """A float64 array plus its gradient slot and tape linkage."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward_fn")

    def __init__(self, data, requires_grad: bool = False):
        if isinstance(data, Tensor):
            data = data.data
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.grad = np.zeros_like(self.data) if requires_grad else None
        self._parents: tuple = ()
        self._backward_fn = None

    @property
    def shape(self):
        return self.data.shape

    @property
    def size(self):
        return self.data.size

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"

    def detach(self) -> "Tensor":
        """A view of the same values, cut off from the tape."""
        return Tensor(self.data)

    def zero_grad(self) -> None:
        if self.grad is not None:
            self.grad[...] = 0.0

    # -- graph construction -------------------------------------------------

    def _accum(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.array(g, dtype=np.float64)
            if self.grad.shape != self.data.shape:
                self.grad = np.broadcast_to(self.grad, self.data.shape).copy()
        else:
            self.grad += g

    def backward(self) -> None:
        """Accumulate gradients of this scalar into all reachable tensors."""
        if self.data.size != 1:
            raise ValueError(f"backward() needs a scalar root, got shape {self.data.shape}")
        topo: list[Tensor] = []
        visited: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
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
                if id(p) not in visited:
                    stack.append((p, False))
        self._accum(np.ones_like(self.data))
        for node in reversed(topo):
            if node._backward_fn is not None:
                node._backward_fn(node.grad)

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, Tensor):
            out = _node(self.data + other, (self,), "add")
            if out._parents:
                out._backward_fn = lambda g: self._accum(_unbroadcast(g, self.data.shape))
            return out
        out = _node(self.data + other.data, (self, other), "add")
        if out._parents:
            a, b = self, other

            def bw(g):
                if a.requires_grad or a._parents:
                    a._accum(_unbroadcast(g, a.data.shape))
                if b.requires_grad or b._parents:
                    b._accum(_unbroadcast(g, b.data.shape))

            out._backward_fn = bw
        return out

    __radd__ = __add__

    def __neg__(self):
        out = _node(-self.data, (self,), "neg")
        if out._parents:
            out._backward_fn = lambda g: self._accum(-g)
        return out

    def __sub__(self, other):
        if not isinstance(other, Tensor):
            out = _node(self.data - other, (self,), "sub")
            if out._parents:
                out._backward_fn = lambda g: self._accum(_unbroadcast(g, self.data.shape))
            return out
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Tensor):
            c = other
            out = _node(self.data * c, (self,), "mul")
            if out._parents:
                out._backward_fn = lambda g: self._accum(g * c)
            return out
        out = _node(self.data * other.data, (self, other), "mul")
        if out._parents:
            a, b = self, other

            def bw(g):
                if a.requires_grad or a._parents:
                    a._accum(_unbroadcast(g * b.data, a.data.shape))
                if b.requires_grad or b._parents:
                    b._accum(_unbroadcast(g * a.data, b.data.shape))

            out._backward_fn = bw
        return out

    __rmul__ = __mul__

    def __matmul__(self, other):
        if not isinstance(other, Tensor):
            other = Tensor(other)
        out = _node(self.data @ other.data, (self, other), "matmul")
        if out._parents:
            a, b = self, other

            def bw(g):
                if a.requires_grad or a._parents:
                    a._accum(g @ b.data.T)
                if b.requires_grad or b._parents:
                    b._accum(a.data.T @ g)

            out._backward_fn = bw
        return out

    def __getitem__(self, idx):
        out = _node(self.data[idx], (self,), "slice")
        if out._parents:
            src = self

            def bw(g):
                full = np.zeros_like(src.data)
                full[idx] = g
                src._accum(full)

            out._backward_fn = bw
        return out

    def reshape(self, *shape):
        out = _node(self.data.reshape(*shape), (self,), "reshape")
        if out._parents:
            src = self
            out._backward_fn = lambda g: src._accum(g.reshape(src.data.shape))
        return out

    def sum(self, axis=None, keepdims: bool = False):
        out = _node(self.data.sum(axis=axis, keepdims=keepdims), (self,), "sum")
        if out._parents:
            src = self

            def bw(g):
                gg = g
                if axis is not None and not keepdims:
                    gg = np.expand_dims(gg, axis)
                src._accum(np.broadcast_to(gg, src.data.shape))

            out._backward_fn = bw
        return out

    def mean(self, axis=None, keepdims: bool = False):
        if axis is None:
            n = self.data.size
        elif isinstance(axis, tuple):
            n = int(np.prod([self.data.shape[a] for a in axis]))
        else:
            n = self.data.shape[axis]
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / n)

    def item(self) -> float:
        if self.data.size != 1:
            raise ValueError(f"item() needs a single-element tensor, got {self.data.shape}")
        return float(self.data.flat[0])


def _node(data: np.ndarray, inputs: tuple, op: str) -> Tensor:
    """Make the output tensor; link it into the tape if any input is live."""
    _check_finite(np.asarray(data), op)
    out = Tensor(data)
    parents = tuple(p for p in inputs if p.requires_grad or p._parents)
    if parents:
        out._parents = parents
    return out


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    """Reduce a broadcast gradient back to the original operand shape."""
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, (gs, ss) in enumerate(zip(g.shape, shape)) if ss == 1 and gs != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g


# -- elementwise nonlinearities ---------------------------------------------


def relu(x: Tensor) -> Tensor:
    out = _node(np.maximum(x.data, 0.0), (x,), "relu")
    if out._parents:
        mask = x.data > 0.0
        out._backward_fn = lambda g: x._accum(g * mask)
    return out


def tanh(x: Tensor) -> Tensor:
    y = np.tanh(x.data)
    out = _node(y, (x,), "tanh")
    if out._parents:
        out._backward_fn = lambda g: x._accum(g * (1.0 - y * y))
    return out


def _sigmoid_np(x: np.ndarray) -> np.ndarray:
    # Piecewise-stable: never exponentiates a positive argument.
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def sigmoid(x: Tensor) -> Tensor:
    y = _sigmoid_np(x.data)
    out = _node(y, (x,), "sigmoid")
    if out._parents:
        out._backward_fn = lambda g: x._accum(g * y * (1.0 - y))
    return out


def exp(x: Tensor) -> Tensor:
    with np.errstate(over="ignore"):
        y = np.exp(x.data)
    out = _node(y, (x,), "exp")
    if out._parents:
        out._backward_fn = lambda g: x._accum(g * y)
    return out


def log(x: Tensor) -> Tensor:
    with np.errstate(divide="ignore", invalid="ignore"):
        y = np.log(x.data)
    out = _node(y, (x,), "log")
    if out._parents:
        out._backward_fn = lambda g: x._accum(g / x.data)
    return out


# -- shape ops ----------------------------------------------------------------


def concat(tensors: list, axis: int = 0) -> Tensor:
    datas = [t.data for t in tensors]
    out = _node(np.concatenate(datas, axis=axis), tuple(tensors), "concat")
    if out._parents:
        sizes = [d.shape[axis] for d in datas]
        offsets = np.cumsum([0] + sizes)
        ts = list(tensors)

        def bw(g):
            for t, lo, hi in zip(ts, offsets[:-1], offsets[1:]):
                if t.requires_grad or t._parents:
                    idx = [slice(None)] * g.ndim
                    idx[axis] = slice(lo, hi)
                    t._accum(g[tuple(idx)])

        out._backward_fn = bw
    return out


# -- fused network ops --------------------------------------------------------


def linear(x: Tensor, w: Tensor, b: Tensor | None = None) -> Tensor:
    """Affine map y = x @ w.T + b for row-batched x (B,in), w (out,in)."""
    if x.data.ndim != 2 or w.data.ndim != 2 or x.data.shape[1] != w.data.shape[1]:
        raise ValueError(f"linear shape mismatch: x {x.data.shape}, w {w.data.shape}")
    y = x.data @ w.data.T
    if b is not None:
        y += b.data
    inputs = (x, w) if b is None else (x, w, b)
    out = _node(y, inputs, "linear")
    if out._parents:

        def bw(g):
            if x.requires_grad or x._parents:
                x._accum(g @ w.data)
            if w.requires_grad or w._parents:
                w._accum(g.T @ x.data)
            if b is not None and (b.requires_grad or b._parents):
                b._accum(g.sum(axis=0))

        out._backward_fn = bw
    return out


def gru_step(x: Tensor, h: Tensor, wz, uz, bz, wr, ur, br, wn, un, bn) -> Tensor:
    """One GRU step for a row batch.

    z = sigmoid(x Wz' + h Uz' + bz)
    r = sigmoid(x Wr' + h Ur' + br)
    n = tanh(x Wn' + r * (h Un') + bn)
    h' = (1 - z) * n + z * h
    """
    xd, hd = x.data, h.data
    z = _sigmoid_np(xd @ wz.data.T + hd @ uz.data.T + bz.data)
    r = _sigmoid_np(xd @ wr.data.T + hd @ ur.data.T + br.data)
    u = hd @ un.data.T
    n = np.tanh(xd @ wn.data.T + r * u + bn.data)
    h_new = (1.0 - z) * n + z * hd
    inputs = (x, h, wz, uz, bz, wr, ur, br, wn, un, bn)
    out = _node(h_new, inputs, "gru_step")
    if out._parents:

        def bw(g):
            da_z = g * (hd - n) * z * (1.0 - z)
            da_n = g * (1.0 - z) * (1.0 - n * n)
            da_r = da_n * u * r * (1.0 - r)
            du = da_n * r
            if x.requires_grad or x._parents:
                x._accum(da_z @ wz.data + da_r @ wr.data + da_n @ wn.data)
            if h.requires_grad or h._parents:
                h._accum(g * z + da_z @ uz.data + da_r @ ur.data + du @ un.data)
            if wz.requires_grad:
                wz._accum(da_z.T @ xd)
                uz._accum(da_z.T @ hd)
                bz._accum(da_z.sum(axis=0))
                wr._accum(da_r.T @ xd)
                ur._accum(da_r.T @ hd)
                br._accum(da_r.sum(axis=0))
                wn._accum(da_n.T @ xd)
                un._accum(du.T @ hd)
                bn._accum(da_n.sum(axis=0))

        out._backward_fn = bw
    return out


def log_softmax(x: Tensor, axis: int = -1) -> Tensor:
    """Numerically stable log-softmax (max-subtracted)."""
    m = x.data.max(axis=axis, keepdims=True)
    shifted = x.data - m
    lse = np.log(np.exp(shifted).sum(axis=axis, keepdims=True))
    logp = shifted - lse
    out = _node(logp, (x,), "log_softmax")
    if out._parents:

        def bw(g):
            x._accum(g - np.exp(logp) * g.sum(axis=axis, keepdims=True))

        out._backward_fn = bw
    return out


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    """Stable softmax: positive entries summing to 1 along `axis`."""
    return exp(log_softmax(x, axis=axis))
