"""Adam and global gradient-norm clipping."""

from __future__ import annotations

import numpy as np

from .tensor import Tensor


class Adam:
    """Bias-corrected Adam; epsilon is added to sqrt(v_hat)."""

    def __init__(self, params: list[tuple[str, Tensor]], lr: float,
                 eps: float = 1e-3, beta1: float = 0.9, beta2: float = 0.999):
        names = [n for n, _ in params]
        if len(set(names)) != len(names):
            raise ValueError("duplicate parameter names")
        self.params = list(params)
        self.lr = lr
        self.eps = eps
        self.beta1 = beta1
        self.beta2 = beta2
        self.t = 0
        self.m = {n: np.zeros_like(p.data) for n, p in params}
        self.v = {n: np.zeros_like(p.data) for n, p in params}
        self._scratch = {n: np.empty_like(p.data) for n, p in params}

    def zero_grad(self) -> None:
        for _, p in self.params:
            p.zero_grad()

    def step(self) -> None:
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        bc1 = 1.0 - b1 ** self.t
        bc2 = 1.0 - b2 ** self.t
        # p -= lr * (m/bc1) / (sqrt(v/bc2) + eps), refactored to keep all array
        # work in preallocated buffers
        scale = self.lr * np.sqrt(bc2) / bc1
        eps_term = self.eps * np.sqrt(bc2)
        for name, p in self.params:
            g = p.grad
            m = self.m[name]
            v = self.v[name]
            buf = self._scratch[name]
            m *= b1
            np.multiply(g, 1.0 - b1, out=buf)
            m += buf
            v *= b2
            np.multiply(g, g, out=buf)
            buf *= 1.0 - b2
            v += buf
            np.sqrt(v, out=buf)
            buf += eps_term
            np.divide(m, buf, out=buf)
            buf *= scale
            p.data -= buf

    def state_dict(self) -> dict:
        return {
            "t": self.t,
            "m": {n: a.copy() for n, a in self.m.items()},
            "v": {n: a.copy() for n, a in self.v.items()},
        }

    def load_state_dict(self, state: dict) -> None:
        self.t = int(state["t"])
        for n in self.m:
            self.m[n][...] = state["m"][n]
            self.v[n][...] = state["v"][n]


def clip_grad_norm(params: list[tuple[str, Tensor]], max_norm: float) -> float:
    """Scale all gradients so their global L2 norm is at most max_norm.

    Returns the pre-clip norm.
    """
    if max_norm <= 0:
        raise ValueError("max_norm must be positive")
    total = 0.0
    for _, p in params:
        g = p.grad
        total += float((g * g).sum())
    norm = float(np.sqrt(total))
    if norm > max_norm:
        scale = max_norm / norm
        for _, p in params:
            p.grad *= scale
    return norm
