"""Network building blocks: affine layers and GRU cells.

Weights initialize uniformly in +-sqrt(1/fan_in); biases follow their block's
fan-in. All parameters are float64 tensors with `requires_grad`.
"""

from __future__ import annotations

import numpy as np

from .tensor import Tensor, gru_step, linear


def parameter(data: np.ndarray) -> Tensor:
    return Tensor(np.asarray(data, dtype=np.float64), requires_grad=True)


def _uniform(rng: np.random.Generator, fan_in: int, shape) -> np.ndarray:
    limit = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-limit, limit, size=shape)


class Dense:
    """Affine layer y = W x + b with weight (out, in) and bias (out,)."""

    def __init__(self, in_size: int, out_size: int, rng: np.random.Generator):
        self.in_size = in_size
        self.out_size = out_size
        self.w = parameter(_uniform(rng, in_size, (out_size, in_size)))
        self.b = parameter(_uniform(rng, in_size, (out_size,)))

    def __call__(self, x: Tensor) -> Tensor:
        return linear(x, self.w, self.b)

    def parameters(self) -> list[tuple[str, Tensor]]:
        return [("w", self.w), ("b", self.b)]


class GruCell:
    """Gated recurrent unit cell (reset gate applied to the hidden path)."""

    def __init__(self, in_size: int, hidden_size: int, rng: np.random.Generator):
        self.in_size = in_size
        self.hidden_size = hidden_size
        h = hidden_size
        self.wz = parameter(_uniform(rng, in_size, (h, in_size)))
        self.uz = parameter(_uniform(rng, h, (h, h)))
        self.bz = parameter(_uniform(rng, h, (h,)))
        self.wr = parameter(_uniform(rng, in_size, (h, in_size)))
        self.ur = parameter(_uniform(rng, h, (h, h)))
        self.br = parameter(_uniform(rng, h, (h,)))
        self.wn = parameter(_uniform(rng, in_size, (h, in_size)))
        self.un = parameter(_uniform(rng, h, (h, h)))
        self.bn = parameter(_uniform(rng, h, (h,)))

    def __call__(self, x: Tensor, h: Tensor) -> Tensor:
        return gru_step(
            x, h,
            self.wz, self.uz, self.bz,
            self.wr, self.ur, self.br,
            self.wn, self.un, self.bn,
        )

    def initial_state(self, batch: int) -> Tensor:
        return Tensor(np.zeros((batch, self.hidden_size)))

    def parameters(self) -> list[tuple[str, Tensor]]:
        return [
            ("wz", self.wz), ("uz", self.uz), ("bz", self.bz),
            ("wr", self.wr), ("ur", self.ur), ("br", self.br),
            ("wn", self.wn), ("un", self.un), ("bn", self.bn),
        ]


def prefix_parameters(prefix: str, module) -> list[tuple[str, Tensor]]:
    """Namespace a module's parameters as `prefix.name`."""
    return [(f"{prefix}.{name}", p) for name, p in module.parameters()]
