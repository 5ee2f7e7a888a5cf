"""Differentiable computation: tensors, layers, optimizer, sampling."""

import numpy as np

from .tensor import (
    Tensor,
    concat,
    exp,
    gru_step,
    linear,
    log,
    log_softmax,
    relu,
    set_nan_checks,
    sigmoid,
    softmax,
    tanh,
)
from .layers import Dense, GruCell, parameter, prefix_parameters
from .optim import Adam, clip_grad_norm


def reparam_sample(mu: Tensor, sigma: Tensor, rng: np.random.Generator) -> Tensor:
    """Draw z = mu + sigma * eps with eps ~ N(0, I).

    Gradients flow to mu (identity) and sigma (eps), never into eps.
    """
    if np.any(sigma.data <= 0.0):
        raise ValueError("sigma must be elementwise positive")
    eps = Tensor(rng.standard_normal(mu.data.shape))
    return mu + sigma * eps


__all__ = [
    "Adam",
    "Dense",
    "GruCell",
    "Tensor",
    "clip_grad_norm",
    "concat",
    "exp",
    "gru_step",
    "linear",
    "log",
    "log_softmax",
    "parameter",
    "prefix_parameters",
    "relu",
    "reparam_sample",
    "set_nan_checks",
    "sigmoid",
    "softmax",
    "tanh",
]
