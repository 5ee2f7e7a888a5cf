"""Independent numerical oracles used across the test suite.

Nothing in here touches the library's backward pass: gradients come from
central finite differences, distributions from quadrature or Monte Carlo,
returns from literal unrolled sums.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import quad


def numerical_gradient(f, x: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central finite differences of scalar f at x, elementwise."""
    x = np.asarray(x, dtype=np.float64)
    grad = np.zeros_like(x)
    flat = x.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        fp = f(x)
        flat[i] = orig - h
        fm = f(x)
        flat[i] = orig
        gflat[i] = (fp - fm) / (2.0 * h)
    return grad


def relative_error(a: np.ndarray, b: np.ndarray) -> float:
    """Max elementwise |a-b| / max(1, |a|, |b|)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    denom = np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))
    return float(np.max(np.abs(a - b) / denom))


def kl_gaussian_quadrature(mu: float, sigma: float) -> float:
    """KL(N(mu, sigma^2) || N(0,1)) by numerical integration of q log(q/p)."""

    def integrand(z):
        logq = -0.5 * np.log(2 * np.pi) - np.log(sigma) - 0.5 * ((z - mu) / sigma) ** 2
        logp = -0.5 * np.log(2 * np.pi) - 0.5 * z * z
        return np.exp(logq) * (logq - logp)

    lo = mu - 12 * sigma
    hi = mu + 12 * sigma
    val, _ = quad(integrand, lo, hi, limit=200)
    return val


def nstep_returns_bruteforce(rewards, dones, bootstrap, gamma: float) -> np.ndarray:
    """Literal unrolled n-step return for one reward sequence.

    G_t = sum_{k=0..} gamma^k r_{t+k} until the batch ends or a done flag is
    hit; the bootstrap value is added at the batch end only if no done
    intervened.
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    dones = np.asarray(dones, dtype=bool)
    big_t = rewards.shape[0]
    out = np.zeros(big_t)
    for t in range(big_t):
        acc = 0.0
        disc = 1.0
        terminated = False
        for k in range(t, big_t):
            acc += disc * rewards[k]
            disc *= gamma
            if dones[k]:
                terminated = True
                break
        if not terminated:
            acc += disc * bootstrap
        out[t] = acc
    return out
