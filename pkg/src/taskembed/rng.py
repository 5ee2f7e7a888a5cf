"""Deterministic RNG stream splitting.

One master seed fans out into independent, counter-addressed streams so that
environment dynamics, task sampling, network initialization and action/latent
sampling never share state. Streams are addressed by a (domain, index) pair;
the same address always yields the same stream for a given master seed.
"""

from __future__ import annotations

import numpy as np

# Domain codes for SeedSequence spawn keys. Fixed forever: changing them
# changes every seeded run.
DOMAIN_NET = 0
DOMAIN_ENV = 1
DOMAIN_TASK_SAMPLER = 2
DOMAIN_ACTION = 3
DOMAIN_LATENT = 4
DOMAIN_EVAL = 5
DOMAIN_FINETUNE = 6


def stream(master_seed: int, domain: int, index: int = 0) -> np.random.Generator:
    """Return the generator at address (domain, index) under master_seed."""
    seq = np.random.SeedSequence(master_seed, spawn_key=(domain, index))
    return np.random.Generator(np.random.PCG64(seq))


def generator_state(gen: np.random.Generator) -> dict:
    return gen.bit_generator.state


def restore_generator(state: dict) -> np.random.Generator:
    gen = np.random.Generator(np.random.PCG64())
    gen.bit_generator.state = state
    return gen
