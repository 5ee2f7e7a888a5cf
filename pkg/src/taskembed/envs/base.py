"""Shared environment machinery: step results and simultaneous-move resolution."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

# Cardinal offsets in fixed N, E, S, W order (rows grow downward).
CARDINAL = ((-1, 0), (0, 1), (1, 0), (0, -1))


@dataclass
class StepResult:
    """One synchronous tick: per-agent observations, rewards, terminal flag."""

    obs: list[np.ndarray]
    rewards: np.ndarray
    done: bool
    info: dict = field(default_factory=dict)


def resolve_moves(positions: list[tuple], proposals: list[tuple]) -> list[tuple]:
    """Resolve simultaneous grid moves deterministically.

    Agents proposing the same target cell all stay, swap pairs both stay, and
    moving onto an agent that ends up stationary is a no-op. Follow moves
    (into a cell being vacated) and rotation cycles are allowed. The result is
    independent of agent order and never stacks two agents.
    """
    n = len(positions)
    target = list(proposals)
    moving = [target[i] != positions[i] for i in range(n)]
    pos_of = {positions[i]: i for i in range(n)}
    changed = True
    while changed:
        changed = False
        by_target = defaultdict(list)
        for i in range(n):
            if moving[i]:
                by_target[target[i]].append(i)
        for group in by_target.values():
            if len(group) > 1:
                for i in group:
                    moving[i] = False
                changed = True
        for i in range(n):
            if not moving[i]:
                continue
            j = pos_of.get(target[i])
            if j is None or j == i:
                continue
            if not moving[j]:
                moving[i] = False
                changed = True
            elif target[j] == positions[i]:  # swap
                moving[i] = False
                moving[j] = False
                changed = True
    return [target[i] if moving[i] else positions[i] for i in range(n)]


def check_actions(actions, n_agents: int, n_actions: int) -> list[int]:
    acts = list(actions)
    if len(acts) != n_agents:
        raise ValueError(f"expected {n_agents} actions, got {len(acts)}")
    out = []
    for a in acts:
        ai = int(a)
        if not 0 <= ai < n_actions:
            raise ValueError(f"action index {ai} out of range [0, {n_actions})")
        out.append(ai)
    return out


def sample_free_cells(rng: np.random.Generator, height: int, width: int,
                      count: int, occupied: set) -> list[tuple]:
    """Draw `count` distinct in-bounds cells avoiding `occupied`."""
    free = [(r, c) for r in range(height) for c in range(width) if (r, c) not in occupied]
    if len(free) < count:
        raise ValueError("grid too crowded to place entities")
    idx = rng.choice(len(free), size=count, replace=False)
    return [free[i] for i in np.atleast_1d(idx)]
