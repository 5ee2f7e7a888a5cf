"""Beacon corridor: the task-inference probe pair.

A one-row corridor with two agents and a drifting beacon. Every step both
agents receive +1 when the beacon sits in the "warm" half of the corridor
and 0 otherwise. Which half is warm is the task; the beacon drifts on its
own, so the agents can neither control nor chase the reward, and nothing in
the observation separates the two tasks. Every transition with the beacon
off-centre therefore carries task evidence that can only be explained by
latent task knowledge, which makes the pair the cleanest possible probe for
a trajectory encoder: same dynamics, same observations, reward placement and
nothing else distinguishing the tasks.
"""

from __future__ import annotations

import numpy as np

from .base import StepResult, check_actions, resolve_moves

STAY, WEST, EAST = range(3)
N_ACTIONS = 3


class ProbeCorridorEnv:
    def __init__(self, warm_end: str, width: int = 9, n_agents: int = 2,
                 episode_limit: int = 25):
        if warm_end not in ("west", "east"):
            raise ValueError(f"warm_end must be 'west' or 'east', got '{warm_end}'")
        if width < n_agents + 2 or width % 2 == 0:
            raise ValueError("corridor width must be odd and long enough")
        self.warm_end = warm_end
        self.width = width
        self.n_agents = n_agents
        self.episode_limit = episode_limit
        self.obs_size = 3 * width  # own, other, beacon position one-hots
        self.n_actions = N_ACTIONS

    def reset(self, rng: np.random.Generator) -> list[np.ndarray]:
        self._rng = rng
        cols = rng.choice(self.width - 2, size=self.n_agents, replace=False) + 1
        self.agent_col = [int(c) for c in cols]
        self.beacon = int(rng.integers(self.width))
        self.t = 0
        return self._observe_all()

    def step(self, actions) -> StepResult:
        acts = check_actions(actions, self.n_agents, N_ACTIONS)
        pos = [(0, c) for c in self.agent_col]
        proposals = []
        for (r, c), a in zip(pos, acts):
            delta = {STAY: 0, WEST: -1, EAST: 1}[a]
            nc = c + delta
            proposals.append((0, nc) if 0 <= nc < self.width else (0, c))
        self.agent_col = [c for _, c in resolve_moves(pos, proposals)]
        # lazy random walk, bouncing off the corridor ends
        drift = int(self._rng.integers(-1, 2))
        self.beacon = min(max(self.beacon + drift, 0), self.width - 1)

        mid = self.width // 2
        if self.beacon == mid:
            paid = 0.0
        elif self.warm_end == "west":
            paid = 1.0 if self.beacon < mid else 0.0
        else:
            paid = 1.0 if self.beacon > mid else 0.0
        rewards = np.full(self.n_agents, paid)
        self.t += 1
        done = self.t >= self.episode_limit
        return StepResult(self._observe_all(), rewards, done, {})

    def _observe_all(self) -> list[np.ndarray]:
        return [self._observe(i) for i in range(self.n_agents)]

    def _observe(self, i: int) -> np.ndarray:
        obs = np.zeros(3 * self.width)
        obs[self.agent_col[i]] = 1.0
        other = self.agent_col[1 - i] if self.n_agents == 2 else self.agent_col[i]
        obs[self.width + other] = 1.0
        obs[2 * self.width + self.beacon] = 1.0
        return obs

    def render_ascii(self) -> str:
        row = ["."] * self.width
        row[self.beacon] = "*"
        for i, c in enumerate(self.agent_col):
            row[c] = str(i)
        return "".join(row)
