"""Cooperative particle navigation: three agents cover three landmarks.

Double-integrator point masses on an unbounded plane. Every agent receives
the same reward: minus the sum over landmarks of the distance to the closest
agent, minus a penalty per colliding agent pair. Fully observable.
"""

from __future__ import annotations

import numpy as np

from .base import StepResult, check_actions

STAY, RIGHT, LEFT, UP, DOWN = range(5)
N_ACTIONS = 5
N_AGENTS = 3
N_LANDMARKS = 3
# own velocity + own position + relative landmarks + relative other agents
OBS_SIZE = 2 + 2 + 2 * N_LANDMARKS + 2 * (N_AGENTS - 1)

_FORCE_DIR = {
    RIGHT: np.array([1.0, 0.0]),
    LEFT: np.array([-1.0, 0.0]),
    UP: np.array([0.0, 1.0]),
    DOWN: np.array([0.0, -1.0]),
}


class MpeEnv:
    def __init__(self, collision_penalty: float = 1.0, episode_limit: int = 25,
                 dt: float = 0.1, damping: float = 0.25, mass: float = 1.0,
                 force: float = 5.0, agent_radius: float = 0.15):
        self.n_agents = N_AGENTS
        self.collision_penalty = collision_penalty
        self.episode_limit = episode_limit
        self.dt = dt
        self.damping = damping
        self.mass = mass
        self.force = force
        self.agent_radius = agent_radius
        self.obs_size = OBS_SIZE
        self.n_actions = N_ACTIONS

    def reset(self, rng: np.random.Generator) -> list[np.ndarray]:
        self.pos = rng.uniform(-1.0, 1.0, size=(N_AGENTS, 2))
        self.vel = np.zeros((N_AGENTS, 2))
        self.landmarks = rng.uniform(-1.0, 1.0, size=(N_LANDMARKS, 2))
        self.t = 0
        return self._observe_all()

    def step(self, actions) -> StepResult:
        acts = check_actions(actions, N_AGENTS, N_ACTIONS)
        forces = np.zeros((N_AGENTS, 2))
        for i, a in enumerate(acts):
            if a != STAY:
                forces[i] = self.force * _FORCE_DIR[a]
        self.vel = (1.0 - self.damping) * self.vel + forces * self.dt / self.mass
        self.pos = self.pos + self.vel * self.dt

        dist_term = 0.0
        for lm in self.landmarks:
            dist_term += np.min(np.linalg.norm(self.pos - lm, axis=1))
        collisions = 0
        for i in range(N_AGENTS):
            for j in range(i + 1, N_AGENTS):
                if np.linalg.norm(self.pos[i] - self.pos[j]) < 2 * self.agent_radius:
                    collisions += 1
        reward = -dist_term - self.collision_penalty * collisions
        rewards = np.full(N_AGENTS, reward)

        self.t += 1
        done = self.t >= self.episode_limit
        return StepResult(self._observe_all(), rewards, done, {"collisions": collisions})

    def _observe_all(self) -> list[np.ndarray]:
        return [self._observe(i) for i in range(N_AGENTS)]

    def _observe(self, i: int) -> np.ndarray:
        parts = [self.vel[i], self.pos[i]]
        parts.extend(lm - self.pos[i] for lm in self.landmarks)
        parts.extend(self.pos[j] - self.pos[i] for j in range(N_AGENTS) if j != i)
        return np.concatenate(parts)

    def render_ascii(self) -> str:
        lines = [f"t={self.t}"]
        for i in range(N_AGENTS):
            lines.append(f"agent{i} pos=({self.pos[i][0]:+.2f},{self.pos[i][1]:+.2f}) "
                         f"vel=({self.vel[i][0]:+.2f},{self.vel[i][1]:+.2f})")
        for k, lm in enumerate(self.landmarks):
            lines.append(f"landmark{k} ({lm[0]:+.2f},{lm[1]:+.2f})")
        return "\n".join(lines)
