"""Synchronous vectorized environment runner with per-slot auto-reset.

Each slot owns its own dynamics and task-sampling RNG streams, so the batch
is bit-reproducible and slots never couple. When a slot finishes an episode
it immediately resamples a task and resets; the reset observation replaces
the terminal one in the returned batch while the done flag (and the true
terminal observation, under `terminal_obs` in the slot info) is preserved for
return bootstrapping.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng as rngmod
from .tasks import TaskSet, TaskSpec, make_env, sample_task


@dataclass
class EpisodeRecord:
    slot: int
    task_id: str
    team_return: float
    agent_returns: np.ndarray
    length: int
    end_timestep: int = 0  # filled in by the learner's global counter


@dataclass
class VectorStep:
    """One synchronous tick across all slots."""

    rewards: np.ndarray          # (n_envs, n_agents)
    dones: np.ndarray            # (n_envs,) bool
    infos: list[dict]            # per slot; terminal_obs present where done
    finished: list[EpisodeRecord]


class SyncVectorRunner:
    def __init__(self, task_set: TaskSet, n_envs: int, master_seed: int,
                 rng_domain_offset: int = 0):
        if n_envs < 1:
            raise ValueError("need at least one environment slot")
        self.task_set = task_set
        self.n_envs = n_envs
        self.n_agents = task_set.n_agents
        self._env_rngs = [rngmod.stream(master_seed, rngmod.DOMAIN_ENV,
                                        k + rng_domain_offset) for k in range(n_envs)]
        self._sampler_rngs = [rngmod.stream(master_seed, rngmod.DOMAIN_TASK_SAMPLER,
                                            k + rng_domain_offset) for k in range(n_envs)]
        self.tasks: list[TaskSpec] = [None] * n_envs
        self.envs = [None] * n_envs
        self.obs: list[list[np.ndarray]] = [None] * n_envs
        self._ep_return = np.zeros((n_envs, self.n_agents))
        self._ep_len = np.zeros(n_envs, dtype=int)
        for k in range(n_envs):
            self._reset_slot(k)

    def _reset_slot(self, k: int) -> None:
        self.tasks[k] = sample_task(self.task_set, self._sampler_rngs[k])
        self.envs[k] = make_env(self.tasks[k])
        self.obs[k] = self.envs[k].reset(self._env_rngs[k])
        self._ep_return[k, :] = 0.0
        self._ep_len[k] = 0

    def stacked_obs(self) -> list[np.ndarray]:
        """Current observations as one (n_envs, obs_size) array per agent."""
        return [np.stack([self.obs[k][i] for k in range(self.n_envs)])
                for i in range(self.n_agents)]

    def step(self, actions: np.ndarray) -> VectorStep:
        """Step every slot with its row of `actions` ((n_envs, n_agents) ints)."""
        actions = np.asarray(actions)
        if actions.shape != (self.n_envs, self.n_agents):
            raise ValueError(f"expected actions of shape {(self.n_envs, self.n_agents)}, "
                             f"got {actions.shape}")
        rewards = np.zeros((self.n_envs, self.n_agents))
        dones = np.zeros(self.n_envs, dtype=bool)
        infos: list[dict] = []
        finished: list[EpisodeRecord] = []
        for k in range(self.n_envs):
            try:
                result = self.envs[k].step(actions[k])
            except ValueError as err:
                raise ValueError(f"environment slot {k}: {err}") from err
            rewards[k] = result.rewards
            dones[k] = result.done
            info = dict(result.info)
            self._ep_return[k] += result.rewards
            self._ep_len[k] += 1
            if result.done:
                info["terminal_obs"] = result.obs
                finished.append(EpisodeRecord(
                    slot=k,
                    task_id=self.tasks[k].task_id,
                    team_return=float(self._ep_return[k].sum()),
                    agent_returns=self._ep_return[k].copy(),
                    length=int(self._ep_len[k]),
                ))
                self._reset_slot(k)
            else:
                self.obs[k] = result.obs
            infos.append(info)
        return VectorStep(rewards=rewards, dones=dones, infos=infos, finished=finished)
