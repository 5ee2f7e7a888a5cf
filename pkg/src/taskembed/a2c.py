"""Multi-agent synchronous advantage actor-critic.

Each agent owns a recurrent softmax policy (FC-GRU-FC on its observation plus
the task-embedding conditioning vector), a centralized state-value critic on
the flattened joint observation, a soft-updated target critic used for
bootstrap values, and one Adam over its policy and critic. A training
iteration collects a 5-step batch from all parallel environments, computes
n-step returns, advantage actor-critic losses with entropy regularization,
the task-embedding loss when enabled, and applies the updates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import rng as rngmod
from .config import RunConfig
from .embeddings import TaskEmbedder
from .nn import (
    Adam,
    Dense,
    GruCell,
    Tensor,
    clip_grad_norm,
    concat,
    exp,
    log_softmax,
    prefix_parameters,
    relu,
)
from .tasks import TaskSet
from .vecenv import EpisodeRecord, SyncVectorRunner


class PolicyNetwork:
    """FC(h) -> GRU(h) -> FC(|A|) softmax policy with per-slot hidden state."""

    def __init__(self, obs_size: int, cond_size: int, n_actions: int,
                 rng: np.random.Generator, hidden: int = 128):
        self.hidden_size = hidden
        self.fc_in = Dense(obs_size + cond_size, hidden, rng)
        self.gru = GruCell(hidden, hidden, rng)
        self.head = Dense(hidden, n_actions, rng)

    def forward(self, x: Tensor, h: Tensor) -> tuple[Tensor, Tensor]:
        """Returns (action log-probabilities, new hidden state)."""
        y = relu(self.fc_in(x))
        h_new = self.gru(y, h)
        return log_softmax(self.head(h_new), axis=1), h_new

    def initial_state(self, batch: int) -> Tensor:
        return self.gru.initial_state(batch)

    def parameters(self):
        return (prefix_parameters("fc_in", self.fc_in)
                + prefix_parameters("gru", self.gru)
                + prefix_parameters("head", self.head))


class CriticNetwork:
    """FC(h) -> FC(1) state-value function on the flattened joint observation."""

    def __init__(self, input_size: int, rng: np.random.Generator, hidden: int = 128):
        self.fc_in = Dense(input_size, hidden, rng)
        self.head = Dense(hidden, 1, rng)

    def forward(self, x: Tensor) -> Tensor:
        return self.head(relu(self.fc_in(x)))

    def parameters(self):
        return prefix_parameters("fc_in", self.fc_in) + prefix_parameters("head", self.head)

    def clone_target(self) -> "CriticNetwork":
        """Frozen copy whose parameters track this critic via soft updates."""
        target = object.__new__(CriticNetwork)
        target.fc_in = object.__new__(Dense)
        target.head = object.__new__(Dense)
        for src_layer, tgt_layer in ((self.fc_in, target.fc_in), (self.head, target.head)):
            tgt_layer.in_size = src_layer.in_size
            tgt_layer.out_size = src_layer.out_size
            tgt_layer.w = Tensor(src_layer.w.data.copy())
            tgt_layer.b = Tensor(src_layer.b.data.copy())
        return target


def soft_update(target: CriticNetwork, source: CriticNetwork, tau: float) -> None:
    """target <- (1 - tau) * target + tau * source, elementwise."""
    for (_, tp), (_, sp) in zip(target.parameters(), source.parameters()):
        if tp.data.shape != sp.data.shape:
            raise ValueError("target/source parameter shapes differ")
        tp.data *= 1.0 - tau
        tp.data += tau * sp.data


def nstep_returns(rewards: np.ndarray, dones: np.ndarray, bootstrap: np.ndarray,
                  gamma: float) -> np.ndarray:
    """Backward-recursive n-step targets for a (slots, steps) reward batch.

    G_t = r_t + gamma * G_{t+1}, with the recursion cut (and the bootstrap
    zeroed) wherever a done flag is set.
    """
    if not 0.0 <= gamma < 1.0:
        raise ValueError("gamma must lie in [0, 1)")
    rewards = np.asarray(rewards, dtype=np.float64)
    dones = np.asarray(dones, dtype=bool)
    k, t = rewards.shape
    out = np.zeros((k, t))
    running = np.asarray(bootstrap, dtype=np.float64).reshape(k).copy()
    for step in range(t - 1, -1, -1):
        running = rewards[:, step] + gamma * running * (~dones[:, step])
        out[:, step] = running
    return out


@dataclass
class IterationMetrics:
    policy_loss: float
    value_loss: float
    entropy: float
    mate_loss: float | None
    episodes: list[EpisodeRecord] = field(default_factory=list)
    timesteps: int = 0


class Learner:
    """Owns all networks, optimizers and rollout state for one run."""

    def __init__(self, cfg: RunConfig, task_set: TaskSet, finetune: bool = False,
                 rng_domain_offset: int = 0):
        self.cfg = cfg
        self.task_set = task_set
        self.finetune = finetune
        self.n_agents = task_set.n_agents
        self.obs_size = task_set.obs_size
        self.n_actions = task_set.n_actions
        seed = cfg.seed
        k = cfg.a2c.parallel_envs
        self.runner = SyncVectorRunner(task_set, k, seed, rng_domain_offset)
        self.action_rng = rngmod.stream(seed, rngmod.DOMAIN_ACTION, rng_domain_offset)
        self.latent_rng = rngmod.stream(seed, rngmod.DOMAIN_LATENT, rng_domain_offset)

        cond = 2 * cfg.mate.embed_dim
        joint = self.n_agents * self.obs_size
        critic_in = joint + (self.n_agents * cond if cfg.a2c.critic_sees_embeddings else 0)
        self.policies, self.critics, self.targets = [], [], []
        self.optimizers: list[Adam] = []
        for i in range(self.n_agents):
            net_rng = rngmod.stream(seed, rngmod.DOMAIN_NET, 2 * i)
            policy = PolicyNetwork(self.obs_size, cond, self.n_actions, net_rng,
                                   cfg.a2c.policy_hidden)
            critic = CriticNetwork(critic_in, rngmod.stream(seed, rngmod.DOMAIN_NET, 2 * i + 1),
                                   cfg.a2c.critic_hidden)
            self.policies.append(policy)
            self.critics.append(critic)
            self.targets.append(critic.clone_target())
            params = (prefix_parameters(f"agent{i}.policy", policy)
                      + prefix_parameters(f"agent{i}.critic", critic))
            self.optimizers.append(Adam(params, cfg.a2c.learning_rate,
                                        eps=cfg.a2c.adam_epsilon))

        self.embedder: TaskEmbedder | None = None
        self.mate_optimizer: Adam | None = None
        if cfg.paradigm != "none":
            self.embedder = TaskEmbedder(
                cfg.paradigm, self.n_agents, self.obs_size, self.n_actions, k,
                rngmod.stream(seed, rngmod.DOMAIN_NET, 1000),
                d=cfg.mate.embed_dim, encoder_hidden=cfg.mate.encoder_hidden,
                decoder_hidden=cfg.mate.decoder_hidden,
                straight_through=cfg.mate.straight_through,
            )
            self.mate_optimizer = Adam(self.embedder.parameters(),
                                       cfg.mate.learning_rate, eps=cfg.mate.adam_epsilon)
        self._zero_cond = np.zeros((k, cond))
        self.hidden = [p.initial_state(k) for p in self.policies]
        self._eye_actions = np.eye(self.n_actions)
        self.timesteps = 0

    # -- parameter access -------------------------------------------------------

    def named_parameters(self):
        """Stable name -> tensor listing of every persisted parameter."""
        params = []
        for i in range(self.n_agents):
            params.extend(prefix_parameters(f"agent{i}.policy", self.policies[i]))
            params.extend(prefix_parameters(f"agent{i}.critic", self.critics[i]))
            params.extend(prefix_parameters(f"agent{i}.target", self.targets[i]))
        if self.embedder is not None:
            params.extend(prefix_parameters("mate", self.embedder))
        return params

    def _conditioning(self, agent: int) -> np.ndarray:
        if self.embedder is None:
            return self._zero_cond
        return self.embedder.conditioning(agent)

    def _critic_input(self, joint_obs: np.ndarray) -> np.ndarray:
        if not self.cfg.a2c.critic_sees_embeddings:
            return joint_obs
        conds = [self._conditioning(i) for i in range(self.n_agents)]
        return np.concatenate([joint_obs] + conds, axis=1)

    # -- training ---------------------------------------------------------------

    def train_iteration(self) -> IterationMetrics:
        cfg = self.cfg
        k = cfg.a2c.parallel_envs
        t_len = cfg.a2c.nstep
        n = self.n_agents

        logp_taken = [[] for _ in range(n)]
        entropies = [[] for _ in range(n)]
        values = [[] for _ in range(n)]
        rewards_buf = np.zeros((k, t_len, n))
        dones_buf = np.zeros((k, t_len), dtype=bool)
        episodes: list[EpisodeRecord] = []

        for t in range(t_len):
            obs_stack = self.runner.stacked_obs()
            joint_obs = np.concatenate(obs_stack, axis=1)
            critic_in = Tensor(self._critic_input(joint_obs))
            actions = np.zeros((k, n), dtype=np.int64)
            for i in range(n):
                x = Tensor(np.concatenate([obs_stack[i], self._conditioning(i)], axis=1))
                logp, self.hidden[i] = self.policies[i].forward(x, self.hidden[i])
                probs = np.exp(logp.data)
                u = self.action_rng.random((k, 1))
                acts = np.minimum((probs.cumsum(axis=1) < u).sum(axis=1),
                                  self.n_actions - 1)
                actions[:, i] = acts
                onehot = Tensor(self._eye_actions[acts])
                logp_taken[i].append((logp * onehot).sum(axis=1).reshape(k, 1))
                p = exp(logp)
                entropies[i].append(-(p * logp).sum(axis=1).reshape(k, 1))
                values[i].append(self.critics[i].forward(critic_in))

            step = self.runner.step(actions)
            rewards_buf[:, t, :] = step.rewards
            dones_buf[:, t] = step.dones
            self.timesteps += k
            for rec in step.finished:
                rec.end_timestep = self.timesteps
                episodes.append(rec)

            if self.embedder is not None:
                embs = self.embedder.encode_step(obs_stack, actions, step.rewards)
                next_joint = np.concatenate(self.runner.stacked_obs(), axis=1)
                if step.dones.any():
                    next_joint = next_joint.copy()
                    for slot in np.flatnonzero(step.dones):
                        next_joint[slot] = np.concatenate(
                            step.infos[slot]["terminal_obs"])
                self.embedder.accumulate_loss(embs, obs_stack, actions, step.rewards,
                                              next_joint, cfg.mate.beta, self.latent_rng)

            if step.dones.any():
                keep = Tensor((~step.dones).astype(float).reshape(k, 1))
                self.hidden = [h * keep for h in self.hidden]
                if self.embedder is not None:
                    self.embedder.reset_slots(step.dones)

        # losses
        next_joint_obs = np.concatenate(self.runner.stacked_obs(), axis=1)
        boot_in = Tensor(self._critic_input(next_joint_obs))
        policy_losses, value_losses, entropy_vals = [], [], []
        total_loss = None
        for i in range(n):
            bootstrap = self.targets[i].forward(boot_in).data.reshape(k)
            returns = nstep_returns(rewards_buf[:, :, i], dones_buf, bootstrap,
                                    cfg.a2c.gamma)
            v = concat(values[i], axis=1)  # (k, t)
            advantage = returns - v.data   # detached for the policy term
            logp = concat(logp_taken[i], axis=1)
            entropy = concat(entropies[i], axis=1)
            policy_loss = -(logp * advantage).mean() - cfg.a2c.entropy_coef * entropy.mean()
            diff = v - Tensor(returns)
            value_loss = (diff * diff).mean()
            agent_total = policy_loss + cfg.a2c.value_coef * value_loss
            total_loss = agent_total if total_loss is None else total_loss + agent_total
            policy_losses.append(float(policy_loss.data))
            value_losses.append(float(value_loss.data))
            entropy_vals.append(float(entropy.data.mean()))

        for opt in self.optimizers:
            opt.zero_grad()
        total_loss.backward()
        if cfg.a2c.max_grad_norm is not None:
            for opt in self.optimizers:
                clip_grad_norm(opt.params, cfg.a2c.max_grad_norm)
        for opt in self.optimizers:
            opt.step()

        mate_loss_val = None
        if self.embedder is not None:
            loss = self.embedder.batch_loss()
            mate_loss_val = float(loss.data)
            if not self.finetune:
                self.mate_optimizer.zero_grad()
                loss.backward()
                if cfg.mate.max_grad_norm is not None:
                    clip_grad_norm(self.mate_optimizer.params, cfg.mate.max_grad_norm)
                self.mate_optimizer.step()
            self.embedder.detach_hidden()

        self.hidden = [h.detach() for h in self.hidden]
        for i in range(n):
            soft_update(self.targets[i], self.critics[i], cfg.a2c.target_tau)

        return IterationMetrics(
            policy_loss=float(np.mean(policy_losses)),
            value_loss=float(np.mean(value_losses)),
            entropy=float(np.mean(entropy_vals)),
            mate_loss=mate_loss_val,
            episodes=episodes,
            timesteps=self.timesteps,
        )
