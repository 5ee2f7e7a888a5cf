"""Variational task embeddings inferred from trajectories.

A recurrent encoder turns the transition stream (observation, action, reward)
into a diagonal-Gaussian task embedding (mu, sigma). A shared decoder is
trained to reconstruct the next joint observation and the joint rewards from
a sampled embedding plus the current joint observation and actions; the loss
is squared reconstruction error plus a beta-weighted closed-form KL to the
standard normal prior.

Three paradigms:
  ind   one encoder per agent on its local trajectory; every embedding is
        decoded against the joint targets and the reconstruction averaged
  cen   a single encoder on the joint trajectory
  mix   per-agent encoders combined into a Gaussian mixture whose weights
        come from a softmax layer on the joint observation; one sample drawn
        from the mixture is decoded, and the KL uses the convexity bound
        sum_i w_i KL(q_i || prior)

Policies receive (mu, sigma) as a detached conditioning vector: per-agent for
ind/mix (decentralised execution), shared for cen. At episode starts the
conditioning is the prior (mu=0, sigma=1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .nn import (
    Dense,
    GruCell,
    Tensor,
    concat,
    exp,
    log,
    prefix_parameters,
    relu,
    reparam_sample,
    softmax,
)

EMBED_DIM = 3
ENCODER_HIDDEN = 64
DECODER_HIDDEN = 64
PARADIGMS = ("none", "ind", "cen", "mix")


@dataclass
class TaskEmbedding:
    """Diagonal Gaussian over the latent task variable, for one slot batch."""

    mu: Tensor          # (batch, d)
    log_sigma: Tensor   # (batch, d)
    owner: int | str = "central"

    def sigma(self) -> Tensor:
        return exp(self.log_sigma)

    @property
    def sigma_data(self) -> np.ndarray:
        return np.exp(self.log_sigma.data)


def kl_std_normal(mu, sigma) -> Tensor:
    """Closed-form KL(N(mu, diag sigma^2) || N(0, I)), summed over the last axis.

    -1/2 * sum_j (1 + log sigma_j^2 - mu_j^2 - sigma_j^2)
    """
    if not isinstance(mu, Tensor):
        mu = Tensor(mu)
    if not isinstance(sigma, Tensor):
        sigma = Tensor(sigma)
    if np.any(sigma.data <= 0.0):
        raise ValueError("sigma must be elementwise positive")
    sig_sq = sigma * sigma
    inner = log(sig_sq) + 1.0 - mu * mu - sig_sq
    return inner.sum(axis=-1) * -0.5


def _kl_from_log_sigma(mu: Tensor, log_sigma: Tensor) -> Tensor:
    sig_sq = exp(log_sigma * 2.0)
    inner = log_sigma * 2.0 + 1.0 - mu * mu - sig_sq
    return inner.sum(axis=-1) * -0.5


def mate_loss(embeddings: list[TaskEmbedding], preds: list[Tensor], target,
              beta: float, weights: Tensor | None = None) -> Tensor:
    """Reconstruction-plus-KL objective for one batch of transitions.

    `preds` holds the decoder output for each sampled embedding (one per
    embedding for ind, a single entry for cen/mix); `target` is the
    concatenated next joint observation and joint rewards. Without `weights`
    the KL of the embeddings is averaged; with `weights` (batch, n) the
    mixture bound sum_i w_i KL_i is used.
    """
    if beta < 0:
        raise ValueError("beta must be non-negative")
    if not isinstance(target, Tensor):
        target = Tensor(target)
    recon = None
    for pred in preds:
        err = pred - target
        sq = (err * err).sum(axis=1)
        recon = sq if recon is None else recon + sq
    recon = recon * (1.0 / len(preds))
    kls = [_kl_from_log_sigma(e.mu, e.log_sigma) for e in embeddings]
    if weights is None:
        kl = kls[0]
        for extra in kls[1:]:
            kl = kl + extra
        kl = kl * (1.0 / len(kls))
    else:
        stacked = concat([k.reshape(-1, 1) for k in kls], axis=1)
        kl = (weights * stacked).sum(axis=1)
    return recon.mean() + beta * kl.mean()


def mixture_sample(embeddings: list[TaskEmbedding], weights: Tensor,
                   rng: np.random.Generator, straight_through: bool = False):
    """Draw one latent from the weighted mixture of diagonal Gaussians.

    Picks a component index per row from Categorical(weights), then samples it
    with the reparameterization trick; the pathwise gradient reaches only the
    chosen component. With `straight_through`, the sample is scaled by
    w_k / stop_grad(w_k) so the mixing weights also receive reconstruction
    gradient. Returns (z, chosen indices).
    """
    n = len(embeddings)
    batch = embeddings[0].mu.data.shape[0]
    w = weights.data
    u = rng.random((batch, 1))
    chosen = np.minimum((w.cumsum(axis=1) < u).sum(axis=1), n - 1)
    eps = rng.standard_normal((batch, EMBED_DIM))
    onehots = np.eye(n)[chosen]  # (batch, n)
    z = None
    for i, emb in enumerate(embeddings):
        mask = Tensor(onehots[:, i:i + 1])
        zi = (emb.mu + emb.sigma() * Tensor(eps)) * mask
        z = zi if z is None else z + zi
    if straight_through:
        w_k = (weights * Tensor(onehots)).sum(axis=1, keepdims=True)
        z = z * (w_k * (1.0 / np.maximum(w_k.data, 1e-12)))
    return z, chosen


class RecurrentEncoder:
    """FC -> GRU -> FC head emitting (mu, log sigma).

    The GRU update-gate bias starts positive so the fresh encoder already
    integrates over the episode instead of tracking only the last few
    transitions (the usual persistent-memory gate initialization).
    """

    UPDATE_GATE_BIAS = 2.0

    def __init__(self, input_size: int, rng: np.random.Generator,
                 hidden: int = ENCODER_HIDDEN, d: int = EMBED_DIM):
        self.d = d
        self.fc_in = Dense(input_size, hidden, rng)
        self.gru = GruCell(hidden, hidden, rng)
        self.gru.bz.data += self.UPDATE_GATE_BIAS
        self.head = Dense(hidden, 2 * d, rng)

    def step(self, x: Tensor, h: Tensor) -> tuple[Tensor, Tensor, Tensor]:
        """Advance one transition; returns (mu, log_sigma, new hidden)."""
        y = relu(self.fc_in(x))
        h_new = self.gru(y, h)
        out = self.head(h_new)
        return out[:, : self.d], out[:, self.d:], h_new

    def parameters(self):
        return (prefix_parameters("fc_in", self.fc_in)
                + prefix_parameters("gru", self.gru)
                + prefix_parameters("head", self.head))


class TransitionRewardDecoder:
    """Two FC layers mapping (z, joint obs, joint actions) to (next obs, rewards)."""

    def __init__(self, d: int, joint_obs: int, joint_actions: int, n_agents: int,
                 rng: np.random.Generator, hidden: int = DECODER_HIDDEN):
        self.out_size = joint_obs + n_agents
        self.fc_in = Dense(d + joint_obs + joint_actions, hidden, rng)
        self.head = Dense(hidden, self.out_size, rng)

    def __call__(self, z: Tensor, obs_actions: Tensor) -> Tensor:
        x = concat([z, obs_actions], axis=1)
        return self.head(relu(self.fc_in(x)))

    def parameters(self):
        return prefix_parameters("fc_in", self.fc_in) + prefix_parameters("head", self.head)


class MixingNetwork:
    """Single softmax layer over the joint observation producing the weights."""

    def __init__(self, joint_obs: int, n_agents: int, rng: np.random.Generator):
        self.layer = Dense(joint_obs, n_agents, rng)

    def __call__(self, joint_obs: Tensor) -> Tensor:
        return softmax(self.layer(joint_obs), axis=1)

    def parameters(self):
        return prefix_parameters("layer", self.layer)


class TaskEmbedder:
    """Paradigm orchestration over a batch of environment slots.

    Owns the encoders' per-slot hidden states and the detached conditioning
    vectors handed to the policies, and accumulates the per-step loss terms
    of the current rollout batch.
    """

    def __init__(self, paradigm: str, n_agents: int, obs_size: int, n_actions: int,
                 n_slots: int, rng: np.random.Generator, d: int = EMBED_DIM,
                 encoder_hidden: int = ENCODER_HIDDEN, decoder_hidden: int = DECODER_HIDDEN,
                 straight_through: bool = False):
        if paradigm not in ("ind", "cen", "mix"):
            raise ValueError(f"unknown paradigm '{paradigm}'")
        self.paradigm = paradigm
        self.n_agents = n_agents
        self.obs_size = obs_size
        self.n_actions = n_actions
        self.n_slots = n_slots
        self.d = d
        self.straight_through = straight_through
        joint_obs = n_agents * obs_size
        joint_act = n_agents * n_actions
        if paradigm == "cen":
            enc_in = joint_obs + joint_act + n_agents
            self.encoders = [RecurrentEncoder(enc_in, rng, encoder_hidden, d)]
        else:
            enc_in = obs_size + n_actions + 1
            self.encoders = [RecurrentEncoder(enc_in, rng, encoder_hidden, d)
                             for _ in range(n_agents)]
        self.decoder = TransitionRewardDecoder(d, joint_obs, joint_act, n_agents,
                                               rng, decoder_hidden)
        self.mixing = MixingNetwork(joint_obs, n_agents, rng) if paradigm == "mix" else None
        self._eye_actions = np.eye(n_actions)
        self.hidden = [enc.gru.initial_state(n_slots) for enc in self.encoders]
        self.cond = np.zeros((n_agents, n_slots, 2 * d))
        self.cond[:, :, d:] = 1.0  # prior sigma
        self.last_embeddings: list[TaskEmbedding] = []
        self.last_weights: np.ndarray | None = None
        self.last_weights_tensor: Tensor | None = None
        self._step_losses: list = []

    # -- rollout-side API -----------------------------------------------------

    def conditioning(self, agent: int) -> np.ndarray:
        """Detached (n_slots, 2d) policy input for one agent."""
        return self.cond[agent]

    def encode_step(self, obs_stack: list[np.ndarray], actions: np.ndarray,
                    rewards: np.ndarray) -> list[TaskEmbedding]:
        """Feed the transition (o_t, a_t, r_t) into every encoder.

        Advances hidden states and refreshes the conditioning vectors that
        policies will see at t+1.
        """
        onehots = [self._eye_actions[actions[:, i]] for i in range(self.n_agents)]
        embeddings: list[TaskEmbedding] = []
        if self.paradigm == "cen":
            x = Tensor(np.concatenate([np.concatenate(obs_stack, axis=1),
                                       np.concatenate(onehots, axis=1),
                                       rewards], axis=1))
            mu, log_sigma, self.hidden[0] = self.encoders[0].step(x, self.hidden[0])
            embeddings.append(TaskEmbedding(mu, log_sigma, "central"))
        else:
            for i, enc in enumerate(self.encoders):
                x = Tensor(np.concatenate([obs_stack[i], onehots[i],
                                           rewards[:, i:i + 1]], axis=1))
                mu, log_sigma, self.hidden[i] = enc.step(x, self.hidden[i])
                embeddings.append(TaskEmbedding(mu, log_sigma, i))
        self.last_embeddings = embeddings
        if self.mixing is not None:
            self.last_weights_tensor = self.mixing(
                Tensor(np.concatenate(obs_stack, axis=1)))
            self.last_weights = self.last_weights_tensor.data
        for i in range(self.n_agents):
            emb = embeddings[0] if self.paradigm == "cen" else embeddings[i]
            self.cond[i] = np.concatenate([emb.mu.data, emb.sigma_data], axis=1)
        return embeddings

    def accumulate_loss(self, embeddings: list[TaskEmbedding],
                        obs_stack: list[np.ndarray], actions: np.ndarray,
                        rewards: np.ndarray, next_joint_obs: np.ndarray,
                        beta: float, rng: np.random.Generator) -> None:
        """Decode sampled embeddings against this step's targets."""
        onehot = np.concatenate([self._eye_actions[actions[:, i]]
                                 for i in range(self.n_agents)], axis=1)
        obs_act = Tensor(np.concatenate([np.concatenate(obs_stack, axis=1), onehot], axis=1))
        target = np.concatenate([next_joint_obs, rewards], axis=1)
        weights = None
        if self.paradigm == "mix":
            weights = self.last_weights_tensor
            z, _ = mixture_sample(embeddings, weights, rng, self.straight_through)
            preds = [self.decoder(z, obs_act)]
        else:
            preds = []
            for emb in embeddings:
                z = reparam_sample(emb.mu, emb.sigma(), rng)
                preds.append(self.decoder(z, obs_act))
        self._step_losses.append(mate_loss(embeddings, preds, target, beta, weights))

    def batch_loss(self) -> Tensor:
        """Mean of the accumulated per-step losses; clears the accumulator."""
        if not self._step_losses:
            raise RuntimeError("no transitions accumulated")
        total = self._step_losses[0]
        for extra in self._step_losses[1:]:
            total = total + extra
        total = total * (1.0 / len(self._step_losses))
        self._step_losses = []
        return total

    def reset_slots(self, done_mask: np.ndarray) -> None:
        """Zero hidden state and restore prior conditioning for finished slots."""
        if not done_mask.any():
            return
        keep = Tensor((~done_mask).astype(float).reshape(-1, 1))
        self.hidden = [h * keep for h in self.hidden]
        for i in range(self.n_agents):
            self.cond[i][done_mask, : self.d] = 0.0
            self.cond[i][done_mask, self.d:] = 1.0

    def detach_hidden(self) -> None:
        """Truncate backprop-through-time at the rollout-batch boundary."""
        self.hidden = [h.detach() for h in self.hidden]
        self._step_losses = []

    def parameters(self):
        params = []
        for idx, enc in enumerate(self.encoders):
            params.extend(prefix_parameters(f"encoder{idx}", enc))
        params.extend(prefix_parameters("decoder", self.decoder))
        if self.mixing is not None:
            params.extend(prefix_parameters("mixing", self.mixing))
        return params
