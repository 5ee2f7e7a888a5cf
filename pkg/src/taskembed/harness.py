"""Run orchestration: training, freeze-encoder fine-tuning, embedding export.

A run consumes its timestep budget in synchronous iterations of
(parallel envs x n-step) transitions, streams one metrics row per completed
episode, and persists a checkpoint. Fine-tuning restores a checkpoint,
freezes every task-embedding parameter and continues training policies and
critics on the testing tasks with fresh RNG streams.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import rng as rngmod
from .a2c import Learner
from .checkpoint import Checkpoint, CheckpointError, load_checkpoint, restore_into, save_checkpoint
from .config import RunConfig, parse_config
from .nn import Tensor
from .reporting import (
    EmbeddingWriter, MetricsWriter, aggregate_runs, final_window_iqm, read_embeddings,
    read_metrics, write_curves_csv, write_curves_svg, write_weight_traces,
)
from .tasks import TaskSet, build_task_set, make_env

logger = logging.getLogger("taskembed")

FINETUNE_STREAM_OFFSET = 1_000_000  # keeps fine-tune RNG disjoint from training


@dataclass
class RunResult:
    metrics_path: Path
    checkpoint_path: Path
    timesteps: int
    episodes: int
    final_iqm: float


def _iterations_for(budget: int, cfg: RunConfig) -> int:
    per_iter = cfg.a2c.parallel_envs * cfg.a2c.nstep
    return math.ceil(budget / per_iter)


def _snapshot(learner: Learner, cfg: RunConfig) -> Checkpoint:
    params = {name: p.data.copy() for name, p in learner.named_parameters()}
    opt_states = {f"agent{i}": opt.state_dict() for i, opt in enumerate(learner.optimizers)}
    if learner.mate_optimizer is not None:
        opt_states["mate"] = learner.mate_optimizer.state_dict()
    rng_states = {"action": rngmod.generator_state(learner.action_rng),
                  "latent": rngmod.generator_state(learner.latent_rng)}
    for k, gen in enumerate(learner.runner._env_rngs):
        rng_states[f"env{k}"] = rngmod.generator_state(gen)
    for k, gen in enumerate(learner.runner._sampler_rngs):
        rng_states[f"sampler{k}"] = rngmod.generator_state(gen)
    return Checkpoint(
        version=1,
        paradigm=cfg.paradigm,
        config_text=cfg.to_text(),
        timesteps=learner.timesteps,
        params=params,
        optimizer_states=opt_states,
        rng_states=rng_states,
    )


def _run_loop(learner: Learner, cfg: RunConfig, budget: int, out_dir: Path,
              log_every: int = 200) -> RunResult:
    out_dir.mkdir(parents=True, exist_ok=True)
    iterations = _iterations_for(budget, cfg)
    episodes = 0
    returns: list[float] = []
    with MetricsWriter(out_dir / "metrics.csv", timestamp=cfg.write_timestamp) as writer:
        for it in range(1, iterations + 1):
            metrics = learner.train_iteration()
            for rec in metrics.episodes:
                writer.add_episode(rec.end_timestep, rec.task_id, rec.team_return,
                                   metrics.policy_loss, metrics.value_loss,
                                   metrics.entropy, metrics.mate_loss)
                returns.append(rec.team_return)
                episodes += 1
            if it % log_every == 0 or it == iterations:
                recent = np.mean(returns[-100:]) if returns else float("nan")
                logger.info("iter %d/%d steps %d episodes %d return(100) %.4f",
                            it, iterations, learner.timesteps, episodes, recent)
    checkpoint_path = save_checkpoint(_snapshot(learner, cfg), out_dir)
    data = read_metrics(out_dir / "metrics.csv")
    final = final_window_iqm(data) if len(data) else float("nan")
    return RunResult(out_dir / "metrics.csv", checkpoint_path, learner.timesteps,
                     episodes, final)


def run_train(cfg: RunConfig) -> RunResult:
    """Train on the configured training tasks for the training budget."""
    task_set = build_task_set(cfg.train_tasks, cfg.env_overrides)
    learner = Learner(cfg, task_set)
    logger.info("training: paradigm=%s seed=%d tasks=%s budget=%d",
                cfg.paradigm, cfg.seed, cfg.train_tasks, cfg.train_steps)
    return _run_loop(learner, cfg, cfg.train_steps, Path(cfg.out_dir))


def run_finetune(cfg: RunConfig, checkpoint_path: str | Path) -> RunResult:
    """Restore a checkpoint and fine-tune on the testing tasks.

    Task-embedding parameters (encoders, decoder, mixing) stay frozen;
    policies, critics and their optimizer states continue from the
    checkpoint.
    """
    ckpt = load_checkpoint(checkpoint_path)
    if ckpt.paradigm != cfg.paradigm:
        raise CheckpointError(
            f"checkpoint paradigm '{ckpt.paradigm}' does not match config '{cfg.paradigm}'")
    task_set = build_task_set(cfg.test_tasks, cfg.env_overrides)
    learner = Learner(cfg, task_set, finetune=True,
                      rng_domain_offset=FINETUNE_STREAM_OFFSET)
    restore_into(learner.named_parameters(), ckpt.params)
    for i, opt in enumerate(learner.optimizers):
        opt.load_state_dict(ckpt.optimizer_states[f"agent{i}"])
    if learner.mate_optimizer is not None:
        learner.mate_optimizer.load_state_dict(ckpt.optimizer_states["mate"])
    logger.info("fine-tuning: paradigm=%s seed=%d tasks=%s budget=%d",
                cfg.paradigm, cfg.seed, cfg.test_tasks, cfg.test_steps)
    return _run_loop(learner, cfg, cfg.test_steps, Path(cfg.out_dir))


def export_embeddings(checkpoint_path: str | Path, out_dir: str | Path,
                      task_ids: list | None = None, episodes: int = 10,
                      greedy: bool = False, seed: int | None = None) -> Path:
    """Roll out the checkpointed policy and dump per-timestep embeddings.

    Writes `embeddings.csv` with one row per encoder per timestep: task id,
    encoder owner, mu, sigma and (for the mixture paradigm) the encoder's
    mixing weight.
    """
    ckpt = load_checkpoint(checkpoint_path)
    if ckpt.paradigm == "none":
        raise CheckpointError("checkpoint has no task-embedding encoders to export")
    cfg = parse_config(ckpt.config_text)
    cfg.a2c.parallel_envs = 1
    if seed is not None:
        cfg.seed = seed
    ids = task_ids if task_ids else cfg.test_tasks
    task_set = build_task_set(ids, cfg.env_overrides)
    learner = Learner(cfg, task_set, finetune=True)
    restore_into(learner.named_parameters(), ckpt.params)

    out_dir = Path(out_dir)
    action_rng = rngmod.stream(cfg.seed, rngmod.DOMAIN_EVAL, 0)
    env_rng = rngmod.stream(cfg.seed, rngmod.DOMAIN_EVAL, 1)
    d = cfg.mate.embed_dim
    path = out_dir / "embeddings.csv"
    with EmbeddingWriter(path, d=d) as writer:
        episode_idx = 0
        for task in task_set.tasks:
            for _ in range(episodes):
                _export_episode(learner, task, writer, episode_idx,
                                action_rng, env_rng, greedy)
                episode_idx += 1
    logger.info("exported embeddings for %d episodes to %s", episode_idx, path)
    return path


def _export_episode(learner: Learner, task, writer: EmbeddingWriter,
                    episode_idx: int, action_rng, env_rng, greedy: bool) -> None:
    env = make_env(task)
    obs = env.reset(env_rng)
    embedder = learner.embedder
    embedder.reset_slots(np.array([True]))
    embedder.detach_hidden()
    hidden = [p.initial_state(1) for p in learner.policies]
    n = learner.n_agents
    done = False
    t = 0
    while not done:
        actions = np.zeros((1, n), dtype=np.int64)
        obs_stack = [o.reshape(1, -1) for o in obs]
        for i in range(n):
            x = Tensor(np.concatenate([obs_stack[i], embedder.conditioning(i)], axis=1))
            logp, hidden[i] = learner.policies[i].forward(x, hidden[i])
            probs = np.exp(logp.data[0])
            if greedy:
                actions[0, i] = int(np.argmax(probs))
            else:
                actions[0, i] = int(np.minimum((probs.cumsum() < action_rng.random()).sum(),
                                               learner.n_actions - 1))
        result = env.step(actions[0])
        embedder.encode_step(obs_stack, actions, result.rewards.reshape(1, n))
        for idx, emb in enumerate(embedder.last_embeddings):
            weight = None
            if embedder.last_weights is not None:
                weight = float(embedder.last_weights[0, idx])
            writer.add(episode_idx, t, task.task_id, emb.owner,
                       emb.mu.data[0], emb.sigma_data[0], weight)
        obs = result.obs
        done = result.done
        t += 1
    embedder.detach_hidden()


def run_report(metric_files: list, out_dir: str | Path,
               embeddings_file: str | Path | None = None,
               n_resamples: int = 100_000) -> dict:
    """Aggregate metrics files into per-task curve CSVs and SVG plots."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    curves = aggregate_runs(metric_files, n_resamples=n_resamples)
    outputs: dict[str, Path] = {}
    single = len(curves) == 1
    for task, rows in curves.items():
        stem = "curves" if single else "curves-" + task.replace(":", "_").replace("/", "_")
        outputs[task] = write_curves_csv(rows, out_dir / f"{stem}.csv")
        write_curves_svg(rows, out_dir / f"{stem}.svg", title=task)
    if embeddings_file is not None:
        traces = write_weight_traces(read_embeddings(embeddings_file),
                                     out_dir / "weight_traces.csv")
        if traces is not None:
            outputs["weight_traces"] = traces
    return outputs
