"""Multi-agent RL workbench: task embeddings, recurrent A2C, gridworld benchmarks."""

from . import envs, nn
from .a2c import Learner, nstep_returns, soft_update
from .config import A2CConfig, ConfigError, MateConfig, RunConfig, load_config, parse_config
from .checkpoint import Checkpoint, CheckpointError, load_checkpoint, save_checkpoint
from .embeddings import (
    TaskEmbedder,
    TaskEmbedding,
    kl_std_normal,
    mate_loss,
    mixture_sample,
)
from .harness import RunResult, export_embeddings, run_finetune, run_report, run_train
from .stats import iqm, kmeans_task_purity, pca_project, stratified_bootstrap_ci
from .tasks import TaskError, TaskSet, TaskSpec, build_task_set, make_env, sample_task
from .vecenv import SyncVectorRunner

__version__ = "0.1.0"

__all__ = [
    "A2CConfig",
    "Checkpoint",
    "CheckpointError",
    "ConfigError",
    "Learner",
    "MateConfig",
    "RunConfig",
    "RunResult",
    "SyncVectorRunner",
    "TaskEmbedder",
    "TaskEmbedding",
    "TaskError",
    "TaskSet",
    "TaskSpec",
    "build_task_set",
    "envs",
    "export_embeddings",
    "iqm",
    "kl_std_normal",
    "kmeans_task_purity",
    "load_checkpoint",
    "load_config",
    "make_env",
    "mate_loss",
    "mixture_sample",
    "nn",
    "nstep_returns",
    "parse_config",
    "pca_project",
    "run_finetune",
    "run_report",
    "run_train",
    "sample_task",
    "save_checkpoint",
    "soft_update",
    "stratified_bootstrap_ci",
]
