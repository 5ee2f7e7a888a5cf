"""Experiment configuration: INI files with one section per subsystem.

All hyperparameters default to the reference training recipe (Adam with
epsilon 1e-3; actor-critic lr 5e-4, entropy 0.01, value coefficient 0.5,
target tau 0.01, gamma 0.99, 5-step returns, 10 parallel envs, no gradient
clipping; embedding lr 1e-4, beta 0.1, latent size 3, clip 0.5), so a config
file only needs to say what it changes. Unknown keys are errors.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field, fields


class ConfigError(ValueError):
    """Malformed or contradictory run configuration."""


@dataclass
class A2CConfig:
    learning_rate: float = 5e-4
    adam_epsilon: float = 1e-3
    gamma: float = 0.99
    nstep: int = 5
    parallel_envs: int = 10
    entropy_coef: float = 0.01
    value_coef: float = 0.5
    target_tau: float = 0.01
    policy_hidden: int = 128
    critic_hidden: int = 128
    max_grad_norm: float | None = None
    critic_sees_embeddings: bool = False


@dataclass
class MateConfig:
    learning_rate: float = 1e-4
    adam_epsilon: float = 1e-3
    beta: float = 0.1
    embed_dim: int = 3
    encoder_hidden: int = 64
    decoder_hidden: int = 64
    max_grad_norm: float | None = 0.5
    straight_through: bool = False


@dataclass
class RunConfig:
    paradigm: str = "none"
    seed: int = 0
    out_dir: str = "runs/run"
    train_steps: int = 50_000
    test_steps: int = 50_000
    train_tasks: list = field(default_factory=list)
    test_tasks: list = field(default_factory=list)
    a2c: A2CConfig = field(default_factory=A2CConfig)
    mate: MateConfig = field(default_factory=MateConfig)
    env_overrides: dict = field(default_factory=dict)
    write_timestamp: bool = True

    def __post_init__(self):
        if self.paradigm not in ("none", "ind", "cen", "mix"):
            raise ConfigError(f"unknown paradigm '{self.paradigm}'")
        if self.train_steps < 1 or self.test_steps < 1:
            raise ConfigError("timestep budgets must be positive")

    def to_text(self) -> str:
        """Serialize the resolved configuration as INI (checkpoint echo)."""
        cp = configparser.ConfigParser()
        cp["run"] = {
            "paradigm": self.paradigm,
            "seed": str(self.seed),
            "out": self.out_dir,
            "train_steps": str(self.train_steps),
            "test_steps": str(self.test_steps),
        }
        cp["tasks"] = {
            "train": ",".join(self.train_tasks),
            "test": ",".join(self.test_tasks),
        }
        cp["a2c"] = {f.name: _fmt(getattr(self.a2c, f.name)) for f in fields(A2CConfig)}
        cp["mate"] = {f.name: _fmt(getattr(self.mate, f.name)) for f in fields(MateConfig)}
        if self.env_overrides:
            cp["env"] = {k: _fmt(v) for k, v in self.env_overrides.items()}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return repr(value) if isinstance(value, float) else str(value)


def _parse_value(text: str, kind: type):
    text = text.strip()
    if kind is bool:
        if text.lower() in ("true", "1", "yes", "on"):
            return True
        if text.lower() in ("false", "0", "no", "off"):
            return False
        raise ConfigError(f"expected a boolean, got '{text}'")
    if text == "" and kind is float:
        return None
    return kind(text)


def _fill_section(target, section, name: str):
    hints = {f.name: f for f in fields(type(target))}
    for key, raw in section.items():
        if key not in hints:
            raise ConfigError(f"unknown key '{key}' in section [{name}]")
        f = hints[key]
        kind = {"learning_rate": float, "adam_epsilon": float, "gamma": float,
                "nstep": int, "parallel_envs": int, "entropy_coef": float,
                "value_coef": float, "target_tau": float, "policy_hidden": int,
                "critic_hidden": int, "max_grad_norm": float,
                "critic_sees_embeddings": bool, "beta": float, "embed_dim": int,
                "encoder_hidden": int, "decoder_hidden": int,
                "straight_through": bool}[f.name]
        setattr(target, f.name, _parse_value(raw, kind))


def parse_config(text: str) -> RunConfig:
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as err:
        raise ConfigError(f"cannot parse config: {err}") from err

    known = {"run", "tasks", "a2c", "mate", "env"}
    unknown = set(cp.sections()) - known
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")

    cfg = RunConfig(train_tasks=["lbf:8x8-2p-2f"], test_tasks=["lbf:8x8-2p-2f"])
    if cp.has_section("run"):
        for key, raw in cp["run"].items():
            if key == "paradigm":
                cfg.paradigm = raw.strip()
            elif key == "seed":
                cfg.seed = int(raw)
            elif key == "out":
                cfg.out_dir = raw.strip()
            elif key == "train_steps":
                cfg.train_steps = int(float(raw))
            elif key == "test_steps":
                cfg.test_steps = int(float(raw))
            else:
                raise ConfigError(f"unknown key '{key}' in section [run]")
    if cp.has_section("tasks"):
        for key, raw in cp["tasks"].items():
            ids = [s.strip() for s in raw.split(",") if s.strip()]
            if key == "train":
                cfg.train_tasks = ids
            elif key == "test":
                cfg.test_tasks = ids
            else:
                raise ConfigError(f"unknown key '{key}' in section [tasks]")
    if cp.has_section("a2c"):
        _fill_section(cfg.a2c, cp["a2c"], "a2c")
    if cp.has_section("mate"):
        _fill_section(cfg.mate, cp["mate"], "mate")
    if cp.has_section("env"):
        for key, raw in cp["env"].items():
            val = float(raw)
            cfg.env_overrides[key] = int(val) if val.is_integer() else val
    cfg.__post_init__()
    if not cfg.train_tasks:
        raise ConfigError("no training tasks configured")
    return cfg


def load_config(path: str) -> RunConfig:
    with open(path) as f:
        return parse_config(f.read())
