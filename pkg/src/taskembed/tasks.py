"""Task specifications, the task registry, and per-episode task sampling.

A task is one partially observable stochastic game: an environment family, a
layout, an agent count and numeric parameters. Task ids look like
`rware:tiny-2ag` or `lbf:8x8-2p-2f`; group ids expand to several layout
variants (e.g. the warehouse column-height variants) that together form a
task set. All tasks in a set must agree on agent count, observation size and
action count.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .envs import bpush, lbf, mpe, probe, rware
from .envs.layouts import load_layout

ENV_KINDS = ("rware", "mpe", "bpush", "lbf", "probe")


class TaskError(ValueError):
    """Unresolvable task id or invalid task parameters."""


@dataclass(frozen=True)
class TaskSpec:
    env_kind: str
    layout_id: str
    n_agents: int
    params: tuple = ()  # sorted (name, value) pairs
    label: str = ""     # display id; defaults to env_kind:layout_id

    def __post_init__(self):
        if self.env_kind not in ENV_KINDS:
            raise TaskError(f"unknown environment kind '{self.env_kind}'")
        if self.n_agents < 1:
            raise TaskError("n_agents must be at least 1")
        if isinstance(self.params, dict):
            object.__setattr__(self, "params", tuple(sorted(self.params.items())))
        if not self.label:
            object.__setattr__(self, "label", f"{self.env_kind}:{self.layout_id}")
        if self.param("episode_limit", 1) < 1:
            raise TaskError("episode limit must be at least 1")

    @property
    def task_id(self) -> str:
        return self.label

    def param(self, name: str, default=None):
        for k, v in self.params:
            if k == name:
                return v
        return default

    def with_params(self, **updates) -> "TaskSpec":
        merged = dict(self.params)
        merged.update(updates)
        return TaskSpec(self.env_kind, self.layout_id, self.n_agents,
                        tuple(sorted(merged.items())), self.label)


_DEFAULT_LIMITS = {"rware": 500, "mpe": 25, "bpush": 50, "lbf": 50, "probe": 25}


def task_shapes(task: TaskSpec) -> tuple[int, int]:
    """(per-agent observation size, action-space size) for a task."""
    if task.env_kind == "probe":
        return 3 * int(task.param("width", 9)), probe.N_ACTIONS
    sizes = {
        "rware": (rware.OBS_SIZE, rware.N_ACTIONS),
        "bpush": (bpush.OBS_SIZE, bpush.N_ACTIONS),
        "lbf": (lbf.OBS_SIZE, lbf.N_ACTIONS),
        "mpe": (mpe.OBS_SIZE, mpe.N_ACTIONS),
    }
    return sizes[task.env_kind]


def make_env(task: TaskSpec):
    """Instantiate the environment a task describes (validates the layout id)."""
    limit = int(task.param("episode_limit", _DEFAULT_LIMITS[task.env_kind]))
    if task.env_kind == "rware":
        layout = load_layout(task.layout_id)
        return rware.RwareEnv(layout, task.n_agents, episode_limit=limit)
    if task.env_kind == "bpush":
        layout = load_layout(task.layout_id)
        return bpush.BpushEnv(layout, task.n_agents, episode_limit=limit,
                              push_penalty=float(task.param("push_penalty", 0.0)),
                              spawn_easy_prob=float(task.param("spawn_easy_prob", 0.5)))
    if task.env_kind == "lbf":
        size = lbf.parse_grid_size(task.layout_id)
        if size is not None:
            return lbf.LbfEnv(
                task.n_agents, size[0], size[1],
                n_food=int(task.param("n_food", task.n_agents)),
                episode_limit=limit,
                coop=bool(task.param("coop", 0)),
                penalty=float(task.param("penalty", 0.0)),
                max_agent_level=int(task.param("max_agent_level", 2)),
            )
        layout = load_layout(task.layout_id)
        return lbf.LbfEnv(
            len(layout.agent_spawns), layout.height, layout.width,
            n_food=len(layout.food), episode_limit=limit,
            penalty=float(task.param("penalty", 0.0)), static=layout,
        )
    if task.env_kind == "mpe":
        return mpe.MpeEnv(
            collision_penalty=float(task.param("collision_penalty", 1.0)),
            episode_limit=limit,
            dt=float(task.param("dt", 0.1)),
            damping=float(task.param("damping", 0.25)),
            mass=float(task.param("mass", 1.0)),
            force=float(task.param("force", 5.0)),
            agent_radius=float(task.param("agent_radius", 0.15)),
        )
    if task.env_kind == "probe":
        return probe.ProbeCorridorEnv(
            task.layout_id, width=int(task.param("width", 9)),
            n_agents=task.n_agents, episode_limit=limit,
        )
    raise TaskError(f"unknown environment kind '{task.env_kind}'")


@dataclass(frozen=True)
class TaskSet:
    """Nonempty task collection with identical agent count and shapes."""

    tasks: tuple

    def __post_init__(self):
        if not self.tasks:
            raise TaskError("task set is empty")
        object.__setattr__(self, "tasks", tuple(self.tasks))
        n = self.tasks[0].n_agents
        shapes = task_shapes(self.tasks[0])
        for t in self.tasks[1:]:
            if t.n_agents != n or task_shapes(t) != shapes:
                raise TaskError(
                    f"task {t.task_id} breaks the shared-shape constraint "
                    f"(agents {t.n_agents} vs {n}, shapes {task_shapes(t)} vs {shapes})"
                )
        for t in self.tasks:
            if t.env_kind in ("rware", "bpush") or (
                    t.env_kind == "lbf" and lbf.parse_grid_size(t.layout_id) is None):
                load_layout(t.layout_id)  # fail fast on unknown layouts
            elif t.env_kind == "probe" and t.layout_id not in ("west", "east"):
                raise TaskError(f"unknown probe variant '{t.layout_id}'")

    @property
    def n_agents(self) -> int:
        return self.tasks[0].n_agents

    @property
    def obs_size(self) -> int:
        return task_shapes(self.tasks[0])[0]

    @property
    def n_actions(self) -> int:
        return task_shapes(self.tasks[0])[1]

    def __len__(self):
        return len(self.tasks)


def sample_task(task_set: TaskSet, rng: np.random.Generator) -> TaskSpec:
    """Uniform draw; a fresh task is sampled for every episode."""
    return task_set.tasks[int(rng.integers(len(task_set.tasks)))]


# -- task id resolution --------------------------------------------------------

_RWARE_HEIGHTS = {"tiny": (3, 6, 10), "small": (3, 8), "corridor": (3, 6, 10),
                  "wide-left": (3, 6), "wide-right": (3, 6), "wide-both": (3, 6)}
_RWARE_ID = re.compile(r"^(tiny|small|corridor|wide-left|wide-right|wide-both|wide-one-sided)"
                       r"(?:-h(\d+))?-(\d+)ag$")
_BPUSH_ID = re.compile(r"^(small|medium|large)(-pen)?-(\d+)ag$")
_LBF_ID = re.compile(r"^(\d+x\d+)-(\d+)p-(\d+)f(-coop)?(-pen)?$")
_MPE_IDS = {"coop": 1.0, "pen5": 5.0, "pen50": 50.0}


def resolve_tasks(task_id: str) -> list[TaskSpec]:
    """Expand one id (possibly a group) into its task specs."""
    kind, sep, name = task_id.partition(":")
    if not sep:
        raise TaskError(f"task id '{task_id}' must look like 'env:name'")
    if kind == "rware":
        m = _RWARE_ID.match(name)
        if not m:
            raise TaskError(f"unknown warehouse task '{task_id}'")
        family, height, agents = m.group(1), m.group(2), int(m.group(3))
        if family == "wide-one-sided":
            families = ["wide-left", "wide-right"]
        else:
            families = [family]
        specs = []
        for fam in families:
            heights = [int(height)] if height else _RWARE_HEIGHTS[fam]
            specs.extend(TaskSpec("rware", f"rware/{fam}-h{h}", agents,
                                  label=f"rware:{fam}-h{h}-{agents}ag")
                         for h in heights)
        return specs
    if kind == "bpush":
        m = _BPUSH_ID.match(name)
        if not m:
            raise TaskError(f"unknown boulder-push task '{task_id}'")
        size, pen, agents = m.group(1), m.group(2), int(m.group(3))
        params = {"push_penalty": 0.01} if pen else {}
        return [TaskSpec("bpush", f"bpush/{size}", agents, params, label=task_id)]
    if kind == "lbf":
        m = _LBF_ID.match(name)
        if m:
            grid, agents, food, coop, pen = m.groups()
            params = {"n_food": int(food)}
            if coop:
                params["coop"] = 1
            if pen:
                params["penalty"] = 0.1
            return [TaskSpec("lbf", grid, int(agents), params, label=task_id)]
        layout = load_layout(f"lbf/{name}")  # static layouts: probe-west, onestep, ...
        params = {}
        if name == "onestep":
            params["episode_limit"] = 1
        return [TaskSpec("lbf", f"lbf/{name}", len(layout.agent_spawns), params,
                         label=task_id)]
    if kind == "mpe":
        if name not in _MPE_IDS:
            raise TaskError(f"unknown particle task '{task_id}'")
        return [TaskSpec("mpe", name, 3, {"collision_penalty": _MPE_IDS[name]},
                         label=task_id)]
    if kind == "probe":
        if name not in ("west", "east"):
            raise TaskError(f"unknown probe task '{task_id}'")
        return [TaskSpec("probe", name, 2, label=task_id)]
    raise TaskError(f"unknown environment kind in '{task_id}'")


def build_task_set(task_ids: list[str], overrides: dict | None = None) -> TaskSet:
    """Resolve ids (comma-lists allowed) and apply numeric parameter overrides."""
    specs: list[TaskSpec] = []
    for entry in task_ids:
        for tid in entry.split(","):
            tid = tid.strip()
            if tid:
                specs.extend(resolve_tasks(tid))
    if overrides:
        specs = [s.with_params(**overrides) for s in specs]
    return TaskSet(tuple(specs))
