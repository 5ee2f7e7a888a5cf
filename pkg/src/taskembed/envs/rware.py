"""Multi-robot warehouse: collect requested shelves and deliver them to goals.

Agents move forward in their heading, rotate (which rotates their egocentric
view), and toggle-load to pick up / put down shelves. Delivering a requested
shelf at a goal cell pays +1 and a new, currently unrequested shelf is drawn
so that the number of open requests always equals the number of agents.
Agents carrying a shelf cannot pass under stored shelves.
"""

from __future__ import annotations

import numpy as np

from .base import CARDINAL, StepResult, check_actions, resolve_moves, sample_free_cells
from .layouts import GridLayout

STAY, FORWARD, ROT_LEFT, ROT_RIGHT, TOGGLE = range(5)
N_ACTIONS = 5
WINDOW = 5
HALF = WINDOW // 2
N_LAYERS = 5  # shelves, requested shelves, agents, goals, boundary
OBS_SIZE = WINDOW * WINDOW * N_LAYERS + 4 + 2  # 131

# Frame offset -> world offset for each heading (N, E, S, W).
_ROTATE = (
    lambda fr, fc: (fr, fc),
    lambda fr, fc: (fc, -fr),
    lambda fr, fc: (-fr, -fc),
    lambda fr, fc: (-fc, fr),
)


class RwareEnv:
    def __init__(self, layout: GridLayout, n_agents: int, episode_limit: int = 500):
        if not layout.goals:
            raise ValueError(f"rware layout '{layout.name}' has no delivery cells")
        if len(layout.shelves) <= n_agents:
            raise ValueError("need more shelves than agents to keep a request pool")
        self.layout = layout
        self.n_agents = n_agents
        self.episode_limit = episode_limit
        self.obs_size = OBS_SIZE
        self.n_actions = N_ACTIONS

    def reset(self, rng: np.random.Generator) -> list[np.ndarray]:
        self._rng = rng
        lay = self.layout
        self.shelf_pos = {i: cell for i, cell in enumerate(sorted(lay.shelves))}
        spawn_blocked = set(lay.shelves) | set(lay.goals)
        self.agent_pos = sample_free_cells(rng, lay.height, lay.width,
                                           self.n_agents, spawn_blocked)
        self.heading = [int(h) for h in rng.integers(0, 4, size=self.n_agents)]
        self.carrying: list[int | None] = [None] * self.n_agents
        ids = sorted(self.shelf_pos)
        chosen = rng.choice(len(ids), size=self.n_agents, replace=False)
        self.requests = {ids[i] for i in np.atleast_1d(chosen)}
        self.t = 0
        return self._observe_all()

    def step(self, actions) -> StepResult:
        acts = check_actions(actions, self.n_agents, N_ACTIONS)
        n = self.n_agents
        stored_cells = {cell: sid for sid, cell in self.shelf_pos.items()}

        for i, a in enumerate(acts):
            if a == ROT_LEFT:
                self.heading[i] = (self.heading[i] - 1) % 4
            elif a == ROT_RIGHT:
                self.heading[i] = (self.heading[i] + 1) % 4

        proposals = list(self.agent_pos)
        for i, a in enumerate(acts):
            if a != FORWARD:
                continue
            dr, dc = CARDINAL[self.heading[i]]
            tgt = (self.agent_pos[i][0] + dr, self.agent_pos[i][1] + dc)
            if not self.layout.in_bounds(tgt):
                continue
            if self.carrying[i] is not None and tgt in stored_cells:
                continue
            proposals[i] = tgt
        self.agent_pos = resolve_moves(self.agent_pos, proposals)

        for i, a in enumerate(acts):
            if a != TOGGLE:
                continue
            cell = self.agent_pos[i]
            stored = {c: s for s, c in self.shelf_pos.items()}
            if self.carrying[i] is None:
                sid = stored.get(cell)
                if sid is not None:
                    self.carrying[i] = sid
                    del self.shelf_pos[sid]
            else:
                if cell not in stored:
                    self.shelf_pos[self.carrying[i]] = cell
                    self.carrying[i] = None

        rewards = np.zeros(n)
        deliveries = 0
        for i in range(n):
            sid = self.carrying[i]
            if sid is not None and self.agent_pos[i] in self.layout.goals and sid in self.requests:
                rewards[i] += 1.0
                deliveries += 1
                self.requests.discard(sid)
                # resample excluding the shelf just delivered, so standing on
                # the goal cannot farm the same delivery
                pool = sorted(self._all_shelf_ids() - self.requests - {sid})
                new = pool[int(self._rng.integers(len(pool)))]
                self.requests.add(new)

        self.t += 1
        done = self.t >= self.episode_limit
        return StepResult(self._observe_all(), rewards, done, {"deliveries": deliveries})

    def _all_shelf_ids(self) -> set:
        ids = set(self.shelf_pos)
        ids.update(s for s in self.carrying if s is not None)
        return ids

    # -- observation ----------------------------------------------------------

    def _observe_all(self) -> list[np.ndarray]:
        return [self._observe(i) for i in range(self.n_agents)]

    def _observe(self, i: int) -> np.ndarray:
        lay = self.layout
        pos = self.agent_pos[i]
        head = self.heading[i]
        rot = _ROTATE[head]
        shelf_cells = {}
        for sid, cell in self.shelf_pos.items():
            shelf_cells[cell] = sid
        for j, sid in enumerate(self.carrying):
            if sid is not None:
                shelf_cells[self.agent_pos[j]] = sid
        agent_cells = set(self.agent_pos)

        grid = np.zeros((N_LAYERS, WINDOW, WINDOW))
        for fr in range(-HALF, HALF + 1):
            for fc in range(-HALF, HALF + 1):
                dr, dc = rot(fr, fc)
                cell = (pos[0] + dr, pos[1] + dc)
                wi, wj = fr + HALF, fc + HALF
                if not lay.in_bounds(cell):
                    grid[4, wi, wj] = 1.0
                    continue
                sid = shelf_cells.get(cell)
                if sid is not None:
                    grid[0, wi, wj] = 1.0
                    if sid in self.requests:
                        grid[1, wi, wj] = 1.0
                if cell in agent_cells:
                    grid[2, wi, wj] = 1.0
                if cell in lay.goals:
                    grid[3, wi, wj] = 1.0

        rot_onehot = np.zeros(4)
        rot_onehot[head] = 1.0
        carrying = 1.0 if self.carrying[i] is not None else 0.0
        on_shelf = 1.0 if pos in {c for c in self.shelf_pos.values()} else 0.0
        return np.concatenate([grid.ravel(), rot_onehot, [carrying, on_shelf]])

    def render_ascii(self) -> str:
        lay = self.layout
        rows = [["."] * lay.width for _ in range(lay.height)]
        for cell in lay.goals:
            rows[cell[0]][cell[1]] = "g"
        for sid, cell in self.shelf_pos.items():
            rows[cell[0]][cell[1]] = "S" if sid in self.requests else "x"
        for i, cell in enumerate(self.agent_pos):
            rows[cell[0]][cell[1]] = "^>v<"[self.heading[i]]
        return "\n".join("".join(r) for r in rows)
