"""Boulder-push: all agents must shove a multi-cell box to a goal line.

The box spans one cell per agent, perpendicular to its fixed push direction.
It advances exactly when every box cell is pushed simultaneously: each agent
stands on the opposite side of a box cell and moves into it. A successful
push pays +0.1 to every agent (and the agents follow the box); reaching the
goal line pays +1 to every agent and ends the episode. In penalty variants a
lone pushing attempt costs that agent -0.01.
"""

from __future__ import annotations

import numpy as np

from .base import CARDINAL, StepResult, check_actions, resolve_moves, sample_free_cells
from .layouts import GridLayout

N_ACTIONS = 4  # move N, E, S, W
WINDOW = 9
HALF = WINDOW // 2
OBS_SIZE = WINDOW * WINDOW * 2 + 4  # agents layer, box layer, direction one-hot

PUSH_REWARD = 0.1
GOAL_REWARD = 1.0


class BpushEnv:
    def __init__(self, layout: GridLayout, n_agents: int, episode_limit: int = 50,
                 push_penalty: float = 0.0, spawn_easy_prob: float = 0.5):
        self.height = layout.height
        self.width = layout.width
        if min(self.height, self.width) < n_agents + 2:
            raise ValueError("arena too small for the box and its pushers")
        self.n_agents = n_agents
        self.episode_limit = episode_limit
        self.push_penalty = push_penalty
        self.spawn_easy_prob = spawn_easy_prob
        self.obs_size = OBS_SIZE
        self.n_actions = N_ACTIONS

    def reset(self, rng: np.random.Generator) -> list[np.ndarray]:
        n = self.n_agents
        self.direction = int(rng.integers(4))
        dr, dc = CARDINAL[self.direction]
        if dr != 0:  # vertical push: box is a horizontal run of cells
            # keep one row behind the box for pushers and at least one ahead
            row = int(rng.integers(1, self.height - 1))
            col = int(rng.integers(0, self.width - n + 1))
            self.box = [(row, col + k) for k in range(n)]
            travel = row if dr < 0 else self.height - 1 - row
            self.goal_line = row + dr * int(rng.integers(1, travel + 1))
        else:  # horizontal push: vertical run of cells
            col = int(rng.integers(1, self.width - 1))
            row = int(rng.integers(0, self.height - n + 1))
            self.box = [(row + k, col) for k in range(n)]
            travel = col if dc < 0 else self.width - 1 - col
            self.goal_line = col + dc * int(rng.integers(1, travel + 1))
        self.initial_distance = abs(self._box_line() - self.goal_line)
        self.agent_pos = self._spawn_agents(rng)
        self.t = 0
        return self._observe_all()

    def _spawn_agents(self, rng: np.random.Generator) -> list[tuple]:
        """Random placement in sight of the box.

        With probability `spawn_easy_prob` the agents start on the cells
        directly behind the box (pushing stance); otherwise anywhere within
        the 9x9 observation range of it. Either way the box is observable
        from the start.
        """
        dr, dc = CARDINAL[self.direction]
        if rng.random() < self.spawn_easy_prob:
            cells = [(br - dr, bc - dc) for br, bc in self.box
                     if self._in_bounds((br - dr, bc - dc))]
        else:
            box = set(self.box)
            cells = [(r, c) for r in range(self.height) for c in range(self.width)
                     if (r, c) not in box
                     and min(max(abs(r - br), abs(c - bc)) for br, bc in self.box) <= HALF]
        idx = rng.choice(len(cells), size=self.n_agents, replace=False)
        return [cells[i] for i in np.atleast_1d(idx)]

    def _box_line(self) -> int:
        r, c = self.box[0]
        return r if CARDINAL[self.direction][0] != 0 else c

    def _in_bounds(self, cell) -> bool:
        return 0 <= cell[0] < self.height and 0 <= cell[1] < self.width

    def step(self, actions) -> StepResult:
        acts = check_actions(actions, self.n_agents, N_ACTIONS)
        n = self.n_agents
        dr, dc = CARDINAL[self.direction]
        box_cells = set(self.box)
        rewards = np.zeros(n)
        info = {"pushes": 0, "failed_pushes": 0}

        pushers = set()
        for i, a in enumerate(acts):
            if a != self.direction:
                continue
            r, c = self.agent_pos[i]
            if (r + dr, c + dc) in box_cells:
                pushers.add(i)

        pushed_cells = {(self.agent_pos[i][0] + dr, self.agent_pos[i][1] + dc)
                        for i in pushers}
        dest = [(r + dr, c + dc) for r, c in self.box]
        success = (
            pushed_cells == box_cells
            and len(pushers) == n
            and all(self._in_bounds(d) for d in dest)
            and not any(d in self.agent_pos for d in dest)
        )

        if success:
            self.box = dest
            box_cells = set(self.box)
            rewards += PUSH_REWARD
            info["pushes"] = 1
            new_pos = list(self.agent_pos)
            for i in pushers:
                new_pos[i] = (new_pos[i][0] + dr, new_pos[i][1] + dc)
            self.agent_pos = new_pos
        elif pushers:
            info["failed_pushes"] = len(pushers)
            if self.push_penalty:
                for i in pushers:
                    rewards[i] -= self.push_penalty

        proposals = list(self.agent_pos)
        for i, a in enumerate(acts):
            if i in pushers:
                continue  # push attempt already handled, success or not
            mr, mc = CARDINAL[a]
            tgt = (self.agent_pos[i][0] + mr, self.agent_pos[i][1] + mc)
            if self._in_bounds(tgt) and tgt not in box_cells:
                proposals[i] = tgt
        self.agent_pos = resolve_moves(self.agent_pos, proposals)

        done = False
        if success and self._box_line() == self.goal_line:
            rewards += GOAL_REWARD
            done = True

        self.t += 1
        if self.t >= self.episode_limit:
            done = True
        return StepResult(self._observe_all(), rewards, done, info)

    # -- observation ----------------------------------------------------------

    def _observe_all(self) -> list[np.ndarray]:
        box_cells = set(self.box)
        agent_cells = set(self.agent_pos)
        return [self._observe(i, box_cells, agent_cells) for i in range(self.n_agents)]

    def _observe(self, i: int, box_cells, agent_cells) -> np.ndarray:
        r0, c0 = self.agent_pos[i]
        grid = np.zeros((2, WINDOW, WINDOW))
        for cell in agent_cells:
            dr, dc = cell[0] - r0, cell[1] - c0
            if abs(dr) <= HALF and abs(dc) <= HALF:
                grid[0, dr + HALF, dc + HALF] = 1.0
        for cell in box_cells:
            dr, dc = cell[0] - r0, cell[1] - c0
            if abs(dr) <= HALF and abs(dc) <= HALF:
                grid[1, dr + HALF, dc + HALF] = 1.0
        direction = np.zeros(4)
        direction[self.direction] = 1.0
        return np.concatenate([grid.ravel(), direction])

    def render_ascii(self) -> str:
        rows = [["."] * self.width for _ in range(self.height)]
        dr, dc = CARDINAL[self.direction]
        if dr != 0:
            for c in range(self.width):
                rows[self.goal_line][c] = "-"
        else:
            for r in range(self.height):
                rows[r][self.goal_line] = "|"
        for cell in self.box:
            rows[cell[0]][cell[1]] = "#"
        for i, cell in enumerate(self.agent_pos):
            rows[cell[0]][cell[1]] = str(i)
        return "\n".join("".join(r) for r in rows)
