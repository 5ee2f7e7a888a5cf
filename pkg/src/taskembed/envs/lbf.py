"""Level-based foraging: leveled agents cooperate to pick up leveled food.

A pick-up succeeds when the levels of all adjacent agents choosing it sum to
at least the food's level. Rewards are normalized so that collecting every
food item yields a team total of exactly 1.0: a participant's share is
food_level * (own_level / sum of participating levels) / (sum of initial food
levels). Penalty variants charge -0.1 for pick-up attempts that collect
nothing.
"""

from __future__ import annotations

import re

import numpy as np

from .base import CARDINAL, StepResult, check_actions, resolve_moves
from .layouts import GridLayout

STAY, NORTH, SOUTH, WEST, EAST, PICKUP = range(6)
N_ACTIONS = 6
_MOVE_OFFSET = {NORTH: (-1, 0), SOUTH: (1, 0), WEST: (0, -1), EAST: (0, 1)}
WINDOW = 5
HALF = WINDOW // 2
OBS_SIZE = WINDOW * WINDOW * 3  # agent levels, food levels, boundary

_SIZE_RE = re.compile(r"^(\d+)x(\d+)$")


def parse_grid_size(layout_id: str) -> tuple[int, int] | None:
    m = _SIZE_RE.match(layout_id)
    if not m:
        return None
    return int(m.group(1)), int(m.group(2))


class LbfEnv:
    """Procedural (random placement/levels) or static-layout foraging task."""

    def __init__(self, n_agents: int, height: int, width: int, n_food: int,
                 episode_limit: int = 50, coop: bool = False, penalty: float = 0.0,
                 max_agent_level: int = 2, static: GridLayout | None = None):
        self.n_agents = n_agents
        self.height = height
        self.width = width
        self.n_food = n_food
        self.episode_limit = episode_limit
        self.coop = coop
        self.penalty = penalty
        self.max_agent_level = max_agent_level
        self.static = static
        if static is not None:
            if (static.height, static.width) != (height, width):
                raise ValueError("static layout dimensions disagree with the task")
            if len(static.agent_spawns) != n_agents:
                raise ValueError(f"static layout has {len(static.agent_spawns)} spawns, "
                                 f"task declares {n_agents} agents")
            if not static.food:
                raise ValueError("static foraging layout has no food")
            if any(lvl > n_agents for _, _, lvl in static.food):
                raise ValueError("static food level exceeds the team's total level")
        self.obs_size = OBS_SIZE
        self.n_actions = N_ACTIONS

    def reset(self, rng: np.random.Generator) -> list[np.ndarray]:
        if self.static is not None:
            self.agent_pos = list(self.static.agent_spawns)
            self.agent_level = [1] * self.n_agents
            self.food = {(r, c): lvl for r, c, lvl in self.static.food}
        else:
            self.agent_level = [int(l) for l in
                                rng.integers(1, self.max_agent_level + 1, size=self.n_agents)]
            level_sum = sum(self.agent_level)
            self.food = {}
            occupied: set = set()
            for _ in range(self.n_food):
                cell = self._spaced_food_cell(rng, occupied)
                lvl = level_sum if self.coop else int(rng.integers(1, level_sum + 1))
                self.food[cell] = lvl
                occupied.add(cell)
                occupied.update((cell[0] + dr, cell[1] + dc) for dr, dc in CARDINAL)
            free = [(r, c) for r in range(self.height) for c in range(self.width)
                    if (r, c) not in self.food]
            idx = rng.choice(len(free), size=self.n_agents, replace=False)
            self.agent_pos = [free[i] for i in np.atleast_1d(idx)]
        self.total_food_level = sum(self.food.values())
        self.t = 0
        return self._observe_all()

    def _spaced_food_cell(self, rng, occupied: set) -> tuple:
        # keep food off other food and their orthogonal neighbours
        free = [(r, c) for r in range(self.height) for c in range(self.width)
                if (r, c) not in occupied]
        if not free:
            raise ValueError("grid too small to space out the food")
        return free[int(rng.integers(len(free)))]

    def _in_bounds(self, cell) -> bool:
        return 0 <= cell[0] < self.height and 0 <= cell[1] < self.width

    def step(self, actions) -> StepResult:
        acts = check_actions(actions, self.n_agents, N_ACTIONS)
        n = self.n_agents
        proposals = list(self.agent_pos)
        for i, a in enumerate(acts):
            off = _MOVE_OFFSET.get(a)
            if off is None:
                continue
            tgt = (self.agent_pos[i][0] + off[0], self.agent_pos[i][1] + off[1])
            if self._in_bounds(tgt) and tgt not in self.food:
                proposals[i] = tgt
        self.agent_pos = resolve_moves(self.agent_pos, proposals)

        rewards = np.zeros(n)
        picking = [i for i, a in enumerate(acts) if a == PICKUP]
        collected_by: set = set()
        pickups = 0
        for cell in sorted(self.food):
            lvl = self.food[cell]
            adj = [(cell[0] + dr, cell[1] + dc) for dr, dc in CARDINAL]
            participants = [i for i in picking if self.agent_pos[i] in adj]
            if not participants:
                continue
            level_sum = sum(self.agent_level[i] for i in participants)
            if level_sum >= lvl:
                for i in participants:
                    share = lvl * (self.agent_level[i] / level_sum) / self.total_food_level
                    rewards[i] += share
                    collected_by.add(i)
                del self.food[cell]
                pickups += 1

        failed = 0
        if self.penalty:
            for i in picking:
                if i not in collected_by:
                    rewards[i] -= self.penalty
                    failed += 1

        self.t += 1
        done = not self.food or self.t >= self.episode_limit
        info = {"pickups": pickups, "failed_pickups": failed}
        return StepResult(self._observe_all(), rewards, done, info)

    # -- observation ----------------------------------------------------------

    def _observe_all(self) -> list[np.ndarray]:
        return [self._observe(i) for i in range(self.n_agents)]

    def _observe(self, i: int) -> np.ndarray:
        r0, c0 = self.agent_pos[i]
        grid = np.zeros((3, WINDOW, WINDOW))
        for j, (r, c) in enumerate(self.agent_pos):
            dr, dc = r - r0, c - c0
            if abs(dr) <= HALF and abs(dc) <= HALF:
                grid[0, dr + HALF, dc + HALF] = float(self.agent_level[j])
        for (r, c), lvl in self.food.items():
            dr, dc = r - r0, c - c0
            if abs(dr) <= HALF and abs(dc) <= HALF:
                grid[1, dr + HALF, dc + HALF] = float(lvl)
        for dr in range(-HALF, HALF + 1):
            for dc in range(-HALF, HALF + 1):
                if not self._in_bounds((r0 + dr, c0 + dc)):
                    grid[2, dr + HALF, dc + HALF] = 1.0
        return grid.ravel().copy()

    def render_ascii(self) -> str:
        rows = [["."] * self.width for _ in range(self.height)]
        for (r, c), lvl in self.food.items():
            rows[r][c] = str(lvl)
        for i, (r, c) in enumerate(self.agent_pos):
            rows[r][c] = chr(ord("a") + i)
        return "\n".join("".join(r) for r in rows)
