"""Boulder-push dynamics: the all-agents push condition and its rewards."""

import numpy as np
import pytest

from taskembed.envs.bpush import GOAL_REWARD, OBS_SIZE, PUSH_REWARD, BpushEnv
from taskembed.envs.layouts import load_layout

NORTH, EAST, SOUTH, WEST = range(4)


def make_env(layout="bpush/small", penalty=0.0, seed=0):
    env = BpushEnv(load_layout(layout), 2, push_penalty=penalty)
    obs = env.reset(np.random.default_rng(seed))
    return env, obs


def set_state(env, box, direction, goal_line, agents):
    env.box = list(box)
    env.direction = direction
    env.goal_line = goal_line
    env.agent_pos = list(agents)


def test_observation_length_166():
    env, obs = make_env()
    assert OBS_SIZE == 9 * 9 * 2 + 4 == 166
    assert len(obs) == 2
    assert all(o.shape == (166,) for o in obs)


def test_direction_one_hot_order():
    env, _ = make_env()
    env.direction = NORTH
    obs = env._observe_all()[0]
    assert np.array_equal(obs[-4:], [1, 0, 0, 0])


def test_empty_window_all_zero_grid():
    env, _ = make_env("bpush/large")
    set_state(env, [(18, 0), (18, 1)], NORTH, 10, [(0, 19), (10, 0)])
    obs = env._observe_all()[0]
    # nothing but the observer itself within 4 cells: box layer empty, agent
    # layer shows only the centre cell
    grid = obs[:-4].reshape(2, 9, 9)
    assert grid[1].sum() == 0.0
    assert grid[0].sum() == 1.0 and grid[0, 4, 4] == 1.0


def test_coordinated_push_advances_box():
    env, _ = make_env()
    set_state(env, [(4, 3), (4, 4)], NORTH, 1, [(5, 3), (5, 4)])
    result = env.step([NORTH, NORTH])
    assert env.box == [(3, 3), (3, 4)]
    assert np.allclose(result.rewards, [PUSH_REWARD, PUSH_REWARD])
    assert env.agent_pos == [(4, 3), (4, 4)]
    assert result.info["pushes"] == 1
    assert not result.done


def test_lone_push_fails_with_penalty():
    env, _ = make_env(penalty=0.01)
    set_state(env, [(4, 3), (4, 4)], NORTH, 1, [(5, 3), (0, 0)])
    result = env.step([NORTH, SOUTH])
    assert env.box == [(4, 3), (4, 4)]
    assert np.allclose(result.rewards, [-0.01, 0.0])
    assert result.info["failed_pushes"] == 1


def test_lone_push_no_penalty_variant():
    env, _ = make_env(penalty=0.0)
    set_state(env, [(4, 3), (4, 4)], NORTH, 1, [(5, 3), (0, 0)])
    result = env.step([NORTH, SOUTH])
    assert np.allclose(result.rewards, [0.0, 0.0])


def test_goal_push_pays_both_rewards_and_ends():
    env, _ = make_env()
    set_state(env, [(2, 3), (2, 4)], NORTH, 1, [(3, 3), (3, 4)])
    result = env.step([NORTH, NORTH])
    assert result.done
    assert np.allclose(result.rewards, [PUSH_REWARD + GOAL_REWARD] * 2)


def test_timeout_at_50_steps():
    env, _ = make_env()
    set_state(env, [(4, 3), (4, 4)], NORTH, 0, [(0, 0), (7, 7)])
    done_at = None
    for t in range(1, 60):
        result = env.step([SOUTH, SOUTH])
        if result.done:
            done_at = t
            break
    assert done_at == 50


def test_box_only_moves_under_full_push():
    """Random play: the box line changes exactly when a push reward fires."""
    env, _ = make_env(seed=3)
    rng = np.random.default_rng(10)
    for _ in range(400):
        line = env._box_line()
        result = env.step(rng.integers(0, 4, size=2))
        moved = env._box_line() != line
        assert moved == (result.info["pushes"] == 1)
        if result.done:
            env.reset(rng)


def test_return_bound_per_agent():
    """Per-episode return per agent <= 1 + 0.1 * initial box-goal distance."""
    rng = np.random.default_rng(4)
    env, _ = make_env(seed=8)
    for _ in range(30):
        bound = GOAL_REWARD + PUSH_REWARD * env.initial_distance
        total = np.zeros(2)
        done = False
        while not done:
            result = env.step(rng.integers(0, 4, size=2))
            total += result.rewards
            done = result.done
        assert np.all(total <= bound + 1e-12)
        env.reset(rng)


def test_push_out_of_bounds_fails():
    env, _ = make_env()
    set_state(env, [(0, 3), (0, 4)], NORTH, 0, [(1, 3), (1, 4)])
    result = env.step([NORTH, NORTH])
    assert env.box == [(0, 3), (0, 4)]
    assert result.info["pushes"] == 0


def test_sideways_move_into_box_is_blocked_not_push():
    env, _ = make_env(penalty=0.01)
    set_state(env, [(4, 3), (4, 4)], NORTH, 1, [(4, 2), (6, 6)])
    result = env.step([EAST, WEST])  # agent 0 walks sideways into a box cell
    assert env.agent_pos[0] == (4, 2)
    assert result.rewards[0] == 0.0  # blocked no-op, not a failed push
    assert result.info["failed_pushes"] == 0


def test_invalid_action_raises():
    env, _ = make_env()
    with pytest.raises(ValueError):
        env.step([4, 0])
