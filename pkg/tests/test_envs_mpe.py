"""Particle navigation: double-integrator physics and the shared reward."""

import numpy as np
import pytest

from taskembed.envs.mpe import DOWN, LEFT, OBS_SIZE, RIGHT, STAY, UP, MpeEnv


def make_env(pen=1.0, seed=0):
    env = MpeEnv(collision_penalty=pen)
    obs = env.reset(np.random.default_rng(seed))
    return env, obs


def test_observation_size_14():
    env, obs = make_env()
    assert OBS_SIZE == 14
    assert all(o.shape == (14,) for o in obs)


def test_agents_on_landmarks_zero_distance_term():
    env, _ = make_env()
    env.pos = env.landmarks.copy()
    env.vel[:] = 0.0
    # spread landmarks out to avoid collisions
    env.landmarks = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    env.pos = env.landmarks.copy()
    result = env.step([STAY, STAY, STAY])
    assert result.rewards[0] == pytest.approx(0.0)
    assert result.info["collisions"] == 0


def test_collision_penalty_fires():
    env, _ = make_env(pen=5.0)
    env.landmarks = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    env.pos = np.array([[0.0, 0.0], [0.1, 0.0], [5.0, 5.0]])  # pair 0-1 collides
    env.vel[:] = 0.0
    result = env.step([STAY, STAY, STAY])
    dist_term = sum(min(np.linalg.norm(env.pos - lm, axis=1)) for lm in env.landmarks)
    assert result.info["collisions"] == 1
    assert result.rewards[0] == pytest.approx(-dist_term - 5.0)


def test_stay_with_zero_velocity_is_fixed_point():
    env, _ = make_env()
    env.vel[:] = 0.0
    before = env.pos.copy()
    env.step([STAY, STAY, STAY])
    assert np.array_equal(env.pos, before)


def test_double_integrator_update():
    env, _ = make_env()
    env.pos = np.zeros((3, 2))
    env.vel = np.array([[1.0, 0.0], [0.0, 0.0], [0.0, 0.0]])
    env.landmarks = np.full((3, 2), 10.0)
    env.step([RIGHT, STAY, STAY])
    # v' = 0.75*1 + 5*0.1 = 1.25; x' = 1.25*0.1 = 0.125
    assert env.vel[0, 0] == pytest.approx(1.25)
    assert env.pos[0, 0] == pytest.approx(0.125)


def test_reward_shared_and_nonpositive():
    env, _ = make_env(pen=50.0, seed=4)
    rng = np.random.default_rng(1)
    done = False
    while not done:
        result = env.step(rng.integers(0, 5, size=3))
        assert np.all(result.rewards == result.rewards[0])
        assert result.rewards[0] <= 0.0
        done = result.done
    assert env.t == 25


def test_actions_move_along_axes():
    env, _ = make_env()
    env.pos = np.zeros((3, 2))
    env.vel = np.zeros((3, 2))
    env.landmarks = np.full((3, 2), 10.0)
    env.step([RIGHT, UP, LEFT])
    assert env.pos[0, 0] > 0 and env.pos[0, 1] == 0
    assert env.pos[1, 1] > 0 and env.pos[1, 0] == 0
    assert env.pos[2, 0] < 0


def test_bad_action_raises():
    env, _ = make_env()
    with pytest.raises(ValueError):
        env.step([5, 0, 0])
