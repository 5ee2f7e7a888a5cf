"""Task sets, per-episode sampling, and the auto-resetting vector runner."""

import numpy as np
import pytest

from taskembed import rng as rngmod
from taskembed.tasks import (
    TaskError, TaskSet, TaskSpec, build_task_set, make_env, resolve_tasks, sample_task,
    task_shapes,
)
from taskembed.vecenv import SyncVectorRunner


def test_singleton_set_always_sampled():
    ts = build_task_set(["bpush:small-2ag"])
    rng = np.random.default_rng(0)
    assert all(sample_task(ts, rng) is ts.tasks[0] for _ in range(20))


def test_uniform_sampling_frequencies():
    ts = build_task_set(["lbf:probe-west", "lbf:probe-east"])
    rng = np.random.default_rng(123)
    draws = [sample_task(ts, rng).task_id for _ in range(10_000)]
    freq = draws.count("lbf:probe-west") / 10_000
    assert 0.45 <= freq <= 0.55


def test_sampling_deterministic_with_seed():
    ts = build_task_set(["rware:tiny-2ag"])
    a = [sample_task(ts, np.random.default_rng(9)).task_id for _ in range(1)]
    seq1 = [sample_task(ts, rngmod.stream(7, 2, 0)).layout_id for _ in range(50)]
    seq2 = []
    gen = rngmod.stream(7, 2, 0)
    for _ in range(50):
        seq2.append(sample_task(ts, gen).layout_id)
    gen2 = rngmod.stream(7, 2, 0)
    seq3 = [sample_task(ts, gen2).layout_id for _ in range(50)]
    assert seq2 == seq3


def test_group_expansion():
    assert len(resolve_tasks("rware:tiny-2ag")) == 3
    assert len(resolve_tasks("rware:small-4ag")) == 2
    assert len(resolve_tasks("rware:wide-one-sided-2ag")) == 4
    assert len(resolve_tasks("rware:corridor-h6-2ag")) == 1
    assert len(resolve_tasks("bpush:medium-pen-2ag")) == 1
    assert len(resolve_tasks("lbf:15x15-4p-6f")) == 1
    assert len(resolve_tasks("mpe:pen50")) == 1


def test_task_params_from_ids():
    pen = resolve_tasks("bpush:small-pen-2ag")[0]
    assert pen.param("push_penalty") == 0.01
    lbf_pen = resolve_tasks("lbf:15x15-2p-2f-pen")[0]
    assert lbf_pen.param("penalty") == 0.1
    coop = resolve_tasks("lbf:10x10-2p-2f-coop")[0]
    assert coop.param("coop") == 1
    mpe = resolve_tasks("mpe:pen5")[0]
    assert mpe.param("collision_penalty") == 5.0


def test_shape_constraint_enforced():
    rware = resolve_tasks("rware:tiny-2ag")
    lbf = resolve_tasks("lbf:8x8-2p-2f")
    with pytest.raises(TaskError):
        TaskSet(tuple(rware + lbf))
    two = resolve_tasks("lbf:8x8-2p-2f")
    four = resolve_tasks("lbf:8x8-4p-4f")
    with pytest.raises(TaskError):
        TaskSet(tuple(two + four))


def test_unknown_layout_is_configuration_error():
    with pytest.raises(Exception):
        make_env(TaskSpec("rware", "rware/no-such-map", 2))
    with pytest.raises(TaskError):
        resolve_tasks("rware:mega-2ag")


def test_invalid_task_specs_rejected():
    with pytest.raises(TaskError):
        TaskSpec("rware", "rware/tiny-h3", 0)
    with pytest.raises(TaskError):
        TaskSpec("lbf", "8x8", 2, {"episode_limit": 0})
    with pytest.raises(TaskError):
        TaskSpec("quake", "x", 2)


def test_env_reset_obs_sizes_match_declaration():
    for tid in ["rware:tiny-2ag", "bpush:small-2ag", "lbf:8x8-2p-2f", "mpe:coop"]:
        ts = build_task_set([tid])
        env = make_env(ts.tasks[0])
        obs = env.reset(np.random.default_rng(0))
        assert len(obs) == ts.n_agents
        assert all(o.shape == (ts.obs_size,) for o in obs)
        assert env.n_actions == ts.n_actions


def test_param_overrides():
    ts = build_task_set(["mpe:coop"], overrides={"episode_limit": 5})
    env = make_env(ts.tasks[0])
    assert env.episode_limit == 5


# -- vector runner ---------------------------------------------------------


def test_runner_single_slot_matches_plain_env():
    ts = build_task_set(["mpe:coop"], overrides={"episode_limit": 5})
    runner = SyncVectorRunner(ts, 1, master_seed=3)
    env = make_env(ts.tasks[0])
    obs = env.reset(rngmod.stream(3, rngmod.DOMAIN_ENV, 0))
    assert np.array_equal(runner.stacked_obs()[0][0], obs[0])
    for t in range(5):
        step = runner.step(np.zeros((1, 3), dtype=int))
        result = env.step([0, 0, 0])
        assert np.array_equal(step.rewards[0], result.rewards)
        assert step.dones[0] == result.done
        if not result.done:
            assert np.array_equal(runner.stacked_obs()[0][0], result.obs[0])
    # slot auto-reset: terminal obs preserved in info, fresh obs exposed
    assert "terminal_obs" in step.infos[0]
    assert len(step.finished) == 1


def test_runner_batch_no_terminals():
    ts = build_task_set(["lbf:8x8-2p-2f"])
    runner = SyncVectorRunner(ts, 10, master_seed=0)
    step = runner.step(np.zeros((10, 2), dtype=int))  # all-stay cannot finish
    assert step.rewards.shape == (10, 2)
    assert not step.dones.any()
    assert step.finished == []


def test_runner_stream_bit_identical_across_runs():
    def run():
        ts = build_task_set(["lbf:6x6-2p-2f"])
        runner = SyncVectorRunner(ts, 4, master_seed=11)
        rng = np.random.default_rng(5)
        trace = []
        for _ in range(40):
            step = runner.step(rng.integers(0, 6, size=(4, 2)))
            trace.append((step.rewards.copy(), step.dones.copy(),
                          [o.copy() for o in runner.stacked_obs()]))
        return trace

    t1, t2 = run(), run()
    for (r1, d1, o1), (r2, d2, o2) in zip(t1, t2):
        assert np.array_equal(r1, r2)
        assert np.array_equal(d1, d2)
        for a, b in zip(o1, o2):
            assert np.array_equal(a, b)


def test_runner_resamples_task_each_episode():
    ts = build_task_set(["lbf:probe-west", "lbf:probe-east"],
                        overrides={"episode_limit": 1})
    runner = SyncVectorRunner(ts, 1, master_seed=2)
    seen = set()
    for _ in range(30):
        step = runner.step(np.zeros((1, 2), dtype=int))
        assert step.dones[0]
        seen.add(step.finished[0].task_id)
    assert len(seen) == 2


def test_runner_propagates_env_errors_with_slot():
    ts = build_task_set(["mpe:coop"])
    runner = SyncVectorRunner(ts, 2, master_seed=0)
    with pytest.raises(ValueError, match="slot 1"):
        runner.step(np.array([[0, 0, 0], [9, 0, 0]]))


def test_obs_dims_constant_across_set_and_steps():
    ts = build_task_set(["rware:tiny-2ag"])
    runner = SyncVectorRunner(ts, 3, master_seed=1)
    rng = np.random.default_rng(0)
    for _ in range(20):
        for arr in runner.stacked_obs():
            assert arr.shape == (3, ts.obs_size)
        runner.step(rng.integers(0, 5, size=(3, 2)))
