"""End-to-end run orchestration: budgets, determinism, freezing, reports."""

import numpy as np
import pytest

from taskembed.checkpoint import CheckpointError, load_checkpoint
from taskembed.config import RunConfig
from taskembed.harness import (
    export_embeddings, run_finetune, run_report, run_train,
)
from taskembed.reporting import (
    MetricsWriter, read_embeddings, read_metrics, write_weight_traces,
)


def tiny_cfg(tmp_path, paradigm="none", seed=0, steps=400, tasks=None, test_tasks=None):
    cfg = RunConfig(
        paradigm=paradigm, seed=seed, out_dir=str(tmp_path / "run"),
        train_steps=steps, test_steps=steps,
        train_tasks=tasks or ["lbf:onestep"],
        test_tasks=test_tasks or tasks or ["lbf:onestep"],
        write_timestamp=False,
    )
    cfg.a2c.parallel_envs = 4
    cfg.a2c.policy_hidden = 8
    cfg.a2c.critic_hidden = 8
    cfg.mate.encoder_hidden = 8
    cfg.mate.decoder_hidden = 8
    return cfg


def test_train_consumes_exact_budget(tmp_path):
    cfg = tiny_cfg(tmp_path, steps=500)
    cfg.a2c.parallel_envs = 10
    result = run_train(cfg)
    # 500 steps at 10 envs x 5 steps = exactly 10 iterations
    assert result.timesteps == 500
    data = read_metrics(result.metrics_path)
    assert data.steps.max() <= 500


def test_train_budget_rounds_up(tmp_path):
    cfg = tiny_cfg(tmp_path, steps=101)
    cfg.a2c.parallel_envs = 4
    result = run_train(cfg)
    assert 101 <= result.timesteps <= 101 + 4 * 5


def test_metrics_timestep_monotone(tmp_path):
    cfg = tiny_cfg(tmp_path, steps=600, tasks=["lbf:6x6-2p-2f"])
    result = run_train(cfg)
    data = read_metrics(result.metrics_path)
    assert len(data) > 0
    assert np.all(np.diff(data.steps) >= 0)


def test_same_seed_byte_identical_metrics(tmp_path):
    cfg1 = tiny_cfg(tmp_path / "a", paradigm="ind", seed=5, tasks=["lbf:6x6-2p-2f"])
    cfg2 = tiny_cfg(tmp_path / "b", paradigm="ind", seed=5, tasks=["lbf:6x6-2p-2f"])
    r1 = run_train(cfg1)
    r2 = run_train(cfg2)
    assert r1.metrics_path.read_bytes() == r2.metrics_path.read_bytes()


def test_different_seed_differs(tmp_path):
    r1 = run_train(tiny_cfg(tmp_path / "a", seed=1, tasks=["lbf:6x6-2p-2f"]))
    r2 = run_train(tiny_cfg(tmp_path / "b", seed=2, tasks=["lbf:6x6-2p-2f"]))
    assert r1.metrics_path.read_bytes() != r2.metrics_path.read_bytes()


def test_timestamp_header_toggle(tmp_path):
    cfg = tiny_cfg(tmp_path, steps=100)
    cfg.write_timestamp = True
    result = run_train(cfg)
    first = result.metrics_path.read_text().splitlines()[0]
    assert first.startswith("# created")


def test_finetune_freezes_embedding_parameters(tmp_path):
    cfg = tiny_cfg(tmp_path / "train", paradigm="mix", tasks=["lbf:6x6-2p-2f"])
    train_result = run_train(cfg)
    ckpt_before = load_checkpoint(train_result.checkpoint_path)

    ft_cfg = tiny_cfg(tmp_path / "ft", paradigm="mix", tasks=["lbf:6x6-2p-2f"])
    ft_result = run_finetune(ft_cfg, train_result.checkpoint_path)
    ckpt_after = load_checkpoint(ft_result.checkpoint_path)

    mate_names = [n for n in ckpt_before.params if n.startswith("mate")]
    assert mate_names
    for name in mate_names:
        assert np.array_equal(ckpt_before.params[name], ckpt_after.params[name]), name
    # policies did change
    moved = [n for n in ckpt_before.params
             if n.startswith("agent0.policy")
             and not np.array_equal(ckpt_before.params[n], ckpt_after.params[n])]
    assert moved


def test_finetune_paradigm_mismatch_rejected(tmp_path):
    train_result = run_train(tiny_cfg(tmp_path / "train", paradigm="none"))
    ft_cfg = tiny_cfg(tmp_path / "ft", paradigm="ind")
    with pytest.raises(CheckpointError):
        run_finetune(ft_cfg, train_result.checkpoint_path)


def test_finetune_none_paradigm_baseline(tmp_path):
    train_result = run_train(tiny_cfg(tmp_path / "train", paradigm="none",
                                      tasks=["lbf:6x6-2p-2f"]))
    ft_cfg = tiny_cfg(tmp_path / "ft", paradigm="none", tasks=["lbf:6x6-2p-2f"])
    result = run_finetune(ft_cfg, train_result.checkpoint_path)
    assert result.timesteps >= ft_cfg.test_steps


def test_export_embeddings_row_counts(tmp_path):
    cfg = tiny_cfg(tmp_path / "train", paradigm="ind", tasks=["lbf:6x6-2p-2f"])
    cfg.env_overrides = {"episode_limit": 7}
    train_result = run_train(cfg)
    path = export_embeddings(train_result.checkpoint_path, tmp_path / "export",
                             episodes=2)
    rows = read_embeddings(path)
    # 2 encoders x 7 timesteps x 2 episodes
    assert len(rows) == 2 * 7 * 2
    episodes = {r["episode"] for r in rows}
    assert len(episodes) == 2
    one_ep = [r for r in rows if r["episode"] == "0" and r["encoder"] == "0"]
    assert len(one_ep) == 7  # one row per timestep per encoder


def test_export_embeddings_mix_weights_sum_to_one(tmp_path):
    cfg = tiny_cfg(tmp_path / "train", paradigm="mix", tasks=["lbf:6x6-2p-2f"])
    cfg.env_overrides = {"episode_limit": 5}
    train_result = run_train(cfg)
    path = export_embeddings(train_result.checkpoint_path, tmp_path / "export",
                             episodes=1)
    rows = read_embeddings(path)
    by_step = {}
    for r in rows:
        by_step.setdefault((r["episode"], r["step"]), []).append(float(r["weight"]))
    for weights in by_step.values():
        assert sum(weights) == pytest.approx(1.0, abs=1e-6)


def test_export_rejects_plain_checkpoint(tmp_path):
    train_result = run_train(tiny_cfg(tmp_path / "train", paradigm="none"))
    with pytest.raises(CheckpointError):
        export_embeddings(train_result.checkpoint_path, tmp_path / "export")


def test_report_outputs(tmp_path):
    import xml.etree.ElementTree as ET

    paths = []
    for seed in (0, 1, 2):
        cfg = tiny_cfg(tmp_path / f"s{seed}", seed=seed, tasks=["lbf:6x6-2p-2f"],
                       steps=600)
        paths.append(run_train(cfg).metrics_path)
    outputs = run_report(paths, tmp_path / "report", n_resamples=500)
    csv_path = outputs["lbf:6x6-2p-2f"]
    header = csv_path.read_text().splitlines()[0]
    assert header == "step,iqm,ci_lo,ci_hi"
    svg = (tmp_path / "report" / "curves.svg")
    assert svg.exists()
    ET.fromstring(svg.read_text())  # well-formed XML


def test_report_single_seed_degenerate_ci(tmp_path):
    cfg = tiny_cfg(tmp_path / "s0", tasks=["lbf:6x6-2p-2f"], steps=600)
    metrics = run_train(cfg).metrics_path
    outputs = run_report([metrics], tmp_path / "report", n_resamples=100)
    lines = outputs["lbf:6x6-2p-2f"].read_text().splitlines()[1:]
    for line in lines:
        _, mid, lo, hi = line.split(",")
        assert lo == mid == hi


def test_weight_traces_from_embeddings(tmp_path):
    rows = [
        {"episode": "0", "step": "0", "task": "t", "encoder": "0", "weight": "0.6"},
        {"episode": "0", "step": "0", "task": "t", "encoder": "1", "weight": "0.4"},
    ]
    path = write_weight_traces(rows, tmp_path / "weight_traces.csv")
    assert path.read_text().splitlines()[0] == "episode,step,task,encoder,weight"
    assert write_weight_traces(
        [{"episode": "0", "step": "0", "task": "t", "encoder": "0", "weight": ""}],
        tmp_path / "none.csv") is None


def test_rerun_byte_identical_csvs(tmp_path):
    """Metrics files are stable under re-run apart from the timestamp header."""
    cfg1 = tiny_cfg(tmp_path / "x", paradigm="cen", seed=3, tasks=["lbf:6x6-2p-2f"])
    cfg2 = tiny_cfg(tmp_path / "y", paradigm="cen", seed=3, tasks=["lbf:6x6-2p-2f"])
    cfg1.write_timestamp = True
    cfg2.write_timestamp = True
    r1 = run_train(cfg1)
    r2 = run_train(cfg2)
    body1 = r1.metrics_path.read_text().splitlines()[1:]
    body2 = r2.metrics_path.read_text().splitlines()[1:]
    assert body1 == body2
