"""Metric streams and report artifacts: CSV files and SVG learning curves.

metrics.csv gets one row per completed episode (timestep at completion, task,
team return, current losses). Reports aggregate several seeds' metrics files
onto a common timestep grid, compute the IQM with stratified bootstrap
confidence intervals, and emit `curves.csv` (columns exactly step, iqm,
ci_lo, ci_hi) plus a self-contained SVG plot.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .stats import iqm, stratified_bootstrap_ci

METRICS_COLUMNS = ("step", "episode", "task", "team_return",
                   "policy_loss", "value_loss", "entropy", "mate_loss")


class MetricsWriter:
    """Append-only per-episode metrics stream."""

    def __init__(self, path: str | Path, timestamp: bool = True):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._file = open(self.path, "w", newline="")
        if timestamp:
            now = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
            self._file.write(f"# created {now}\n")
        self._writer = csv.writer(self._file)
        self._writer.writerow(METRICS_COLUMNS)
        self._episode = 0

    def add_episode(self, step: int, task: str, team_return: float,
                    policy_loss: float, value_loss: float, entropy: float,
                    mate_loss: float | None) -> None:
        self._writer.writerow([
            step, self._episode, task,
            repr(float(team_return)), repr(float(policy_loss)),
            repr(float(value_loss)), repr(float(entropy)),
            "" if mate_loss is None else repr(float(mate_loss)),
        ])
        self._episode += 1

    def close(self) -> None:
        self._file.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


@dataclass
class MetricsData:
    steps: np.ndarray
    returns: np.ndarray
    tasks: list[str]

    def __len__(self):
        return len(self.steps)


def read_metrics(path: str | Path) -> MetricsData:
    steps, returns, tasks = [], [], []
    with open(path, newline="") as f:
        rows = [line for line in f if not line.startswith("#")]
    reader = csv.DictReader(rows)
    if reader.fieldnames is None or tuple(reader.fieldnames) != METRICS_COLUMNS:
        raise ValueError(f"'{path}' is not a metrics file (columns {reader.fieldnames})")
    for row in reader:
        steps.append(int(row["step"]))
        returns.append(float(row["team_return"]))
        tasks.append(row["task"])
    return MetricsData(np.asarray(steps, dtype=np.int64),
                       np.asarray(returns), tasks)


def final_window_iqm(metrics: MetricsData, fraction: float = 0.05) -> float:
    """IQM of the last `fraction` of episodes (at least one)."""
    if len(metrics) == 0:
        raise ValueError("no episodes recorded")
    count = max(1, int(round(len(metrics) * fraction)))
    return iqm(metrics.returns[-count:])


def bin_curve(metrics: MetricsData, grid: np.ndarray) -> np.ndarray:
    """Mean return per grid bin, forward-filled across empty bins."""
    if len(metrics) == 0:
        raise ValueError("no episodes recorded")
    out = np.empty(len(grid))
    last = metrics.returns[0]
    lo = 0
    for i, edge in enumerate(grid):
        in_bin = (metrics.steps > (grid[i - 1] if i else 0)) & (metrics.steps <= edge)
        if in_bin.any():
            last = metrics.returns[in_bin].mean()
        out[i] = last
    return out


def aggregate_runs(metric_files: list, n_points: int = 50,
                   n_resamples: int = 100_000, level: float = 0.95):
    """Per-task learning curves across seeds: (task -> rows of (step, iqm, lo, hi))."""
    runs = [read_metrics(p) for p in metric_files]
    if not runs:
        raise ValueError("no metrics files given")
    tasks = sorted({t for run in runs for t in run.tasks})
    curves: dict[str, list] = {}
    for task in tasks:
        filtered = []
        for run in runs:
            mask = np.asarray([t == task for t in run.tasks])
            if mask.any():
                filtered.append(MetricsData(run.steps[mask], run.returns[mask],
                                            [task] * int(mask.sum())))
        max_step = max(int(m.steps.max()) for m in filtered)
        points = min(n_points, max_step)
        grid = np.linspace(max_step / points, max_step, points).round().astype(np.int64)
        per_seed = np.stack([bin_curve(m, grid) for m in filtered])
        point = np.array([iqm(per_seed[:, t]) for t in range(len(grid))])
        lo, hi = stratified_bootstrap_ci(per_seed, n_resamples=n_resamples, level=level)
        curves[task] = list(zip(grid.tolist(), point.tolist(), lo.tolist(), hi.tolist()))
    return curves


def write_curves_csv(rows: list, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["step", "iqm", "ci_lo", "ci_hi"])
        for step, mid, lo, hi in rows:
            writer.writerow([step, repr(float(mid)), repr(float(lo)), repr(float(hi))])
    return path


def write_curves_svg(rows: list, path: str | Path, title: str = "") -> Path:
    """Minimal self-contained SVG line plot with the CI band."""
    path = Path(path)
    width, height, margin = 640, 400, 55
    steps = [r[0] for r in rows]
    mids = [r[1] for r in rows]
    los = [r[2] for r in rows]
    his = [r[3] for r in rows]
    x0, x1 = min(steps), max(steps)
    y0 = min(los + mids)
    y1 = max(his + mids)
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y1 = y0 + 1.0

    def sx(v):
        return margin + (v - x0) / (x1 - x0) * (width - 2 * margin)

    def sy(v):
        return height - margin - (v - y0) / (y1 - y0) * (height - 2 * margin)

    band = " ".join(f"{sx(s):.1f},{sy(h):.1f}" for s, h in zip(steps, his))
    band += " " + " ".join(f"{sx(s):.1f},{sy(l):.1f}"
                           for s, l in zip(reversed(steps), reversed(los)))
    line = " ".join(f"{sx(s):.1f},{sy(m):.1f}" for s, m in zip(steps, mids))
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<polygon points="{band}" fill="#9ecae1" fill-opacity="0.45" stroke="none"/>',
        f'<polyline points="{line}" fill="none" stroke="#2171b5" stroke-width="2"/>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" '
        f'stroke="black"/>',
        f'<text x="{width / 2:.0f}" y="{height - 12}" text-anchor="middle" '
        f'font-size="13">environment timesteps</text>',
        f'<text x="14" y="{height / 2:.0f}" font-size="13" text-anchor="middle" '
        f'transform="rotate(-90 14 {height / 2:.0f})">episodic team return (IQM)</text>',
        f'<text x="{margin}" y="{height - margin + 16}" font-size="11" '
        f'text-anchor="middle">{x0}</text>',
        f'<text x="{width - margin}" y="{height - margin + 16}" font-size="11" '
        f'text-anchor="middle">{x1}</text>',
        f'<text x="{margin - 6}" y="{sy(y0):.0f}" font-size="11" '
        f'text-anchor="end">{y0:.3g}</text>',
        f'<text x="{margin - 6}" y="{sy(y1):.0f}" font-size="11" '
        f'text-anchor="end">{y1:.3g}</text>',
    ]
    if title:
        parts.append(f'<text x="{width / 2:.0f}" y="22" text-anchor="middle" '
                     f'font-size="14">{title}</text>')
    parts.append("</svg>")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(parts) + "\n")
    return path


# -- embedding dumps -----------------------------------------------------------

EMBEDDING_COLUMNS = ("episode", "step", "task", "encoder",
                     "mu_0", "mu_1", "mu_2", "sigma_0", "sigma_1", "sigma_2", "weight")


class EmbeddingWriter:
    """Per-timestep (task, encoder, mu, sigma, weight) rows."""

    def __init__(self, path: str | Path, d: int = 3, timestamp: bool = False):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.d = d
        self._file = open(self.path, "w", newline="")
        if timestamp:
            now = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
            self._file.write(f"# created {now}\n")
        self._writer = csv.writer(self._file)
        cols = (["episode", "step", "task", "encoder"]
                + [f"mu_{j}" for j in range(d)] + [f"sigma_{j}" for j in range(d)]
                + ["weight"])
        self._writer.writerow(cols)

    def add(self, episode: int, step: int, task: str, encoder, mu, sigma,
            weight: float | None) -> None:
        row = [episode, step, task, encoder]
        row += [repr(float(v)) for v in mu]
        row += [repr(float(v)) for v in sigma]
        row.append("" if weight is None else repr(float(weight)))
        self._writer.writerow(row)

    def close(self):
        self._file.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_embeddings(path: str | Path) -> list[dict]:
    with open(path, newline="") as f:
        rows = [line for line in f if not line.startswith("#")]
    return list(csv.DictReader(rows))


def write_weight_traces(embedding_rows: list[dict], path: str | Path) -> Path | None:
    """Mixture-weight trace per episode; None when the dump has no weights."""
    traces = [r for r in embedding_rows if r.get("weight")]
    if not traces:
        return None
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["episode", "step", "task", "encoder", "weight"])
        for r in traces:
            writer.writerow([r["episode"], r["step"], r["task"], r["encoder"], r["weight"]])
    return path
