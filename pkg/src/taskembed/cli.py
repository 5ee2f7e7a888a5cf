"""Command-line entry points: train, finetune, export-embeddings, report.

Verbosity follows the MATE_LOG_LEVEL environment variable (DEBUG, INFO,
WARNING, ...; default INFO).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .config import ConfigError, load_config
from .harness import export_embeddings, run_finetune, run_report, run_train


def _setup_logging() -> None:
    level = os.environ.get("MATE_LOG_LEVEL", "INFO").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
        stream=sys.stderr,
    )


def _load(args) -> "RunConfig":
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.out_dir = args.out
    if args.no_timestamp:
        cfg.write_timestamp = False
    return cfg


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="taskembed",
        description="Multi-agent RL with variational task embeddings: "
                    "train, fine-tune, and analyse.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="train on the configured training tasks")
    finetune = sub.add_parser("finetune", help="fine-tune a checkpoint on the testing tasks")
    for p in (train, finetune):
        p.add_argument("--config", required=True, help="experiment config (INI)")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", default=None, help="override the output directory")
        p.add_argument("--no-timestamp", action="store_true",
                       help="suppress the timestamp header in CSV outputs")
    finetune.add_argument("--checkpoint", required=True, help="checkpoint.bin to restore")

    export = sub.add_parser("export-embeddings",
                            help="roll out a checkpoint and dump task embeddings")
    export.add_argument("--checkpoint", required=True)
    export.add_argument("--out", required=True)
    export.add_argument("--tasks", default=None,
                        help="comma-separated task ids (default: the checkpoint's testing tasks)")
    export.add_argument("--episodes", type=int, default=10)
    export.add_argument("--greedy", action="store_true", help="argmax action selection")
    export.add_argument("--seed", type=int, default=None)

    report = sub.add_parser("report", help="aggregate metrics files into curves")
    report.add_argument("metrics", nargs="+", help="metrics.csv files (one per seed)")
    report.add_argument("--out", required=True)
    report.add_argument("--embeddings", default=None,
                        help="embeddings.csv for mixture-weight traces")
    report.add_argument("--resamples", type=int, default=100_000)
    report.add_argument("--no-timestamp", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        if args.command == "train":
            result = run_train(_load(args))
            print(f"metrics: {result.metrics_path}")
            print(f"checkpoint: {result.checkpoint_path}")
            print(f"timesteps: {result.timesteps} episodes: {result.episodes} "
                  f"final_iqm: {result.final_iqm:.6g}")
        elif args.command == "finetune":
            cfg = _load(args)
            result = run_finetune(cfg, args.checkpoint)
            print(f"metrics: {result.metrics_path}")
            print(f"checkpoint: {result.checkpoint_path}")
            print(f"timesteps: {result.timesteps} episodes: {result.episodes} "
                  f"final_iqm: {result.final_iqm:.6g}")
        elif args.command == "export-embeddings":
            tasks = [t.strip() for t in args.tasks.split(",")] if args.tasks else None
            path = export_embeddings(args.checkpoint, args.out, task_ids=tasks,
                                     episodes=args.episodes, greedy=args.greedy,
                                     seed=args.seed)
            print(f"embeddings: {path}")
        elif args.command == "report":
            outputs = run_report(args.metrics, args.out, embeddings_file=args.embeddings,
                                 n_resamples=args.resamples)
            for name, path in sorted(outputs.items()):
                print(f"{name}: {path}")
    except (ConfigError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
