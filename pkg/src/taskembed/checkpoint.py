"""Versioned checkpoint container with a human-readable manifest.

`checkpoint.bin` is a zip of float64 arrays (numpy archive format) holding
every network parameter, optimizer moments, RNG stream states and the run
configuration echo; `manifest.txt` lists parameter names and shapes. Loading
restores bit-identical values.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

FORMAT_VERSION = 1


class CheckpointError(ValueError):
    """Unreadable, incompatible or shape-mismatched checkpoint."""


@dataclass
class Checkpoint:
    version: int
    paradigm: str
    config_text: str
    timesteps: int
    params: dict           # name -> float64 array
    optimizer_states: dict  # optimizer name -> {"t": int, "m": {...}, "v": {...}}
    rng_states: dict        # stream name -> bit-generator state dict

    def manifest(self) -> str:
        lines = [f"format_version {self.version}",
                 f"paradigm {self.paradigm}",
                 f"timesteps {self.timesteps}"]
        for name in sorted(self.params):
            arr = self.params[name]
            shape = "x".join(map(str, arr.shape)) or "scalar"
            lines.append(f"{name} {shape} {arr.dtype}")
        return "\n".join(lines) + "\n"


def save_checkpoint(ckpt: Checkpoint, directory: str | Path) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    arrays = {f"param/{name}": arr for name, arr in ckpt.params.items()}
    for opt_name, state in ckpt.optimizer_states.items():
        for pname, arr in state["m"].items():
            arrays[f"opt/{opt_name}/m/{pname}"] = arr
        for pname, arr in state["v"].items():
            arrays[f"opt/{opt_name}/v/{pname}"] = arr
    meta = {
        "version": ckpt.version,
        "paradigm": ckpt.paradigm,
        "config_text": ckpt.config_text,
        "timesteps": ckpt.timesteps,
        "optimizer_steps": {name: state["t"] for name, state in ckpt.optimizer_states.items()},
        "rng_states": ckpt.rng_states,
    }
    arrays["meta"] = np.frombuffer(json.dumps(meta, default=_json_default).encode(), dtype=np.uint8)
    path = directory / "checkpoint.bin"
    with open(path, "wb") as f:
        np.savez(f, **arrays)
    (directory / "manifest.txt").write_text(ckpt.manifest())
    return path


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON-serializable: {type(obj)}")


def load_checkpoint(path: str | Path) -> Checkpoint:
    path = Path(path)
    if path.is_dir():
        path = path / "checkpoint.bin"
    try:
        archive = np.load(path, allow_pickle=False)
    except Exception as err:
        raise CheckpointError(f"cannot read checkpoint '{path}': {err}") from err
    if "meta" not in archive:
        raise CheckpointError(f"'{path}' is not a checkpoint archive")
    meta = json.loads(bytes(archive["meta"]).decode())
    if meta["version"] != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {meta['version']}")
    params: dict = {}
    opt_states: dict = {name: {"t": t, "m": {}, "v": {}}
                        for name, t in meta["optimizer_steps"].items()}
    for key in archive.files:
        if key.startswith("param/"):
            params[key[len("param/"):]] = archive[key]
        elif key.startswith("opt/"):
            _, opt_name, slot, pname = key.split("/", 3)
            opt_states[opt_name][slot][pname] = archive[key]
    return Checkpoint(
        version=meta["version"],
        paradigm=meta["paradigm"],
        config_text=meta["config_text"],
        timesteps=meta["timesteps"],
        params=params,
        optimizer_states=opt_states,
        rng_states=meta["rng_states"],
    )


def restore_into(named_params: list, saved: dict) -> None:
    """Copy saved arrays into live tensors by name; shape mismatches raise."""
    live = dict(named_params)
    missing = set(live) - set(saved)
    extra = set(saved) - set(live)
    if missing or extra:
        raise CheckpointError(
            f"parameter name mismatch: missing={sorted(missing)[:5]} extra={sorted(extra)[:5]}")
    for name, tensor in live.items():
        arr = saved[name]
        if arr.shape != tensor.data.shape:
            raise CheckpointError(
                f"shape mismatch for '{name}': checkpoint {arr.shape} vs model {tensor.data.shape}")
        tensor.data[...] = arr
