"""Benchmark environments: warehouse, boulder-push, foraging, particle navigation."""

from .base import CARDINAL, StepResult, resolve_moves
from .layouts import GridLayout, LayoutError, load_layout, parse_layout, register_layout
from .bpush import BpushEnv
from .lbf import LbfEnv
from .mpe import MpeEnv
from .rware import RwareEnv

__all__ = [
    "BpushEnv",
    "CARDINAL",
    "GridLayout",
    "LayoutError",
    "LbfEnv",
    "MpeEnv",
    "RwareEnv",
    "StepResult",
    "load_layout",
    "parse_layout",
    "register_layout",
    "resolve_moves",
]
