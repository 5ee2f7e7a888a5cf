"""ASCII grid-map registry.

Map legend:
    .   floor
    X   shelf storage cell (starts holding a shelf)
    g   delivery / goal cell
    a   fixed agent spawn (static layouts only)
    1-9 food item with that level (static layouts only)

Maps ship as package data; `register_layout` adds custom ones at runtime.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources


class LayoutError(ValueError):
    """Unknown layout id or malformed map text."""


@dataclass(frozen=True)
class GridLayout:
    name: str
    height: int
    width: int
    shelves: frozenset = frozenset()
    goals: frozenset = frozenset()
    agent_spawns: tuple = ()
    food: tuple = ()  # (row, col, level)

    def in_bounds(self, cell: tuple) -> bool:
        return 0 <= cell[0] < self.height and 0 <= cell[1] < self.width


def parse_layout(name: str, text: str) -> GridLayout:
    rows = [line for line in (l.rstrip("\n") for l in text.strip("\n").split("\n"))]
    if not rows:
        raise LayoutError(f"layout '{name}' is empty")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise LayoutError(f"layout '{name}' is not rectangular")
    shelves, goals, spawns, food = set(), set(), [], []
    for r, line in enumerate(rows):
        for c, ch in enumerate(line):
            if ch == ".":
                continue
            elif ch == "X":
                shelves.add((r, c))
            elif ch == "g":
                goals.add((r, c))
            elif ch == "a":
                spawns.append((r, c))
            elif ch.isdigit() and ch != "0":
                food.append((r, c, int(ch)))
            else:
                raise LayoutError(f"layout '{name}': unknown map character {ch!r}")
    return GridLayout(
        name=name,
        height=len(rows),
        width=width,
        shelves=frozenset(shelves),
        goals=frozenset(goals),
        agent_spawns=tuple(spawns),
        food=tuple(food),
    )


_REGISTRY: dict[str, GridLayout] = {}


def register_layout(name: str, text: str) -> GridLayout:
    layout = parse_layout(name, text)
    _REGISTRY[name] = layout
    return layout


def load_layout(name: str) -> GridLayout:
    """Resolve a layout id, loading bundled `<family>/<id>.txt` on first use."""
    if name in _REGISTRY:
        return _REGISTRY[name]
    family, _, stem = name.partition("/")
    if not stem:
        raise LayoutError(f"unknown layout id '{name}'")
    try:
        text = (resources.files(__package__) / "layouts" / family / f"{stem}.txt").read_text()
    except (FileNotFoundError, ModuleNotFoundError) as err:
        raise LayoutError(f"unknown layout id '{name}'") from err
    return register_layout(name, text)
