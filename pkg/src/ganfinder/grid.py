"""Grid model, 8-connected traversal rules and path validation.

Cells are ``(row, col)`` tuples with the origin at the top-left corner, so a
grid indexes exactly like the raster that depicts it.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import ndimage

Cell = tuple[int, int]

# class labels shared by rasters, model channels and metrics
FREE = 0
BLOCKED = 1
PATH = 2
NUM_CLASSES = 3

OFFSETS_8: tuple[Cell, ...] = (
    (-1, -1), (-1, 0), (-1, 1),
    (0, -1), (0, 1),
    (1, -1), (1, 0), (1, 1),
)


@dataclass(frozen=True, eq=False)
class Grid:
    """Blocked-cell mask plus the start and goal cells.

    ``blocked`` is stored as a read-only boolean array of shape ``(height, width)``.
    """

    blocked: np.ndarray
    start: Cell
    goal: Cell

    def __post_init__(self) -> None:
        mask = np.array(self.blocked, dtype=bool, copy=True)
        if mask.ndim != 2 or mask.size == 0:
            raise ValueError(f"blocked mask must be a non-empty 2D array, got shape {mask.shape}")
        mask.setflags(write=False)
        object.__setattr__(self, "blocked", mask)
        object.__setattr__(self, "start", (int(self.start[0]), int(self.start[1])))
        object.__setattr__(self, "goal", (int(self.goal[0]), int(self.goal[1])))
        for name, cell in (("start", self.start), ("goal", self.goal)):
            if not self.in_bounds(cell):
                raise ValueError(f"{name} {cell} is outside a {self.height}x{self.width} grid")
            if mask[cell]:
                raise ValueError(f"{name} {cell} is blocked")

    @property
    def height(self) -> int:
        return self.blocked.shape[0]

    @property
    def width(self) -> int:
        return self.blocked.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.blocked.shape

    @property
    def density(self) -> float:
        return float(self.blocked.mean())

    def in_bounds(self, c: Cell) -> bool:
        return 0 <= c[0] < self.height and 0 <= c[1] < self.width

    def is_free(self, c: Cell) -> bool:
        return self.in_bounds(c) and not self.blocked[c]

    def with_endpoints(self, start: Cell, goal: Cell) -> Grid:
        return Grid(self.blocked, start, goal)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Grid):
            return NotImplemented
        return (
            self.start == other.start
            and self.goal == other.goal
            and np.array_equal(self.blocked, other.blocked)
        )

    def __hash__(self) -> int:
        return hash((self.start, self.goal, self.blocked.shape, self.blocked.tobytes()))


def _passable(blocked: np.ndarray, r: int, c: int) -> bool:
    h, w = blocked.shape
    return 0 <= r < h and 0 <= c < w and not blocked[r, c]


def step_allowed(blocked: np.ndarray, a: Cell, b: Cell) -> bool:
    """True if moving from ``a`` to the 8-adjacent ``b`` is legal.

    Both cells must be free; a diagonal step also needs both flanking
    cardinal cells free (no corner cutting).
    """
    dr, dc = b[0] - a[0], b[1] - a[1]
    if max(abs(dr), abs(dc)) != 1:
        return False
    if not (_passable(blocked, *a) and _passable(blocked, *b)):
        return False
    if dr and dc:
        return _passable(blocked, a[0] + dr, a[1]) and _passable(blocked, a[0], a[1] + dc)
    return True


def neighbors(grid: Grid, c: Cell) -> list[Cell]:
    if not grid.in_bounds(c):
        raise ValueError(f"cell {c} is outside a {grid.height}x{grid.width} grid")
    blocked = grid.blocked
    out = []
    for dr, dc in OFFSETS_8:
        n = (c[0] + dr, c[1] + dc)
        if not _passable(blocked, *n):
            continue
        if dr and dc and not (_passable(blocked, c[0] + dr, c[1]) and _passable(blocked, c[0], c[1] + dc)):
            continue
        out.append(n)
    return out


@dataclass(frozen=True)
class ValidityReport:
    ok: bool
    violation: str | None = None  # "empty", "endpoint", "out-of-bounds", "blocked-cell", "gap", "corner-cut", "repeat"
    index: int | None = None
    cell: Cell | None = None

    def __bool__(self) -> bool:
        return self.ok


def validate_path(grid: Grid, path: Sequence[Cell]) -> ValidityReport:
    """Check a start-to-goal path against the traversal rules.

    Violations are reported for the first offending position; nothing raises.
    """
    cells = [(int(r), int(c)) for r, c in path]
    if not cells:
        return ValidityReport(False, "empty")
    seen: set[Cell] = set()
    for i, cell in enumerate(cells):
        if not grid.in_bounds(cell):
            return ValidityReport(False, "out-of-bounds", i, cell)
        if grid.blocked[cell]:
            return ValidityReport(False, "blocked-cell", i, cell)
        if cell in seen:
            return ValidityReport(False, "repeat", i, cell)
        seen.add(cell)
        if i:
            prev = cells[i - 1]
            if max(abs(cell[0] - prev[0]), abs(cell[1] - prev[1])) != 1:
                return ValidityReport(False, "gap", i, cell)
            if not step_allowed(grid.blocked, prev, cell):
                return ValidityReport(False, "corner-cut", i, cell)
    if cells[0] != grid.start:
        return ValidityReport(False, "endpoint", 0, cells[0])
    if cells[-1] != grid.goal:
        return ValidityReport(False, "endpoint", len(cells) - 1, cells[-1])
    return ValidityReport(True)


_EIGHT = np.ones((3, 3), dtype=bool)


def label_components(mask: np.ndarray) -> tuple[np.ndarray, int]:
    """8-connected component labels of a boolean mask (0 = background)."""
    labels, n = ndimage.label(np.asarray(mask, dtype=bool), structure=_EIGHT)
    return labels, int(n)


def connected_components(mask: Iterable[Cell], width: int, height: int) -> list[frozenset[Cell]]:
    """Partition ``mask`` into maximal 8-connected pixel components.

    Plain pixel adjacency: the corner-cut rule is not applied. Components are
    returned ordered by their first cell in row-major order.
    """
    arr = np.zeros((height, width), dtype=bool)
    for r, c in mask:
        if not (0 <= r < height and 0 <= c < width):
            raise ValueError(f"cell {(r, c)} is outside a {height}x{width} grid")
        arr[r, c] = True
    labels, n = label_components(arr)
    comps: list[set[Cell]] = [set() for _ in range(n)]
    for r, c in zip(*np.nonzero(labels)):
        comps[labels[r, c] - 1].add((int(r), int(c)))
    return [frozenset(s) for s in comps]


def reachable(blocked: np.ndarray, allowed: np.ndarray, start: Cell, goal: Cell) -> bool:
    """Breadth-first reachability from ``start`` to ``goal`` through ``allowed`` cells.

    Steps obey :func:`step_allowed` against ``blocked``.
    """
    allowed = np.asarray(allowed, dtype=bool)
    if not (allowed[start] and allowed[goal]):
        return False
    if start == goal:
        return not blocked[start]
    seen = {start}
    frontier = [start]
    h, w = allowed.shape
    while frontier:
        nxt = []
        for r, c in frontier:
            for dr, dc in OFFSETS_8:
                n = (r + dr, c + dc)
                if n in seen or not (0 <= n[0] < h and 0 <= n[1] < w) or not allowed[n]:
                    continue
                if not step_allowed(blocked, (r, c), n):
                    continue
                if n == goal:
                    return True
                seen.add(n)
                nxt.append(n)
        frontier = nxt
    return False


def empty_grid(height: int, width: int, start: Cell = (0, 0), goal: Cell | None = None) -> Grid:
    if goal is None:
        goal = (height - 1, width - 1)
    return Grid(np.zeros((height, width), dtype=bool), start, goal)
