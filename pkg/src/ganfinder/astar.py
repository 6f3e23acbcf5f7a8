"""A* ground-truth solver and a Dijkstra reference used as its test oracle.

Path costs are kept as ``(cardinal_steps, diagonal_steps)`` integer pairs.
Because sqrt(2) is irrational two costs are equal only when their pairs are
equal, and for grid-sized step counts the float ``a + b*sqrt(2)`` separates
distinct costs by far more than rounding error, so it is safe as a heap key.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

from .grid import OFFSETS_8, Cell, Grid, neighbors, step_allowed

SQRT2 = math.sqrt(2.0)

Cost = tuple[int, int]


def cost_value(cost: Cost) -> float:
    return cost[0] + cost[1] * SQRT2


def octile_pair(a: Cell, b: Cell) -> Cost:
    dr, dc = abs(a[0] - b[0]), abs(a[1] - b[1])
    lo, hi = min(dr, dc), max(dr, dc)
    return hi - lo, lo


def octile(a: Cell, b: Cell) -> float:
    """Exact free-space distance on an 8-connected unit grid."""
    return cost_value(octile_pair(a, b))


@dataclass(frozen=True)
class SearchResult:
    path: list[Cell] | None
    cost_pair: Cost | None
    expanded: int

    @property
    def found(self) -> bool:
        return self.path is not None

    @property
    def cost(self) -> float:
        return math.inf if self.cost_pair is None else cost_value(self.cost_pair)


def _reconstruct(parent: dict[Cell, Cell | None], goal: Cell) -> list[Cell]:
    out = [goal]
    while (p := parent[out[-1]]) is not None:
        out.append(p)
    out.reverse()
    return out


def astar(grid: Grid) -> SearchResult:
    """Optimal 8-connected path from ``grid.start`` to ``grid.goal`` (no corner cutting).

    Octile heuristic; equal f-values are broken by larger g, then row-major order.
    """
    start, goal = grid.start, grid.goal
    blocked = grid.blocked
    h, w = blocked.shape
    if blocked[start] or blocked[goal]:
        raise ValueError("start and goal must be unblocked")

    g: dict[Cell, Cost] = {start: (0, 0)}
    parent: dict[Cell, Cell | None] = {start: None}
    closed: set[Cell] = set()
    heap = [(octile(start, goal), -0.0, start[0], start[1], (0, 0))]
    expanded = 0
    while heap:
        _, _, r, c, gc = heapq.heappop(heap)
        cell = (r, c)
        if cell in closed or g[cell] != gc:
            continue
        closed.add(cell)
        expanded += 1
        if cell == goal:
            return SearchResult(_reconstruct(parent, goal), gc, expanded)
        for dr, dc in OFFSETS_8:
            n = (r + dr, c + dc)
            if not (0 <= n[0] < h and 0 <= n[1] < w) or n in closed:
                continue
            if not step_allowed(blocked, cell, n):
                continue
            ng = (gc[0], gc[1] + 1) if dr and dc else (gc[0] + 1, gc[1])
            old = g.get(n)
            gv = cost_value(ng)
            if old is None or gv < cost_value(old):
                g[n] = ng
                parent[n] = cell
                heapq.heappush(heap, (gv + octile(n, goal), -gv, n[0], n[1], ng))
    return SearchResult(None, None, expanded)


def dijkstra_reference(grid: Grid) -> SearchResult:
    """Plain uniform-cost search over :func:`neighbors`; the oracle for :func:`astar`."""
    if grid.blocked[grid.start] or grid.blocked[grid.goal]:
        raise ValueError("start and goal must be unblocked")
    dist: dict[Cell, Cost] = {grid.start: (0, 0)}
    parent: dict[Cell, Cell | None] = {grid.start: None}
    done: set[Cell] = set()
    heap = [(0.0, grid.start)]
    while heap:
        d, cell = heapq.heappop(heap)
        if cell in done:
            continue
        done.add(cell)
        if cell == grid.goal:
            return SearchResult(_reconstruct(parent, cell), dist[cell], len(done))
        for n in neighbors(grid, cell):
            diagonal = n[0] != cell[0] and n[1] != cell[1]
            cand = (dist[cell][0], dist[cell][1] + 1) if diagonal else (dist[cell][0] + 1, dist[cell][1])
            if n not in dist or cost_value(cand) < cost_value(dist[n]):
                dist[n] = cand
                parent[n] = cell
                heapq.heappush(heap, (cost_value(cand), n))
    return SearchResult(None, None, len(done))


def path_cost_pair(path: list[Cell]) -> Cost:
    card = diag = 0
    for a, b in zip(path, path[1:]):
        if a[0] != b[0] and a[1] != b[1]:
            diag += 1
        else:
            card += 1
    return card, diag
