"""Post-processing of generated rasters: obstacle transfer and gap filling."""
from __future__ import annotations

import numpy as np

from .grid import BLOCKED, FREE, PATH, Cell, Grid, label_components, step_allowed


def transfer_obstacles(grid: Grid, generated: np.ndarray) -> np.ndarray:
    """Copy the grid's blocked set onto a generated raster.

    Blocked cells become BLOCKED whatever was generated there; BLOCKED labels
    the generator put on free cells become FREE.
    """
    generated = np.asarray(generated)
    if generated.shape != grid.shape:
        raise ValueError(f"raster shape {generated.shape} does not match grid {grid.shape}")
    out = generated.astype(np.uint8, copy=True)
    out[(out == BLOCKED) & ~grid.blocked] = FREE
    out[grid.blocked] = BLOCKED
    return out


def bresenham(a: Cell, b: Cell) -> list[Cell]:
    """Integer line from ``a`` to ``b`` inclusive.

    Steps along the major axis; the minor coordinate follows the ideal line,
    rounding exact half-way points back toward ``a``.
    """
    r0, c0 = a
    r1, c1 = b
    dr, dc = abs(r1 - r0), abs(c1 - c0)
    sr = 1 if r1 >= r0 else -1
    sc = 1 if c1 >= c0 else -1
    steep = dr > dc
    major, minor = (dr, dc) if steep else (dc, dr)
    cells = []
    err = 2 * minor - major
    m = 0
    for t in range(major + 1):
        cells.append((r0 + sr * t, c0 + sc * m) if steep else (r0 + sr * m, c0 + sc * t))
        if err > 0:
            m += 1
            err -= 2 * major
        err += 2 * minor
    return cells


def _segment_ok(blocked: np.ndarray, segment: list[Cell]) -> bool:
    if any(blocked[c] for c in segment):
        return False
    return all(step_allowed(blocked, p, q) for p, q in zip(segment, segment[1:]))


def _closest_pair(main: np.ndarray, other: np.ndarray) -> tuple[int, Cell, Cell]:
    """Closest cell pair between two coordinate arrays (rows sorted row-major).

    Ties are broken by the main cell, then the other cell, in row-major order.
    """
    d2 = ((main[:, None, :] - other[None, :, :]) ** 2).sum(axis=-1)
    i, j = np.unravel_index(np.argmin(d2), d2.shape)
    return int(d2[i, j]), tuple(map(int, main[i])), tuple(map(int, other[j]))


def fill_gaps(raster: np.ndarray, start: Cell, goal: Cell) -> np.ndarray:
    """Join PATH components to the start component with straight segments.

    Greedy: the component nearest to the start component (Euclidean distance
    between closest cells) is joined by a Bresenham segment between that
    closest pair. Segments crossing a blocked cell or cutting a corner are
    skipped and the next-nearest component is tried; the loop ends when no
    remaining component can be joined.

    Obstacles are read from the raster's BLOCKED labels, so obstacle transfer
    must already have been applied.
    """
    out = np.asarray(raster).astype(np.uint8, copy=True)
    blocked = out == BLOCKED
    if blocked[start] or blocked[goal]:
        raise ValueError("start and goal must not be blocked")
    out[start] = PATH
    out[goal] = PATH

    while True:
        labels, n = label_components(out == PATH)
        main_label = labels[start]
        main = np.argwhere(labels == main_label)
        candidates = []
        for lab in range(1, n + 1):
            if lab == main_label:
                continue
            d2, a, b = _closest_pair(main, np.argwhere(labels == lab))
            candidates.append((d2, a, b))
        candidates.sort()
        for _, a, b in candidates:
            segment = bresenham(a, b)
            if _segment_ok(blocked, segment):
                rows, cols = zip(*segment)
                out[list(rows), list(cols)] = PATH
                break
        else:
            return out


def postprocess(grid: Grid, generated: np.ndarray) -> np.ndarray:
    """Obstacle transfer followed by gap filling."""
    return fill_gaps(transfer_obstacles(grid, generated), grid.start, grid.goal)
