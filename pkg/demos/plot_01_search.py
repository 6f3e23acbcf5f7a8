"""
Shortest paths on an 8-connected grid
=====================================

A* with the octile heuristic, checked against a plain Dijkstra search.
Diagonal moves may not squeeze between two obstacles: both cells flanking
the diagonal have to be free.
"""

import numpy as np

from ganfinder.astar import astar, dijkstra_reference
from ganfinder.grid import Grid, neighbors, validate_path

# a 6x8 room with a wall that has one opening at the bottom
blocked = np.zeros((6, 8), dtype=bool)
blocked[0:5, 4] = True
grid = Grid(blocked, start=(0, 0), goal=(0, 7))

res = astar(grid)
print("path:", res.path)
print("cost %.4f  (cardinal, diagonal) = %s  expanded %d" % (res.cost, res.cost_pair, res.expanded))
print("valid:", validate_path(grid, res.path).ok)

# the oracle agrees on the cost; paths may differ among equal-cost ties
ref = dijkstra_reference(grid)
print("dijkstra cost pair:", ref.cost_pair)

# corner cutting: from (4, 3) the diagonal to (5, 4) is fine, (3, 4) is a wall
print("neighbors of (4, 3):", neighbors(grid, (4, 3)))

# draw it
canvas = np.where(blocked, "#", ".").astype("<U1")
for r, c in res.path:
    canvas[r, c] = "o"
print("\n".join("".join(row) for row in canvas))

# a sealed goal gives no path and an infinite cost
sealed = blocked.copy()
sealed[5, 4] = True
none = astar(Grid(sealed, (0, 0), (0, 7)))
print("sealed:", none.found, none.cost)
