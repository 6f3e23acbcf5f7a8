"""
Repairing a generated path
==========================

Generated rasters are fixed up in two steps: obstacles from the real map
overwrite whatever the model drew, then gaps between path fragments are
bridged with straight Bresenham segments that avoid obstacles.
"""

import numpy as np

from ganfinder.grid import BLOCKED, FREE, PATH, Grid
from ganfinder.metrics import count_gaps, success
from ganfinder.postproc import bresenham, fill_gaps, transfer_obstacles

print(bresenham((0, 0), (3, 7)))

blocked = np.zeros((9, 9), dtype=bool)
blocked[1:6, 4] = True
grid = Grid(blocked, (4, 0), (4, 8))

# a "model output": a fragment leaving the start, one passing under the
# wall, and a stray blob drawn on top of the wall
gen = np.full((9, 9), FREE, np.uint8)
for cell in [(4, 1), (5, 2), (7, 4), (7, 5), (6, 6), (3, 4), (2, 4)]:
    gen[cell] = PATH
gen[0, 0] = BLOCKED  # a spurious obstacle, removed by the transfer

t = transfer_obstacles(grid, gen)
print("gaps before:", count_gaps(t, grid.start, grid.goal))
post = fill_gaps(t, grid.start, grid.goal)
print("gaps after:", count_gaps(post, grid.start, grid.goal), "success:", success(post, grid))

chars = {FREE: ".", BLOCKED: "#", PATH: "o"}
for row in post:
    print("".join(chars[v] for v in row))
