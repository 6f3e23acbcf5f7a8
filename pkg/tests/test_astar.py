import math

import numpy as np

from conftest import random_grid
from ganfinder.astar import astar, dijkstra_reference, octile, octile_pair, path_cost_pair
from ganfinder.grid import Grid, empty_grid, neighbors, validate_path


def test_octile_values():
    assert octile((0, 0), (0, 0)) == 0
    assert math.isclose(octile((0, 0), (3, 3)), 3 * math.sqrt(2))
    assert math.isclose(octile((0, 0), (2, 5)), 2 * math.sqrt(2) + 3)
    assert octile_pair((0, 0), (2, 5)) == (3, 2)


def test_start_equals_goal():
    g = Grid(np.zeros((3, 3), bool), (1, 1), (1, 1))
    res = astar(g)
    assert res.path == [(1, 1)] and res.cost == 0


def test_empty_diagonal():
    res = astar(empty_grid(8, 8, (0, 0), (7, 7)))
    assert res.cost_pair == (0, 7)
    assert math.isclose(res.cost, 7 * math.sqrt(2))


def test_dijkstra_corridor_and_wall():
    res = dijkstra_reference(empty_grid(1, 6, (0, 0), (0, 5)))
    assert res.cost_pair == (5, 0)
    blocked = np.zeros((5, 5), bool)
    blocked[:, 2] = True
    walled = Grid(blocked, (2, 0), (2, 4))
    assert not dijkstra_reference(walled).found
    assert not astar(walled).found


def test_astar_matches_dijkstra_on_random_grids(rng):
    for _ in range(100):
        g = random_grid(rng, 16, 16, rng.uniform(0.1, 0.4))
        a, d = astar(g), dijkstra_reference(g)
        assert a.cost_pair == d.cost_pair
        if a.found:
            assert validate_path(g, a.path).ok
            assert path_cost_pair(a.path) == a.cost_pair
            assert a.cost >= octile(g.start, g.goal) - 1e-12


def test_heuristic_consistent_on_edges(rng):
    g = random_grid(rng, 16, 16, 0.25)
    for r, c in np.argwhere(~g.blocked):
        u = (int(r), int(c))
        for v in neighbors(g, u):
            step = math.sqrt(2) if u[0] != v[0] and u[1] != v[1] else 1.0
            assert octile(u, g.goal) <= step + octile(v, g.goal) + 1e-12


def test_astar_deterministic(rng):
    g = random_grid(rng, 32, 32, 0.2)
    assert astar(g).path == astar(g).path
