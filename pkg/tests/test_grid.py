import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_grid, union_find_components
from ganfinder.grid import Grid, connected_components, empty_grid, neighbors, step_allowed, validate_path


def test_neighbors_empty_center():
    g = empty_grid(3, 3)
    assert sorted(neighbors(g, (1, 1))) == sorted(
        (r, c) for r in range(3) for c in range(3) if (r, c) != (1, 1)
    )


def test_neighbors_corner_cell():
    assert sorted(neighbors(empty_grid(3, 3), (0, 0))) == [(0, 1), (1, 0), (1, 1)]


def test_neighbors_no_corner_cutting():
    blocked = np.zeros((3, 3), bool)
    blocked[0, 1] = blocked[1, 0] = True
    g = Grid(blocked, (1, 1), (2, 2))
    # by hand: free ring cells are (0,0) (0,2) (1,2) (2,0) (2,1) (2,2);
    # (0,0) needs (0,1)+(1,0), (0,2) needs (0,1)+(1,2), (2,0) needs (1,0)+(2,1)
    assert sorted(neighbors(g, (1, 1))) == [(1, 2), (2, 1), (2, 2)]


def test_neighbors_out_of_bounds():
    with pytest.raises(ValueError):
        neighbors(empty_grid(3, 3), (3, 0))


def test_grid_rejects_blocked_endpoints():
    blocked = np.zeros((2, 2), bool)
    blocked[0, 0] = True
    with pytest.raises(ValueError):
        Grid(blocked, (0, 0), (1, 1))


def test_grid_is_immutable():
    g = empty_grid(2, 2)
    with pytest.raises(ValueError):
        g.blocked[0, 0] = True


@given(st.integers(0, 2**32 - 1), st.floats(0.0, 0.5))
@settings(max_examples=50, deadline=None)
def test_neighbors_symmetric(seed, density):
    g = random_grid(np.random.default_rng(seed), 6, 7, density)
    free = [tuple(map(int, c)) for c in np.argwhere(~g.blocked)]
    for a in free:
        for b in neighbors(g, a):
            assert a in neighbors(g, b)


def test_validate_degenerate_path():
    g = Grid(np.zeros((2, 2), bool), (0, 0), (0, 0))
    assert validate_path(g, [(0, 0)]).ok


def test_validate_blocked_cell():
    blocked = np.zeros((3, 3), bool)
    blocked[1, 1] = True
    g = Grid(blocked, (0, 0), (2, 2))
    rep = validate_path(g, [(0, 0), (1, 1), (2, 2)])
    assert not rep.ok and rep.violation == "blocked-cell" and rep.cell == (1, 1)


def test_validate_gap():
    g = empty_grid(3, 3)
    rep = validate_path(g, [(0, 0), (2, 2)])
    assert not rep.ok and rep.violation == "gap"


def test_validate_corner_cut_and_endpoints():
    blocked = np.zeros((2, 2), bool)
    blocked[0, 1] = blocked[1, 0] = True
    g = Grid(blocked, (0, 0), (1, 1))
    assert validate_path(g, [(0, 0), (1, 1)]).violation == "corner-cut"
    g2 = empty_grid(3, 3)
    assert validate_path(g2, [(0, 0), (1, 1)]).violation == "endpoint"
    assert validate_path(g2, [(0, 0), (1, 1), (0, 0)]).violation == "repeat"
    assert validate_path(g2, []).violation == "empty"


def test_valid_path_steps_are_neighbors(rng):
    g = empty_grid(4, 4)
    path = [(0, 0), (1, 1), (2, 2), (3, 3)]
    assert validate_path(g, path).ok
    assert all(b in neighbors(g, a) for a, b in zip(path, path[1:]))
    assert step_allowed(g.blocked, (0, 0), (1, 1))
    assert not step_allowed(g.blocked, (0, 0), (2, 2))


def test_components_empty():
    assert connected_components([], 4, 4) == []


def test_components_diagonal_touch_merges():
    comps = connected_components([(0, 0), (1, 1), (5, 5)], 8, 8)
    assert set(comps) == {frozenset({(0, 0), (1, 1)}), frozenset({(5, 5)})}


def test_components_match_union_find(rng):
    for _ in range(200):
        idx = rng.choice(64, size=10, replace=False)
        cells = [(int(i) // 8, int(i) % 8) for i in idx]
        assert connected_components(cells, 8, 8) == union_find_components(cells, 8, 8)


@given(st.lists(st.tuples(st.integers(0, 9), st.integers(0, 9)), max_size=40), st.randoms())
@settings(max_examples=100, deadline=None)
def test_components_partition_and_order_invariance(cells, rnd):
    comps = connected_components(cells, 10, 10)
    union = set().union(*comps) if comps else set()
    assert union == set(cells)
    assert sum(len(c) for c in comps) == len(union)
    shuffled = list(cells)
    rnd.shuffle(shuffled)
    assert set(connected_components(shuffled, 10, 10)) == set(comps)
