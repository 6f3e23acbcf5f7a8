import json

import numpy as np
import pytest

from ganfinder.astar import astar
from ganfinder.grid import PATH
from ganfinder.mapgen import (
    DatasetManifest,
    Family,
    MapGenConfig,
    Unsolvable,
    assign_splits,
    build_dataset,
    gen_map,
    load_instance,
    max_shape_area,
    place_start_goal,
    split_counts,
)


def test_rect20_density_band():
    cfg = MapGenConfig(Family.RECT_20, 64, 64)
    band = max_shape_area(Family.RECT_20, 64, 64) / 4096
    for seed in range(10):
        d = gen_map(cfg, seed).mean()
        assert 0.20 <= d <= 0.20 + band


def test_random_shapes_density_band():
    from ganfinder.mapgen import sample_target_density

    cfg = MapGenConfig(Family.RANDOM_SHAPES, 32, 32)
    band = max_shape_area(Family.RANDOM_SHAPES, 32, 32) / 1024
    for seed in range(10):
        target = sample_target_density(cfg, seed)
        assert 0.05 <= target <= 0.5
        assert target <= gen_map(cfg, seed).mean() <= target + band


def test_rect30_uses_same_generator():
    cfg = MapGenConfig(Family.RECT_30, 32, 32)
    assert cfg.target_density == 0.30
    assert gen_map(cfg, 0).mean() >= 0.30


@pytest.mark.parametrize("kw", [
    {"target_density": 0.0}, {"target_density": 1.0}, {"count": 0},
    {"split_fractions": (0.5, 0.2, 0.2)},
])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        MapGenConfig(**kw)


def test_gen_map_deterministic():
    cfg = MapGenConfig(Family.RANDOM_SHAPES, 16, 16, seed=9)
    assert np.array_equal(gen_map(cfg, 3), gen_map(cfg, 3))
    assert not np.array_equal(gen_map(cfg, 3), gen_map(cfg, 4))


def test_place_start_goal_empty_grid():
    blocked = np.zeros((20, 20), bool)
    for seed in range(20):
        s, g = place_start_goal(blocked, seed)
        assert s[1] < 2 and g[1] >= 18
    assert place_start_goal(blocked, 5) == place_start_goal(blocked, 5)


def test_place_start_goal_wall():
    blocked = np.zeros((10, 10), bool)
    blocked[:, 5] = True
    with pytest.raises(Unsolvable):
        place_start_goal(blocked, 0)


def test_split_counts_largest_remainder():
    # quotas 6.0 / 1.2 / 0.8 -> floors 6/1/0, the one spare unit goes to 0.8
    assert split_counts(8, (0.75, 0.15, 0.10)) == [6, 1, 1]
    assert split_counts(100, (0.75, 0.15, 0.10)) == [75, 15, 10]
    assert sum(split_counts(7, (0.75, 0.15, 0.10))) == 7


def test_assign_splits_deterministic():
    cfg = MapGenConfig(count=40, seed=3)
    tags = assign_splits(cfg)
    assert tags == assign_splits(cfg)
    assert [tags.count(s) for s in ("train", "test", "validation")] == [30, 6, 4]


def test_build_dataset(tmp_path):
    cfg = MapGenConfig(Family.RECT_20, 16, 16, seed=11, count=8)
    m = build_dataset(cfg, tmp_path / "a")
    assert m.counts() == {"train": 6, "test": 1, "validation": 1}
    assert len({r.id for r in m.instances}) == 8
    for rec in m.instances:
        grid, gt = load_instance(tmp_path / "a", rec)
        assert rec.density == pytest.approx(grid.blocked.mean())
        assert rec.start[1] < cfg.band and rec.goal[1] >= 16 - cfg.band
        assert astar(grid).found
        path = [tuple(map(int, c)) for c in np.argwhere(gt == PATH)]
        assert len(path) == rec.path_length
    again = build_dataset(cfg, tmp_path / "b")
    a = (tmp_path / "a" / "manifest.json").read_bytes()
    assert a == (tmp_path / "b" / "manifest.json").read_bytes()
    assert DatasetManifest.read(tmp_path / "a").to_dict() == again.to_dict()
    assert json.loads(a)["config"]["family"] == "rect20"
    for rec in m.instances:
        assert (tmp_path / "a" / rec.gt_path).read_bytes() == (tmp_path / "b" / rec.gt_path).read_bytes()
