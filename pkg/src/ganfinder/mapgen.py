"""Procedural obstacle maps, start/goal placement and dataset building.

Three families: rectangles up to a 20% or 30% blocked fraction, and a mix of
rectangles, diamonds and circles up to a per-map density drawn from
``density_range``. Every instance depends only on ``(config.seed, index)``.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import codec
from .astar import astar
from .grid import BLOCKED, Cell, Grid, reachable

log = logging.getLogger(__name__)

MANIFEST_FILENAME = "manifest.json"
MANIFEST_VERSION = 1
SPLITS = ("train", "test", "validation")


class Family(str, Enum):
    RECT_20 = "rect20"
    RECT_30 = "rect30"
    RANDOM_SHAPES = "random"

    @property
    def is_rect(self) -> bool:
        return self is not Family.RANDOM_SHAPES


DEFAULT_DENSITY = {Family.RECT_20: 0.20, Family.RECT_30: 0.30}


class GenerationError(RuntimeError):
    """Map could not reach its target density."""


class Unsolvable(RuntimeError):
    """No solvable start/goal pair was found on a map."""


@dataclass(frozen=True)
class MapGenConfig:
    family: Family = Family.RECT_20
    width: int = 64
    height: int = 64
    target_density: float | None = None
    density_range: tuple[float, float] = (0.05, 0.5)
    seed: int = 0
    count: int = 100
    split_fractions: tuple[float, float, float] = (0.75, 0.15, 0.10)
    max_shapes: int = 10_000
    placement_attempts: int = 20
    map_attempts: int = 50

    def __post_init__(self) -> None:
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "density_range", tuple(float(x) for x in self.density_range))
        object.__setattr__(self, "split_fractions", tuple(float(x) for x in self.split_fractions))
        if self.family.is_rect and self.target_density is None:
            object.__setattr__(self, "target_density", DEFAULT_DENSITY[self.family])
        if self.width < 2 or self.height < 2:
            raise ValueError("width and height must be at least 2")
        if self.family.is_rect:
            if not 0 < self.target_density < 1:
                raise ValueError(f"target_density must be in (0, 1), got {self.target_density}")
        else:
            lo, hi = self.density_range
            if not 0 < lo <= hi < 1:
                raise ValueError(f"density_range must satisfy 0 < lo <= hi < 1, got {self.density_range}")
        if self.count < 1:
            raise ValueError("count must be positive")
        if len(self.split_fractions) != 3 or any(f < 0 for f in self.split_fractions):
            raise ValueError("split_fractions needs three non-negative fractions")
        if not math.isclose(sum(self.split_fractions), 1.0, abs_tol=1e-9):
            raise ValueError(f"split fractions must sum to 1, got {sum(self.split_fractions)}")

    @property
    def band(self) -> int:
        """Width of the left/right column bands holding start and goal."""
        return math.ceil(self.width / 10)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["family"] = self.family.value
        d["density_range"] = list(self.density_range)
        d["split_fractions"] = list(self.split_fractions)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> MapGenConfig:
        return cls(**d)


# -- shapes -------------------------------------------------------------------

def _rect_max_side(n: int) -> int:
    return max(2, math.ceil(n / 4))


def _circle_max_radius(n: int) -> int:
    return max(1, math.ceil(n / 8))


def rect_mask(h: int, w: int, rotated: bool) -> np.ndarray:
    """Footprint of an ``h`` x ``w`` rectangle, optionally turned by 45 degrees."""
    if not rotated:
        return np.ones((h, w), dtype=bool)
    ext = math.ceil((h + w) / math.sqrt(2)) + 1
    rr, cc = np.mgrid[-ext:ext + 1, -ext:ext + 1].astype(float)
    u = (rr + cc) / math.sqrt(2)
    v = (rr - cc) / math.sqrt(2)
    m = (np.abs(u) <= h / 2) & (np.abs(v) <= w / 2)
    return _crop(m)


def diamond_mask(h: int, w: int) -> np.ndarray:
    a, b = (h - 1) / 2, (w - 1) / 2
    rr, cc = np.mgrid[0:h, 0:w].astype(float)
    return np.abs(rr - a) / max(a, 0.5) + np.abs(cc - b) / max(b, 0.5) <= 1.0 + 1e-9


def circle_mask(radius: int) -> np.ndarray:
    rr, cc = np.mgrid[-radius:radius + 1, -radius:radius + 1]
    return rr ** 2 + cc ** 2 <= radius ** 2


def _crop(m: np.ndarray) -> np.ndarray:
    rows = np.flatnonzero(m.any(axis=1))
    cols = np.flatnonzero(m.any(axis=0))
    return m[rows[0]:rows[-1] + 1, cols[0]:cols[-1] + 1]


@lru_cache(maxsize=None)
def max_shape_area(family: Family, height: int, width: int) -> int:
    """Largest number of cells a single sampled shape can block."""
    n = min(height, width)
    side = _rect_max_side(n)
    areas = [rect_mask(h, w, rot).sum() for h in range(2, side + 1) for w in range(2, side + 1) for rot in (False, True)]
    if not family.is_rect:
        areas += [diamond_mask(h, w).sum() for h in range(2, side + 1) for w in range(2, side + 1)]
        areas += [circle_mask(r).sum() for r in range(1, _circle_max_radius(n) + 1)]
    return int(max(areas))


def _sample_shape(rng: np.random.Generator, family: Family, n: int) -> np.ndarray:
    side = _rect_max_side(n)
    kind = "rect" if family.is_rect else rng.choice(["rect", "diamond", "circle"])
    if kind == "rect":
        h, w = rng.integers(2, side + 1, size=2)
        return rect_mask(int(h), int(w), rotated=bool(rng.integers(2)))
    if kind == "diamond":
        h, w = rng.integers(2, side + 1, size=2)
        return diamond_mask(int(h), int(w))
    return circle_mask(int(rng.integers(1, _circle_max_radius(n) + 1)))


def _stamp(blocked: np.ndarray, shape: np.ndarray, top: int, left: int) -> None:
    """OR a shape into the grid with its top-left at (top, left), clipping at the borders."""
    H, W = blocked.shape
    sh, sw = shape.shape
    r0, c0 = max(top, 0), max(left, 0)
    r1, c1 = min(top + sh, H), min(left + sw, W)
    if r0 >= r1 or c0 >= c1:
        return
    blocked[r0:r1, c0:c1] |= shape[r0 - top:r1 - top, c0 - left:c1 - left]


def _instance_rng(config: MapGenConfig, instance_seed: int, stream: int) -> np.random.Generator:
    return np.random.default_rng([config.seed & 0xFFFFFFFFFFFFFFFF, instance_seed, stream])


def sample_target_density(config: MapGenConfig, instance_seed: int) -> float:
    if config.family.is_rect:
        return float(config.target_density)
    lo, hi = config.density_range
    return float(_instance_rng(config, instance_seed, 0).uniform(lo, hi))


def gen_map(config: MapGenConfig, instance_seed: int) -> np.ndarray:
    """Blocked mask for one instance; shapes are added until the target density is met."""
    target = sample_target_density(config, instance_seed)
    rng = _instance_rng(config, instance_seed, 1)
    H, W = config.height, config.width
    blocked = np.zeros((H, W), dtype=bool)
    n = min(H, W)
    total = H * W
    count = 0
    for _ in range(config.max_shapes):
        shape = _sample_shape(rng, config.family, n)
        sh, sw = shape.shape
        top = int(rng.integers(-(sh - 1), H))
        left = int(rng.integers(-(sw - 1), W))
        _stamp(blocked, shape, top, left)
        count = int(blocked.sum())
        if count >= target * total:
            return blocked
    raise GenerationError(f"density {count / total:.3f} short of target {target:.3f} after {config.max_shapes} shapes")


def place_start_goal(blocked: np.ndarray, instance_seed: int, config: MapGenConfig | None = None) -> tuple[Cell, Cell]:
    """Pick start in the left column band and goal in the right band, solvable.

    Raises :class:`Unsolvable` after ``placement_attempts`` failed draws.
    """
    H, W = blocked.shape
    if config is None:
        config = MapGenConfig(width=W, height=H)
    band = math.ceil(W / 10)
    rng = _instance_rng(config, instance_seed, 2)
    left = np.argwhere(~blocked[:, :band])
    right = np.argwhere(~blocked[:, W - band:])
    if len(left) == 0 or len(right) == 0:
        raise Unsolvable("no free cell in a start/goal band")
    right[:, 1] += W - band
    free = ~blocked
    for _ in range(config.placement_attempts):
        s = tuple(map(int, left[rng.integers(len(left))]))
        g = tuple(map(int, right[rng.integers(len(right))]))
        if s != g and reachable(blocked, free, s, g):
            return s, g
    raise Unsolvable(f"no solvable start/goal pair after {config.placement_attempts} attempts")


# -- datasets -------------------------------------------------------------------

@dataclass
class InstanceRecord:
    id: str
    index: int
    seed: int
    density: float
    start: Cell
    goal: Cell
    split: str
    input_path: str
    gt_path: str
    path_length: int


@dataclass
class DatasetManifest:
    config: MapGenConfig
    instances: list[InstanceRecord] = field(default_factory=list)
    version: int = MANIFEST_VERSION

    def split(self, name: str) -> list[InstanceRecord]:
        if name not in SPLITS:
            raise ValueError(f"unknown split {name!r}; expected one of {SPLITS}")
        return [r for r in self.instances if r.split == name]

    def counts(self) -> dict[str, int]:
        return {s: sum(r.split == s for r in self.instances) for s in SPLITS}

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "config": self.config.to_dict(),
            "instances": [
                {**asdict(r), "start": list(r.start), "goal": list(r.goal)} for r in self.instances
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> DatasetManifest:
        if d.get("version") != MANIFEST_VERSION:
            raise ValueError(f"unsupported manifest version {d.get('version')!r}")
        recs = [
            InstanceRecord(**{**r, "start": tuple(r["start"]), "goal": tuple(r["goal"])}) for r in d["instances"]
        ]
        return cls(MapGenConfig.from_dict(d["config"]), recs, d["version"])

    def write(self, out_dir: Path) -> Path:
        path = Path(out_dir) / MANIFEST_FILENAME
        path.write_text(json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n", encoding="utf-8")
        return path

    @classmethod
    def read(cls, data_dir: Path) -> DatasetManifest:
        path = Path(data_dir)
        if path.is_dir():
            path = path / MANIFEST_FILENAME
        return cls.from_dict(json.loads(path.read_text(encoding="utf-8")))


def split_counts(count: int, fractions: tuple[float, ...]) -> list[int]:
    """Largest-remainder rounding of ``count * fractions``; earlier splits win ties."""
    quotas = [count * f for f in fractions]
    base = [math.floor(q) for q in quotas]
    order = sorted(range(len(quotas)), key=lambda i: (-(quotas[i] - base[i]), i))
    for i in order[: count - sum(base)]:
        base[i] += 1
    return base


def assign_splits(config: MapGenConfig) -> list[str]:
    counts = split_counts(config.count, config.split_fractions)
    tags = [name for name, k in zip(SPLITS, counts) for _ in range(k)]
    perm = np.random.default_rng([config.seed & 0xFFFFFFFFFFFFFFFF, 0x5EED]).permutation(config.count)
    out = [""] * config.count
    for tag, idx in zip(tags, perm):
        out[int(idx)] = tag
    return out


@dataclass
class Instance:
    grid: Grid
    path: list[Cell]
    seed: int


def make_instance(config: MapGenConfig, index: int) -> Instance:
    """Generate instance ``index``; failed maps are regenerated with the next seed."""
    for attempt in range(config.map_attempts):
        seed = index * config.map_attempts + attempt
        try:
            blocked = gen_map(config, seed)
            start, goal = place_start_goal(blocked, seed, config)
        except (GenerationError, Unsolvable) as exc:
            log.debug("instance %d seed %d rejected: %s", index, seed, exc)
            continue
        grid = Grid(blocked, start, goal)
        result = astar(grid)
        assert result.found
        return Instance(grid, result.path, seed)
    raise GenerationError(f"instance {index}: no usable map in {config.map_attempts} attempts")


def build_dataset(config: MapGenConfig, out_dir: str | Path) -> DatasetManifest:
    """Generate ``config.count`` instances, write their PNGs and ``manifest.json``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    splits = assign_splits(config)
    width = max(5, len(str(config.count - 1)))
    manifest = DatasetManifest(config)
    for i in range(config.count):
        inst = make_instance(config, i)
        iid = f"{i:0{width}d}"
        inp, gt = f"{iid}_input.png", f"{iid}_gt.png"
        codec.save_png(codec.encode_input(inst.grid), out / inp)
        codec.save_png(codec.encode_ground_truth(inst.grid, inst.path), out / gt)
        manifest.instances.append(
            InstanceRecord(
                id=iid,
                index=i,
                seed=inst.seed,
                density=float(inst.grid.blocked.mean()),
                start=inst.grid.start,
                goal=inst.grid.goal,
                split=splits[i],
                input_path=inp,
                gt_path=gt,
                path_length=len(inst.path),
            )
        )
    manifest.write(out)
    return manifest


def load_instance(data_dir: str | Path, rec: InstanceRecord) -> tuple[Grid, np.ndarray]:
    """Grid and ground-truth class raster of a persisted instance."""
    d = Path(data_dir)
    inp = codec.decode_classes(codec.load_png(d / rec.input_path), strict=True)
    gt = codec.decode_classes(codec.load_png(d / rec.gt_path), strict=True)
    grid = Grid(inp == BLOCKED, rec.start, rec.goal)
    return grid, gt
