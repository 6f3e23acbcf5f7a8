"""Per-instance metrics (MSE, gaps, success) and the dataset evaluation harness."""
from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import codec
from .grid import PATH, Cell, Grid, label_components, reachable
from .mapgen import DatasetManifest
from .postproc import fill_gaps, transfer_obstacles


def mse(generated: np.ndarray, gt: np.ndarray) -> float:
    """Mean squared difference of two grayscale images with intensities scaled to [0, 1]."""
    a = np.asarray(generated, dtype=np.float64) / 255.0
    b = np.asarray(gt, dtype=np.float64) / 255.0
    if a.shape != b.shape:
        raise ValueError(f"image shapes differ: {a.shape} vs {b.shape}")
    return float(np.mean((a - b) ** 2))


def count_gaps(raster: np.ndarray, start: Cell, goal: Cell) -> int:
    """Number of 8-connected components of PATH cells plus start and goal, minus one."""
    mask = np.asarray(raster) == PATH
    mask[start] = True
    mask[goal] = True
    return label_components(mask)[1] - 1


def success(postprocessed: np.ndarray, grid: Grid, start: Cell | None = None, goal: Cell | None = None) -> bool:
    """True iff start reaches goal through PATH cells without crossing or corner-cutting obstacles."""
    start = grid.start if start is None else start
    goal = grid.goal if goal is None else goal
    allowed = (np.asarray(postprocessed) == PATH) & ~grid.blocked
    return reachable(grid.blocked, allowed, start, goal)


@dataclass
class InstanceEval:
    id: str
    mse: float
    gaps: int
    success: bool
    gaps_after: int = 0


@dataclass
class EvalReport:
    family: str
    split: str
    instances: list[InstanceEval] = field(default_factory=list)
    label: str = ""

    @property
    def mean_mse(self) -> float:
        return float(np.mean([i.mse for i in self.instances])) if self.instances else float("nan")

    @property
    def mean_gaps(self) -> float:
        return float(np.mean([i.gaps for i in self.instances])) if self.instances else float("nan")

    @property
    def success_rate(self) -> float:
        """Percentage of successful instances."""
        return 100.0 * float(np.mean([i.success for i in self.instances])) if self.instances else float("nan")

    def aggregates(self) -> dict:
        return {"n": len(self.instances), "mse": self.mean_mse, "gaps": self.mean_gaps, "success": self.success_rate}

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "split": self.split,
            "label": self.label,
            "aggregates": self.aggregates(),
            "instances": [asdict(i) for i in self.instances],
        }

    @classmethod
    def from_dict(cls, d: dict) -> EvalReport:
        return cls(d["family"], d["split"], [InstanceEval(**i) for i in d["instances"]], d.get("label", ""))

    def write(self, out_dir: str | Path) -> tuple[Path, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        jp, cp = out / "report.json", out / "report.csv"
        jp.write_text(json.dumps(self.to_dict(), indent=1) + "\n", encoding="utf-8")
        with cp.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["id", "mse", "gaps", "gaps_after", "success"])
            for i in self.instances:
                w.writerow([i.id, repr(i.mse), i.gaps, i.gaps_after, int(i.success)])
        return jp, cp

    @classmethod
    def read(cls, path: str | Path) -> EvalReport:
        p = Path(path)
        if p.is_dir():
            p = p / "report.json"
        return cls.from_dict(json.loads(p.read_text(encoding="utf-8")))


def format_table(reports: list[EvalReport]) -> str:
    """Plain-text comparison table: one row per report with MSE, gaps and success."""
    head = f"{'model':<20} {'data':<10} {'split':<11} {'n':>6} {'MSE':>8} {'Gaps':>8} {'Success':>8}"
    lines = [head, "-" * len(head)]
    for r in reports:
        a = r.aggregates()
        lines.append(
            f"{r.label or '-':<20} {r.family:<10} {r.split:<11} {a['n']:>6d} "
            f"{a['mse']:>8.4f} {a['gaps']:>8.4f} {a['success']:>7.1f}%"
        )
    return "\n".join(lines)


def evaluate_instance(iid: str, grid: Grid, generated: np.ndarray, gt: np.ndarray) -> tuple[InstanceEval, np.ndarray]:
    """Score one generated raster; also returns the post-processed raster."""
    err = mse(codec.render(generated), codec.render(gt))
    transferred = transfer_obstacles(grid, generated)
    gaps = count_gaps(transferred, grid.start, grid.goal)
    post = fill_gaps(transferred, grid.start, grid.goal)
    ok = success(post, grid)
    return InstanceEval(iid, err, gaps, ok, count_gaps(post, grid.start, grid.goal)), post


def evaluate_dataset(checkpoint, data_dir: str | Path, split: str = "test", oracle: bool = False,
                     limit: int | None = None, label: str = "") -> EvalReport:
    """Run inference on a split and score every instance.

    With ``oracle=True`` the ground-truth rasters stand in for model output
    and ``checkpoint`` is ignored.
    """
    from .trainer import infer, load_split

    manifest = DatasetManifest.read(Path(data_dir))
    data = load_split(data_dir, split, manifest, limit)
    if oracle:
        generated = data.targets
        label = label or "ground-truth"
    else:
        generated = codec.logits_to_raster(infer(checkpoint, data.inputs)) if len(data) else data.targets
        if not label and not isinstance(checkpoint, (str, Path)):
            label = getattr(checkpoint, "preset", "")
        elif not label:
            label = Path(checkpoint).parent.name
    report = EvalReport(manifest.config.family.value, split, label=label)
    for k in range(len(data)):
        grid = Grid(data.blocked[k], data.starts[k], data.goals[k])
        inst, _ = evaluate_instance(data.ids[k], grid, generated[k], data.targets[k])
        report.instances.append(inst)
    return report
