"""
Training and evaluation end to end
==================================

A small run on 16x16 maps. It is far too short to be good; the point is the
shape of the workflow: generate, train, score, look at an instance.
Expect a couple of minutes on a CPU.
"""

import tempfile
from pathlib import Path

from ganfinder import codec
from ganfinder.mapgen import DatasetManifest, Family, MapGenConfig, build_dataset, load_instance
from ganfinder.metrics import evaluate_dataset, evaluate_instance, format_table
from ganfinder.render import panels
from ganfinder.trainer import TrainConfig, infer, read_log, train

root = Path(tempfile.mkdtemp())
build_dataset(MapGenConfig(Family.RECT_20, 16, 16, seed=1, count=400), root / "data")

result = train(TrainConfig(str(root / "data"), str(root / "run"), epochs=3, base_features=32, seed=0))
rows = read_log(result.log_path)
print("steps", len(rows), "first g_sup %.3f last g_sup %.3f" % (rows[0]["g_sup"], rows[-1]["g_sup"]))

report = evaluate_dataset(result.checkpoint, root / "data", "test", label="ganfinder")
oracle = evaluate_dataset(None, root / "data", "test", oracle=True, label="ground truth")
print(format_table([report, oracle]))

rec = DatasetManifest.read(root / "data").split("test")[0]
grid, gt = load_instance(root / "data", rec)
generated = codec.logits_to_raster(infer(result.bundle, codec.grid_raster(grid)))
ev, post = evaluate_instance(rec.id, grid, generated, gt)
print(ev)
codec.save_png(panels([codec.encode_input(grid), codec.render(gt), codec.render(generated), codec.render(post)]),
               root / "panels.png")
print("panels:", root / "panels.png")
