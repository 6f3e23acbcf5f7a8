"""
Maps, datasets and the image encoding
=====================================

Obstacle maps are drawn from seeded families, solved with A*, and stored as
three-level grayscale PNGs: free 255, blocked 128, path 0.
"""

import tempfile
from pathlib import Path

import numpy as np

from ganfinder import codec
from ganfinder.mapgen import Family, MapGenConfig, build_dataset, load_instance

cfg = MapGenConfig(Family.RECT_20, width=16, height=16, seed=7, count=40)
out = Path(tempfile.mkdtemp()) / "rect20"
manifest = build_dataset(cfg, out)
print(manifest.counts())

# same config, same bytes: regenerate and compare the manifest
again = build_dataset(cfg, Path(tempfile.mkdtemp()) / "again")
print("reproducible:", again.to_dict()["instances"] == manifest.to_dict()["instances"])

rec = manifest.instances[0]
print(rec.id, "density %.3f" % rec.density, "start", rec.start, "goal", rec.goal, "path cells", rec.path_length)

grid, gt = load_instance(out, rec)
img = codec.render(gt)
print(np.unique(img, return_counts=True))

# decoding snaps off-palette pixels to the nearest level and warns;
# strict mode refuses them
noisy = img.astype(int)
noisy[0, 0] = 140
print(codec.decode_classes(noisy.astype(np.uint8))[0, 0])
try:
    codec.decode_classes(noisy.astype(np.uint8), strict=True)
except codec.PaletteError as exc:
    print("strict:", exc)

# the random-shapes family mixes rectangles, diamonds and circles
shapes = build_dataset(MapGenConfig(Family.RANDOM_SHAPES, 32, 32, seed=3, count=10),
                       Path(tempfile.mkdtemp()) / "random")
print(["%.2f" % r.density for r in shapes.instances])
