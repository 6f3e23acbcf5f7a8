"""Conversions between grids, class rasters, grayscale images and model tensors.

Palette: free cells are white (255), blocked cells gray (128), path cells
(start and goal included) black (0). One cell is one pixel.
"""
from __future__ import annotations

import io
import warnings
from os import PathLike
from typing import Sequence, Union

import numpy as np
import torch
from PIL import Image

from .grid import BLOCKED, FREE, NUM_CLASSES, PATH, Cell, Grid, validate_path

FREE_PX = 255
BLOCKED_PX = 128
PATH_PX = 0

# intensity of each class label, indexed by label
PALETTE = np.array([FREE_PX, BLOCKED_PX, PATH_PX], dtype=np.uint8)
# palette values in ascending order and the label each one decodes to
_SORTED_PX = np.array([PATH_PX, BLOCKED_PX, FREE_PX])
_SORTED_LABEL = np.array([PATH, BLOCKED, FREE], dtype=np.uint8)


class PaletteError(ValueError):
    """A grayscale image holds a value outside {0, 128, 255}."""


def grid_raster(grid: Grid) -> np.ndarray:
    """Class raster of the input image: obstacles, with start and goal as PATH."""
    raster = np.where(grid.blocked, BLOCKED, FREE).astype(np.uint8)
    raster[grid.start] = PATH
    raster[grid.goal] = PATH
    return raster


def path_raster(grid: Grid, path: Sequence[Cell]) -> np.ndarray:
    report = validate_path(grid, path)
    if not report.ok:
        raise ValueError(f"invalid path: {report.violation} at index {report.index} ({report.cell})")
    raster = grid_raster(grid)
    rows, cols = zip(*path)
    raster[list(rows), list(cols)] = PATH
    return raster


def render(raster: np.ndarray) -> np.ndarray:
    """Class raster -> 8-bit grayscale image."""
    return PALETTE[np.asarray(raster, dtype=np.intp)]


def encode_input(grid: Grid) -> np.ndarray:
    return render(grid_raster(grid))


def encode_ground_truth(grid: Grid, path: Sequence[Cell]) -> np.ndarray:
    return render(path_raster(grid, path))


def decode_classes(img: np.ndarray, strict: bool = False) -> np.ndarray:
    """Grayscale image -> class raster.

    Off-palette pixels snap to the nearest palette value (equidistant values go
    to the darker class) with a warning, or raise :class:`PaletteError` when
    ``strict`` is set.
    """
    img = np.asarray(img)
    if img.ndim != 2:
        raise ValueError(f"expected a single-channel image, got shape {img.shape}")
    values = img.astype(np.int64)
    dist = np.abs(values[..., None] - _SORTED_PX)
    idx = np.argmin(dist, axis=-1)  # first minimum = darker on ties
    off = dist.min(axis=-1) != 0
    if off.any():
        r, c = map(int, np.argwhere(off)[0])
        msg = f"{int(off.sum())} off-palette pixel(s), first at (row={r}, col={c}) value {int(values[r, c])}"
        if strict:
            raise PaletteError(msg)
        warnings.warn(msg + "; snapped to nearest palette value", stacklevel=2)
    return _SORTED_LABEL[idx]


def save_png(img: np.ndarray, path: Union[str, PathLike, io.BytesIO]) -> None:
    Image.fromarray(np.asarray(img, dtype=np.uint8), mode="L").save(path, format="PNG")


def load_png(path: Union[str, PathLike, io.BytesIO]) -> np.ndarray:
    with Image.open(path) as im:
        if im.mode != "L":
            raise PaletteError(f"expected 8-bit grayscale PNG, got mode {im.mode!r}")
        return np.array(im, dtype=np.uint8)


def to_model_input(raster: np.ndarray) -> np.ndarray:
    """One-hot class channels, ``(..., H, W) -> (..., 3, H, W)`` float32."""
    raster = np.asarray(raster, dtype=np.intp)
    onehot = np.eye(NUM_CLASSES, dtype=np.float32)[raster]
    return np.moveaxis(onehot, -1, -3)


def logits_to_raster(logits) -> np.ndarray:
    """Per-pixel argmax over the class axis (``-3``); ties go to FREE < BLOCKED < PATH."""
    if isinstance(logits, torch.Tensor):
        logits = logits.detach().cpu().numpy()
    logits = np.asarray(logits)
    if not np.all(np.isfinite(logits)):
        raise ValueError("logits must be finite")
    return np.argmax(logits, axis=-3).astype(np.uint8)


def extract_path_mask(x):
    """Single-channel path image.

    Integer class rasters give a binary {0, 1} mask of PATH cells. Float
    logits (class axis ``-3``, numpy or torch) give the softmax probability of
    PATH, which stays differentiable for torch inputs.
    """
    if isinstance(x, torch.Tensor):
        if x.dtype.is_floating_point:
            return torch.softmax(x, dim=-3)[..., PATH, :, :]
        return (x == PATH).float()
    x = np.asarray(x)
    if np.issubdtype(x.dtype, np.floating):
        shifted = x - x.max(axis=-3, keepdims=True)
        e = np.exp(shifted)
        return (e / e.sum(axis=-3, keepdims=True))[..., PATH, :, :]
    return (x == PATH).astype(np.float32)
