"""Upscaled side-by-side panels for looking at instances and model output."""
from __future__ import annotations

import numpy as np

SEPARATOR = 96


def upscale(img: np.ndarray, scale: int) -> np.ndarray:
    """Nearest-neighbour upscale: each pixel becomes a ``scale`` x ``scale`` block."""
    if scale < 1:
        raise ValueError("scale must be a positive integer")
    return np.repeat(np.repeat(np.asarray(img), scale, axis=0), scale, axis=1)


def panels(images: list[np.ndarray], scale: int = 8, gap: int = 2) -> np.ndarray:
    """Upscale grayscale images and lay them out left to right, separated by dark bars."""
    tiles = [upscale(im, scale) for im in images]
    h = max(t.shape[0] for t in tiles)
    parts = []
    for i, t in enumerate(tiles):
        if i:
            parts.append(np.full((h, gap), SEPARATOR, np.uint8))
        pad = np.full((h, t.shape[1]), 255, np.uint8)
        pad[: t.shape[0]] = t
        parts.append(pad)
    return np.concatenate(parts, axis=1)
