"""Deterministic PPM (P6) images of rotor blobs and sandpiles.

One pixel per lattice site over the smallest origin-centered square holding
every non-default site, plus a one-pixel black margin; y increases downward.
P6 keeps the bytes codec-free so golden-hash tests stay exact; convert with
e.g. ImageMagick (`magick blob.ppm blob.png`) for viewing.

Rotor palette: vacant black; East red, West yellow, North green, South blue.
Sandpile palette: 0..4 grains = black, gray, orange, yellow, blue, so a full
standard site (3) renders yellow and a full greedy site (4) renders blue.
"""

from __future__ import annotations

import numpy as np

from .rotor import RotorBlob
from .sandpile import SandGrid

ROTOR_PALETTE = np.array([
    [255, 0, 0],      # East
    [0, 255, 0],      # North
    [255, 255, 0],    # West
    [0, 0, 255],      # South
], dtype=np.uint8)

VACANT_RGB = np.array([0, 0, 0], dtype=np.uint8)

SAND_PALETTE = np.array([
    [0, 0, 0],        # 0 grains (or never occupied)
    [128, 128, 128],  # 1
    [255, 128, 0],    # 2
    [255, 255, 0],    # 3
    [0, 0, 255],      # 4
], dtype=np.uint8)


def ppm_bytes(rgb: np.ndarray) -> bytes:
    h, w, c = rgb.shape
    if c != 3 or rgb.dtype != np.uint8:
        raise ValueError("need an (h, w, 3) uint8 array")
    return b"P6\n%d %d\n255\n" % (w, h) + rgb.tobytes()


def _central_window(a: np.ndarray, half: int, nondefault: np.ndarray) -> int:
    """Image half-extent: max |coordinate| of any non-default site, plus 1."""
    ys, xs = np.nonzero(nondefault)
    if len(xs) == 0:
        return 1
    m = max(int(np.abs(xs - half).max()), int(np.abs(ys - half).max()))
    return min(m + 1, half)


def render_rotor(blob: RotorBlob) -> bytes:
    cnt = blob.counts()
    occ = cnt >= 0
    hi = _central_window(cnt, blob.half, occ)
    h = blob.half
    sub = cnt[h - hi:h + hi + 1, h - hi:h + hi + 1]
    subocc = sub >= 0
    rgb = np.zeros(sub.shape + (3,), np.uint8)
    rotor_idx = (sub & 3).astype(np.uint8)
    rgb[subocc] = ROTOR_PALETTE[rotor_idx[subocc]]
    return ppm_bytes(rgb[::-1, :, :])  # y increases downward


def render_sandpile(grid: SandGrid) -> bytes:
    hts = grid.heights
    hi = _central_window(hts, grid.half, hts != 0)
    h = grid.half
    sub = hts[h - hi:h + hi + 1, h - hi:h + hi + 1]
    levels = np.clip(sub, 0, 4).astype(np.uint8)
    rgb = SAND_PALETTE[levels]
    return ppm_bytes(rgb[::-1, :, :])


def write_output(data: bytes, path: str) -> None:
    """Write bytes to a file, or to standard output when path is '-'."""
    if path == "-":
        import sys
        sys.stdout.buffer.write(data)
    else:
        with open(path, "wb") as f:
            f.write(data)
