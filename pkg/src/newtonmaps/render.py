"""Binary PPM output for basin rasters.

Converged pixels take the palette colour of their root, dimmed by
``1 - min(1, iterations / budget)``. Escaped pixels use the same brightness
on a gray ramp topping out at ESCAPE_GRAY, so they stay distinct from the
white of undecided pixels. Pole hits are black.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .dynamics import BasinRaster, Fate

# root index -> RGB, cycled past the end
PALETTE = np.array([
    (230, 25, 75), (60, 180, 75), (0, 130, 200), (255, 225, 25),
    (145, 30, 180), (70, 240, 240), (245, 130, 48), (240, 50, 230),
    (210, 245, 60), (0, 128, 128), (170, 110, 40), (128, 128, 0),
], dtype=np.float64)
ESCAPE_GRAY = 192.0


def raster_rgb(raster: BasinRaster) -> np.ndarray:
    """(height, width, 3) uint8 image, row 0 at the top."""
    bright = 1.0 - np.minimum(1.0, raster.iterations / raster.budget)
    rgb = np.zeros((raster.height, raster.width, 3), dtype=np.float64)
    conv = raster.fate == Fate.CONVERGED
    colours = PALETTE[np.where(conv, raster.root, 0) % len(PALETTE)]
    rgb[conv] = colours[conv] * bright[conv, None]
    esc = raster.fate == Fate.ESCAPED
    rgb[esc] = (ESCAPE_GRAY * bright[esc])[:, None]
    rgb[raster.fate == Fate.UNDECIDED] = 255.0
    # HitPole stays black
    return np.rint(rgb).astype(np.uint8)


def ppm_bytes(rgb: np.ndarray) -> bytes:
    h, w, _ = rgb.shape
    return b"P6\n%d %d\n255\n" % (w, h) + np.ascontiguousarray(rgb, dtype=np.uint8).tobytes()


def write_ppm(path: str | Path, raster: BasinRaster) -> bytes:
    data = ppm_bytes(raster_rgb(raster))
    Path(path).write_bytes(data)
    return data


def read_ppm(data: bytes) -> np.ndarray:
    """Parse a binary P6 image written by :func:`ppm_bytes`."""
    parts = data.split(b"\n", 3)
    if parts[0] != b"P6" or parts[2] != b"255":
        raise ValueError("not a binary 8-bit PPM")
    w, h = map(int, parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(h, w, 3)
