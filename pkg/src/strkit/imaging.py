"""Raster extraction of text instances.

Axis-aligned crop, rotated rectified crop, and the character-strip crop
used by the incomplete-text mutation. Images are value-like uint8 buffers;
all operations are deterministic and safe to parallelize.

Pixel convention: pixel (row r, col c) covers the unit square
[c, c+1) x [r, r+1); its center sits at (c + 0.5, r + 0.5).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .geometry import AABB, GeometryError, RotatedRect


class ImagingError(ValueError):
    pass


@dataclass
class RasterImage:
    """8-bit raster, row-major, 1 (gray) or 3 (RGB) channels."""

    pixels: np.ndarray  # shape (height, width, channels), dtype uint8

    def __post_init__(self):
        if self.pixels.ndim == 2:
            self.pixels = self.pixels[:, :, np.newaxis]
        if self.pixels.ndim != 3 or self.pixels.shape[2] not in (1, 3):
            raise ImagingError(f"bad pixel buffer shape: {self.pixels.shape}")
        if self.pixels.dtype != np.uint8:
            raise ImagingError(f"pixels must be uint8, got {self.pixels.dtype}")
        if self.height < 1 or self.width < 1:
            raise ImagingError("image must be at least 1x1")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def channels(self) -> int:
        return self.pixels.shape[2]


def iround(x: float) -> int:
    """Round half away from zero onto the integer pixel grid."""
    return int(math.floor(x + 0.5)) if x >= 0 else -int(math.floor(-x + 0.5))


def read_image(path: str | Path) -> RasterImage:
    """Read PNG or JPEG; grayscale stays 1-channel, everything else becomes RGB."""
    with Image.open(path) as im:
        if im.mode in ("1", "L", "I", "I;16"):
            im = im.convert("L")
        elif im.mode != "RGB":
            im = im.convert("RGB")
        arr = np.asarray(im, dtype=np.uint8)
    return RasterImage(arr.copy())


def write_png(img: RasterImage, path: str | Path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    arr = img.pixels[:, :, 0] if img.channels == 1 else img.pixels
    Image.fromarray(arr).save(path, format="PNG")


def read_pgm(path: str | Path) -> RasterImage:
    """Read a plain (P2) PGM fixture; hand-verifiable test format."""
    tokens: list[str] = []
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0]
        tokens.extend(line.split())
    if not tokens or tokens[0] != "P2":
        raise ImagingError(f"not a plain PGM file: {path}")
    width, height, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    if maxval != 255:
        raise ImagingError("only maxval 255 supported")
    values = np.array([int(t) for t in tokens[4:]], dtype=np.uint8)
    if values.size != width * height:
        raise ImagingError(f"expected {width * height} samples, got {values.size}")
    return RasterImage(values.reshape(height, width))


def write_pgm(img: RasterImage, path: str | Path) -> None:
    if img.channels != 1:
        raise ImagingError("PGM supports grayscale only")
    lines = ["P2", f"{img.width} {img.height}", "255"]
    for row in img.pixels[:, :, 0]:
        lines.append(" ".join(str(int(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def crop_axis_aligned(img: RasterImage, box: AABB) -> RasterImage:
    """Copy the clamped box without resampling.

    Box coordinates are rounded to the pixel grid, then clamped to image
    bounds; a box entirely outside the image is an error.
    """
    x0 = max(0, iround(box.x_min))
    y0 = max(0, iround(box.y_min))
    x1 = min(img.width, iround(box.x_max))
    y1 = min(img.height, iround(box.y_max))
    if x1 <= x0 or y1 <= y0:
        raise ImagingError(f"box {box} lies entirely outside the {img.width}x{img.height} image")
    return RasterImage(img.pixels[y0:y1, x0:x1].copy())


def crop_rotated(img: RasterImage, rect: RotatedRect) -> RasterImage:
    """Rectify the rotated rectangle by inverse rotation with bilinear
    sampling; samples outside the source image read as black.

    Output dimensions are (round(width), round(height)). At angle 0 the
    result is bit-identical to crop_axis_aligned of the equivalent box.
    """
    cx, cy = rect.center
    if not (0 <= cx < img.width and 0 <= cy < img.height):
        raise ImagingError(f"rect center {rect.center} outside image")
    out_w, out_h = iround(rect.width), iround(rect.height)
    if out_w < 1 or out_h < 1:
        raise GeometryError(f"degenerate rect: {rect}")
    theta = math.radians(rect.angle)
    ux, uy = math.cos(theta), math.sin(theta)  # width axis
    vx, vy = -uy, ux  # height axis

    jj, ii = np.meshgrid(np.arange(out_w), np.arange(out_h))
    u = jj + 0.5 - out_w / 2.0
    v = ii + 0.5 - out_h / 2.0
    sx = cx + u * ux + v * vx
    sy = cy + u * uy + v * vy

    # bilinear sample at continuous (sx, sy); pixel centers at (c+0.5, r+0.5)
    fx = sx - 0.5
    fy = sy - 0.5
    c0 = np.floor(fx).astype(np.int64)
    r0 = np.floor(fy).astype(np.int64)
    wx = fx - c0
    wy = fy - r0

    def sample(r, c):
        inside = (r >= 0) & (r < img.height) & (c >= 0) & (c < img.width)
        rc = np.clip(r, 0, img.height - 1)
        cc = np.clip(c, 0, img.width - 1)
        vals = img.pixels[rc, cc].astype(np.float64)
        vals[~inside] = 0.0
        return vals

    w00 = ((1 - wx) * (1 - wy))[:, :, np.newaxis]
    w01 = (wx * (1 - wy))[:, :, np.newaxis]
    w10 = ((1 - wx) * wy)[:, :, np.newaxis]
    w11 = (wx * wy)[:, :, np.newaxis]
    acc = (
        w00 * sample(r0, c0)
        + w01 * sample(r0, c0 + 1)
        + w10 * sample(r0 + 1, c0)
        + w11 * sample(r0 + 1, c0 + 1)
    )
    return RasterImage(np.clip(np.rint(acc), 0, 255).astype(np.uint8))


def crop_char_strip(
    img: RasterImage, label: str, side: str
) -> tuple[RasterImage, str]:
    """Remove one character's worth of pixels from the left or right edge.

    Strip width is round(image_width / label_length); characters are
    assumed uniformly wide since no per-character boxes exist. The new
    label drops the corresponding edge character and trims any whitespace
    this exposes (so a label with an interior space next to the cut can
    shrink by more than one character).
    """
    if side not in ("left", "right"):
        raise ImagingError(f"side must be 'left' or 'right', got {side!r}")
    if len(label) < 2:
        raise ImagingError("label must have at least 2 characters")
    strip = iround(img.width / len(label))
    if strip >= img.width:
        raise ImagingError(
            f"strip width {strip} would consume the whole {img.width}px image"
        )
    if side == "left":
        out = RasterImage(img.pixels[:, strip:].copy())
        new_label = label[1:].strip()
    else:
        out = RasterImage(img.pixels[:, : img.width - strip].copy())
        new_label = label[:-1].strip()
    return out, new_label
