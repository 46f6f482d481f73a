from __future__ import annotations

import numpy as np
import pytest

from strkit.geometry import AABB, GeometryError, RotatedRect
from strkit.imaging import (
    ImagingError,
    RasterImage,
    crop_axis_aligned,
    crop_char_strip,
    crop_rotated,
    read_image,
    read_pgm,
    write_pgm,
    write_png,
)


def gradient_image(h: int = 10, w: int = 10) -> RasterImage:
    rows = np.arange(h, dtype=np.uint8)[:, None] * 10
    cols = np.arange(w, dtype=np.uint8)[None, :]
    return RasterImage((rows + cols).astype(np.uint8))


def checkerboard(h: int = 64, w: int = 64, cell: int = 8) -> RasterImage:
    rr, cc = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    board = (((rr // cell) + (cc // cell)) % 2 * 255).astype(np.uint8)
    return RasterImage(board)


# --- crop_axis_aligned -------------------------------------------------------


def test_axis_crop_full_image_is_identity():
    img = gradient_image()
    out = crop_axis_aligned(img, AABB(0, 0, 10, 10))
    assert np.array_equal(out.pixels, img.pixels)


def test_axis_crop_clamps_at_edges():
    img = gradient_image()
    out = crop_axis_aligned(img, AABB(5, 5, 20, 8))
    assert (out.width, out.height) == (5, 3)
    assert np.array_equal(out.pixels, img.pixels[5:8, 5:10])


def test_axis_crop_gradient_fixture_direct_index_oracle():
    img = gradient_image()
    out = crop_axis_aligned(img, AABB(1, 1, 3, 3))
    assert out.pixels[:, :, 0].tolist() == [[11, 12], [21, 22]]


def test_axis_crop_entirely_outside_raises():
    with pytest.raises(ImagingError):
        crop_axis_aligned(gradient_image(), AABB(50, 50, 60, 60))


def test_axis_crop_output_area_bounded():
    img = gradient_image(20, 30)
    out = crop_axis_aligned(img, AABB(-5, 3, 12.4, 40))
    assert out.width * out.height <= img.width * img.height


# --- crop_rotated ------------------------------------------------------------


def test_rotated_zero_angle_bit_identical_to_axis_crop():
    img = gradient_image(12, 16)
    box = AABB(3, 2, 11, 9)
    rect = RotatedRect(((3 + 11) / 2, (2 + 9) / 2), 8, 7, 0.0)
    axis = crop_axis_aligned(img, box)
    rot = crop_rotated(img, rect)
    assert np.array_equal(axis.pixels, rot.pixels)


def test_rotated_90_matches_rot90_oracle():
    rng = np.random.default_rng(5)
    img = RasterImage(rng.integers(0, 255, (30, 30), dtype=np.uint8))
    # rect centered at the pixel-grid point (15, 15): width spans 12 along +y
    rect = RotatedRect((15.0, 15.0), 12, 8, 90.0)
    out = crop_rotated(img, rect)
    # width axis (0,1), height axis (-1,0): source row = 9+j, col = 18-i
    sub = img.pixels[9:21, 11:19]
    oracle = np.rot90(sub, 1)
    assert out.pixels.shape == oracle.shape
    diff = np.abs(out.pixels.astype(int) - oracle.astype(int))
    assert diff.max() <= 1


def test_rotated_45_checkerboard_matches_scipy_oracle():
    from scipy import ndimage

    img = checkerboard(64, 64, 8)
    rect = RotatedRect((32.0, 32.0), 24, 16, 45.0)
    out = crop_rotated(img, rect)
    # rotate the whole image by -45 about its center, then axis-crop the
    # centered box; both paths sample the same continuous points bilinearly
    rotated = ndimage.rotate(
        img.pixels[:, :, 0].astype(np.float64),
        45.0,
        reshape=False,
        order=1,
        mode="constant",
        cval=0.0,
    )
    cx = cy = 32
    oracle = rotated[cy - 8 : cy + 8, cx - 12 : cx + 12]
    diff = np.abs(out.pixels[:, :, 0].astype(np.float64) - oracle)
    assert (diff <= 1.0).mean() >= 0.99


def test_rotated_center_outside_raises():
    with pytest.raises(ImagingError):
        crop_rotated(gradient_image(), RotatedRect((50, 50), 4, 3, 0.0))


def test_rotated_degenerate_rect_raises():
    with pytest.raises(GeometryError):
        crop_rotated(gradient_image(), RotatedRect((5, 5), 0.3, 0.2, 0.0))


def test_rotated_out_of_bounds_samples_black():
    img = RasterImage(np.full((10, 10), 200, dtype=np.uint8))
    rect = RotatedRect((1.0, 1.0), 8, 8, 45.0)
    out = crop_rotated(img, rect)
    assert out.pixels.min() == 0  # corners fall outside the source


def test_rotated_determinism():
    img = checkerboard()
    rect = RotatedRect((32, 32), 20, 10, 30.0)
    a = crop_rotated(img, rect)
    b = crop_rotated(img, rect)
    assert np.array_equal(a.pixels, b.pixels)


# --- crop_char_strip ---------------------------------------------------------


def test_char_strip_left_hello():
    img = gradient_image(10, 100)
    out, label = crop_char_strip(img, "HELLO", "left")
    assert label == "ELLO"
    assert out.width == 80
    assert np.array_equal(out.pixels, img.pixels[:, 20:])


def test_char_strip_right_ab():
    img = gradient_image(10, 50)
    out, label = crop_char_strip(img, "AB", "right")
    assert label == "A"
    assert out.width == 25
    assert np.array_equal(out.pixels, img.pixels[:, :25])


def test_char_strip_single_char_raises():
    with pytest.raises(ImagingError):
        crop_char_strip(gradient_image(), "A", "left")


def test_char_strip_trims_exposed_whitespace():
    img = gradient_image(10, 30)
    _, label = crop_char_strip(img, "A B", "left")
    assert label == "B"


def test_char_strip_shortens_label_by_one():
    img = gradient_image(10, 60)
    for label in ("HELLO", "ab", "X9K42", "Market"):
        for side in ("left", "right"):
            _, new_label = crop_char_strip(img, label, side)
            assert len(new_label) == len(label) - 1


# --- formats -----------------------------------------------------------------


def test_pgm_round_trip(tmp_path):
    img = gradient_image(4, 6)
    path = tmp_path / "fix.pgm"
    write_pgm(img, path)
    back = read_pgm(path)
    assert np.array_equal(back.pixels, img.pixels)


def test_pgm_hand_fixture(tmp_path):
    path = tmp_path / "hand.pgm"
    path.write_text("P2\n# comment\n2 2\n255\n0 64\n128 255\n")
    img = read_pgm(path)
    assert img.pixels[:, :, 0].tolist() == [[0, 64], [128, 255]]


def test_png_round_trip(tmp_path):
    img = gradient_image(8, 5)
    path = tmp_path / "img.png"
    write_png(img, path)
    back = read_image(path)
    assert np.array_equal(back.pixels, img.pixels)


def test_png_rgb_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    img = RasterImage(rng.integers(0, 255, (6, 7, 3), dtype=np.uint8))
    path = tmp_path / "rgb.png"
    write_png(img, path)
    assert np.array_equal(read_image(path).pixels, img.pixels)


def test_jpeg_read(tmp_path):
    from PIL import Image

    rng = np.random.default_rng(2)
    arr = rng.integers(0, 255, (16, 24, 3), dtype=np.uint8)
    path = tmp_path / "img.jpg"
    Image.fromarray(arr).save(path, format="JPEG", quality=95)
    img = read_image(path)
    assert (img.height, img.width, img.channels) == (16, 24, 3)


def test_raster_image_validates_buffer():
    with pytest.raises(ImagingError):
        RasterImage(np.zeros((4, 4), dtype=np.float32))
    with pytest.raises(ImagingError):
        RasterImage(np.zeros((4, 4, 2), dtype=np.uint8))
