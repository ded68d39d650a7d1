"""8-bit conversion rules and the RGB-D container."""

from __future__ import annotations

import numpy as np
import pytest

from uwsynth.errors import IngestError
from uwsynth.images import RGBDImage, to_uint8, to_unit_float


def test_uint8_roundtrip_is_exact():
    values = np.arange(256, dtype=np.uint8).reshape(16, 16)
    assert np.array_equal(to_uint8(to_unit_float(values)), values)


def test_ties_round_up():
    # 0.5/255 and 254.5/255 are exact ties after scaling
    assert to_uint8(np.array([0.5 / 255.0]))[0] == 1
    assert to_uint8(np.array([254.5 / 255.0]))[0] == 255


def test_out_of_range_clipped():
    out = to_uint8(np.array([-0.2, 0.0, 1.0, 1.7]))
    assert out.tolist() == [0, 0, 255, 255]


def test_rgbd_extent_checks():
    rgb = np.zeros((4, 6, 3))
    with pytest.raises(IngestError):
        RGBDImage(id="x", rgb=rgb, raw_depth=np.zeros((4, 5)))
    with pytest.raises(IngestError):
        RGBDImage(id="x", rgb=np.zeros((4, 6)), raw_depth=np.zeros((4, 6)))
    img = RGBDImage(id="x", rgb=rgb, raw_depth=np.ones((4, 6)))
    assert img.extent == (6, 4)
