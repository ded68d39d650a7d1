"""Image containers and 8-bit conversion rules.

Pixels are processed as float64 intensities in [0, 1].  8-bit data is
divided by 255 on ingest and quantized back with round-half-up on output;
no gamma linearization is applied, the observation model acts on stored
pixel values directly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError, IngestError


def to_unit_float(img8: np.ndarray) -> np.ndarray:
    """uint8 image -> float64 in [0, 1]."""
    return np.asarray(img8, dtype=np.float64) / 255.0


def to_uint8(img: np.ndarray) -> np.ndarray:
    """float image in [0, 1] -> uint8 with round-half-up ties."""
    scaled = np.clip(np.asarray(img, dtype=np.float64), 0.0, 1.0) * 255.0
    return np.floor(scaled + 0.5).astype(np.uint8)


@dataclass(frozen=True)
class RGBDImage:
    """A clean colour image paired with its raw per-pixel distance map.

    ``rgb`` is float64 (H, W, 3) in [0, 1]; ``raw_depth`` is float64 (H, W)
    in sensor units with 0 marking dropout holes.
    """

    id: str
    rgb: np.ndarray
    raw_depth: np.ndarray

    def __post_init__(self):
        rgb = np.asarray(self.rgb, dtype=np.float64)
        depth = np.asarray(self.raw_depth, dtype=np.float64)
        object.__setattr__(self, "rgb", rgb)
        object.__setattr__(self, "raw_depth", depth)
        if rgb.ndim != 3 or rgb.shape[2] != 3:
            raise IngestError(f"image {self.id!r}: rgb must be (H, W, 3)")
        if depth.shape != rgb.shape[:2]:
            raise IngestError(
                f"image {self.id!r}: rgb extent {rgb.shape[:2]} does not match "
                f"depth extent {depth.shape}"
            )

    @property
    def extent(self) -> tuple:
        """(width, height) in pixels."""
        return (self.rgb.shape[1], self.rgb.shape[0])


def require_same_extent(a: np.ndarray, b: np.ndarray, what: str) -> None:
    if a.shape[:2] != b.shape[:2]:
        raise ContractError(f"{what}: extents differ ({a.shape[:2]} vs {b.shape[:2]})")
