"""Shared fixtures: libraries, synthetic corpora, reference helpers."""

from __future__ import annotations

import numpy as np
import pytest
from PIL import Image

from uwsynth.spectra import (
    CameraResponse,
    SpectralCurve,
    SpectralLibrary,
    WaterType,
    default_grid,
    default_library,
)


def make_camera(grid: np.ndarray, cam_id: str, mus=(600.0, 530.0, 460.0), sigma=35.0) -> CameraResponse:
    channels = {}
    for ch, mu in zip(("r", "g", "b"), mus):
        vals = np.exp(-0.5 * ((grid - mu) / sigma) ** 2)
        channels[ch] = SpectralCurve(grid, vals)
    return CameraResponse(id=cam_id, channels=channels)


def make_constant_library(beta0: float, n_cameras: int = 2) -> SpectralLibrary:
    """Library whose every water type has the flat spectrum beta(lam) = beta0."""
    grid = default_grid()
    return SpectralLibrary(
        grid=grid,
        attenuation={wt: SpectralCurve.constant(grid, beta0) for wt in WaterType},
        irradiance=SpectralCurve(grid, 1.2 + 0.4 * np.exp(-0.5 * ((grid - 520) / 120) ** 2)),
        cameras=[
            make_camera(grid, f"cam{idx}", mus=(600.0 - 3 * idx, 530.0 + 2 * idx, 460.0 + idx))
            for idx in range(n_cameras)
        ],
        reflectance=SpectralCurve.constant(grid, 1.0),
    )


@pytest.fixture(scope="session")
def library() -> SpectralLibrary:
    return default_library()


@pytest.fixture(scope="session")
def zero_library() -> SpectralLibrary:
    return make_constant_library(0.0)


def smooth_test_image(width: int, height: int, seed: int = 0) -> np.ndarray:
    """Deterministic indoor-scene stand-in, float in [0, 1].

    Gradients plus a coarse block mosaic and grain, so local contrast is in
    the range SSIM actually responds to (flat synthetic images hide almost
    any degradation behind the stabilizer constants).
    """
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    r = 0.25 + 0.5 * xx / max(width - 1, 1)
    g = 0.25 + 0.5 * yy / max(height - 1, 1)
    b = 0.4 + 0.3 * np.sin(2 * np.pi * xx / 64) * np.cos(2 * np.pi * yy / 48)
    img = np.stack([r, g, b], axis=-1)
    cy, cx = height // 2, width // 2
    mask = (yy - cy) ** 2 + (xx - cx) ** 2 < (min(width, height) / 4) ** 2
    img[mask] = [0.85, 0.75, 0.3]
    bh, bw = max(height // 16, 1), max(width // 16, 1)
    tones = rng.uniform(-0.35, 0.35, (height // bh + 1, width // bw + 1, 3))
    img += np.kron(tones, np.ones((bh, bw, 1)))[:height, :width, :]
    img += rng.normal(0.0, 0.12, img.shape)
    return np.clip(img, 0.0, 1.0)


def synthetic_raw_depth(width: int, height: int, seed: int = 0) -> np.ndarray:
    """Raw 16-bit-style depth shaped like a room: far wall, floor, objects.

    Most pixels sit near the far plane (as indoor RGB-D frames do), with a
    few nearer boxes, plus sparse dropout holes.
    """
    rng = np.random.default_rng(seed + 1)
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    far = 36000.0
    depth = np.full((height, width), far)
    floor = yy > 0.62 * height
    depth[floor] = far - (yy[floor] - 0.62 * height) / (0.38 * height + 1e-9) * 30000.0
    for _ in range(4):
        bx = int(rng.integers(0, max(width - width // 6, 1)))
        by = int(rng.integers(int(0.3 * height), max(height - height // 6, 1)))
        bw = int(width // 8 + rng.integers(0, width // 8 + 1))
        bh = int(height // 8 + rng.integers(0, height // 8 + 1))
        depth[by : by + bh, bx : bx + bw] = float(rng.uniform(4000.0, 20000.0))
    holes = rng.random((height, width)) < 0.002
    depth[holes] = 0.0
    return np.round(depth)


def write_corpus(corpus_dir, n_images: int, width: int, height: int, seed: int = 0) -> list:
    """Write a synthetic RGB-D corpus in the expected layout; returns ids."""
    rgb_dir = corpus_dir / "rgb"
    depth_dir = corpus_dir / "depth"
    rgb_dir.mkdir(parents=True, exist_ok=True)
    depth_dir.mkdir(parents=True, exist_ok=True)
    ids = []
    for i in range(n_images):
        image_id = f"img{i:03d}"
        rgb = smooth_test_image(width, height, seed=seed + i)
        depth = synthetic_raw_depth(width, height, seed=seed + i).astype(np.uint16)
        Image.fromarray((rgb * 255).round().astype(np.uint8)).save(rgb_dir / f"{image_id}.png")
        Image.fromarray(depth).save(depth_dir / f"{image_id}.png")
        ids.append(image_id)
    return ids
