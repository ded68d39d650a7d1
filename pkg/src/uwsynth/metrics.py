"""Full-reference quality metrics for verifying generated pairs.

PSNR uses a fixed peak of 255 so numbers are comparable across internal
representations.  SSIM is the reference parameterization: Gaussian-weighted
11x11 window with sigma 1.5, stabilizers from the 8-bit dynamic range, mean
over valid window positions.  Colour images score as the mean of the three
per-channel SSIMs: the dominant underwater degradation is a per-channel
transmission collapse that a luma projection would largely average away.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image
from scipy import signal

from .errors import ContractError
from .pipeline import PairManifest

PSNR_PEAK = 255.0

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_C1 = (0.01 * PSNR_PEAK) ** 2
SSIM_C2 = (0.03 * PSNR_PEAK) ** 2


def _as_float(img: np.ndarray) -> np.ndarray:
    """Image on the 0-255 scale as float64 (uint8 is converted, floats passed)."""
    return np.asarray(img, dtype=np.float64)


def _check_pair(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ContractError(f"image shapes differ: {a.shape} vs {b.shape}")


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB; +inf for identical images."""
    a = _as_float(a)
    b = _as_float(b)
    _check_pair(a, b)
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(PSNR_PEAK * PSNR_PEAK / mse)


def _ssim_window() -> np.ndarray:
    r = SSIM_WINDOW // 2
    y, x = np.mgrid[-r : r + 1, -r : r + 1].astype(np.float64)
    k = np.exp(-(x * x + y * y) / (2.0 * SSIM_SIGMA * SSIM_SIGMA))
    return k / k.sum()


def _ssim_single(x: np.ndarray, y: np.ndarray) -> float:
    if min(x.shape) < SSIM_WINDOW:
        raise ContractError(
            f"image {x.shape} is smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} SSIM window"
        )
    w = _ssim_window()

    def filt(img):
        return signal.fftconvolve(img, w, mode="valid")

    mu_x = filt(x)
    mu_y = filt(y)
    xx = filt(x * x) - mu_x * mu_x
    yy = filt(y * y) - mu_y * mu_y
    xy = filt(x * y) - mu_x * mu_y
    num = (2.0 * mu_x * mu_y + SSIM_C1) * (2.0 * xy + SSIM_C2)
    den = (mu_x * mu_x + mu_y * mu_y + SSIM_C1) * (xx + yy + SSIM_C2)
    return float(np.mean(num / den))


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Mean structural similarity (per-channel mean for colour images)."""
    a = _as_float(a)
    b = _as_float(b)
    _check_pair(a, b)
    if a.ndim == 2:
        return _ssim_single(a, b)
    if a.ndim == 3 and a.shape[2] == 3:
        return float(np.mean([_ssim_single(a[:, :, c], b[:, :, c]) for c in range(3)]))
    raise ContractError(f"expected (H, W) or (H, W, 3) image, got shape {a.shape}")


@dataclass(frozen=True)
class PairMetrics:
    pair_id: str
    psnr_db: float
    ssim: float


@dataclass(frozen=True)
class MetricReport:
    """Per-pair metrics plus aggregates; pairs ordered by id."""

    pairs: tuple
    errors: tuple  # (pair_id, message) for pairs excluded from the means

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(self.pairs))
        object.__setattr__(self, "errors", tuple(self.errors))

    @property
    def mean_psnr_db(self) -> float | None:
        if not self.pairs:
            return None
        return float(np.mean([p.psnr_db for p in self.pairs]))

    @property
    def mean_ssim(self) -> float | None:
        if not self.pairs:
            return None
        return float(np.mean([p.ssim for p in self.pairs]))

    def to_json(self) -> str:
        return json.dumps(
            {
                "pairs": [
                    {"id": p.pair_id, "psnr_db": p.psnr_db, "ssim": p.ssim}
                    for p in self.pairs
                ],
                "errors": [{"id": pid, "message": msg} for pid, msg in self.errors],
                "mean_psnr_db": self.mean_psnr_db,
                "mean_ssim": self.mean_ssim,
                "pair_count": len(self.pairs),
                "error_count": len(self.errors),
            },
            sort_keys=True,
        )

    def to_text(self) -> str:
        lines = [f"{'pair':<32} {'psnr_db':>10} {'ssim':>8}"]
        for p in self.pairs:
            lines.append(f"{p.pair_id:<32} {p.psnr_db:>10.3f} {p.ssim:>8.4f}")
        if self.pairs:
            lines.append(
                f"{'mean':<32} {self.mean_psnr_db:>10.3f} {self.mean_ssim:>8.4f}"
            )
        else:
            lines.append("mean: undefined (no pairs evaluated)")
        for pid, msg in self.errors:
            lines.append(f"error: {pid}: {msg}")
        return "\n".join(lines) + "\n"


def _load_u8(path: Path) -> np.ndarray:
    with Image.open(path) as img:
        return np.asarray(img.convert("RGB"), dtype=np.uint8)


def evaluate_pairs(manifest: PairManifest, base_dir=".") -> MetricReport:
    """PSNR/SSIM for every manifest pair; unreadable pairs go to errors."""
    base_dir = Path(base_dir)
    pairs = []
    errors = []
    for row in sorted(manifest, key=lambda r: r.id):
        try:
            clean = _load_u8(base_dir / row.clean_path)
            degraded = _load_u8(base_dir / row.degraded_path)
            pairs.append(
                PairMetrics(
                    pair_id=row.id,
                    psnr_db=psnr(clean, degraded),
                    ssim=ssim(clean, degraded),
                )
            )
        except (OSError, ContractError) as exc:
            errors.append((row.id, str(exc)))
    return MetricReport(pairs=pairs, errors=errors)
