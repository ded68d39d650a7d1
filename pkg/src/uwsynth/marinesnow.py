"""Marine-snow artifact layers.

Bright particulate artifacts come in two shapes: type H, a Gaussian blob
("highland"), and type V, a bright ring ("volcanic crater") as produced by
in-camera edge enhancement.  Particles are placed uniformly at random,
binned by their camera distance R, and each bin is rendered with its own
blur width and gain before the bins are summed.

Particle luminance versus distance follows a single-source forward-scatter
model: the irradiance of a particle at distance R reduces to

    E(R) = 2 * A * exp(-2 * beta * R) / R^2 * ((R - F_l) / R)^2

(`particle_irradiance`).  The renderer itself carries that dependence
through the per-bin (sigma, gain) tables, which is how the distance bins
were calibrated in the first place; the closed form is exposed for
validation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import signal

from . import _kernels
from .errors import CapacityError, ConfigError, ContractError, DomainError
from .images import require_same_extent

LUMA_SCALE = 255.0  # gain/threshold magnitudes in the config are 8-bit-scaled


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Round unit-sum Gaussian kernel, support radius ceil(3*sigma).

    The profile is shifted to reach zero exactly at the 3-sigma boundary.
    A hard truncation would leave a step that the edge-enhancement filter
    of the type-V path amplifies into a spurious ring.
    """
    if sigma <= 0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    r = int(np.ceil(3.0 * sigma))
    y, x = np.mgrid[-r : r + 1, -r : r + 1].astype(np.float64)
    k = np.exp(-(x * x + y * y) / (2.0 * sigma * sigma)) - np.exp(-4.5)
    np.maximum(k, 0.0, out=k)
    return k / k.sum()


def edge_enhance_kernel(sigma: float) -> np.ndarray:
    """Zero-sum Laplacian-of-Gaussian kernel (negative centre lobe).

    Convolving a blob with this kernel and rectifying the negative response
    leaves the bright rim where the blob's curvature flips sign, i.e. the
    crater morphology of type-V artifacts.
    """
    if sigma <= 0:
        raise DomainError(f"sigma must be positive, got {sigma}")
    r = max(1, int(np.ceil(3.0 * sigma)))
    y, x = np.mgrid[-r : r + 1, -r : r + 1].astype(np.float64)
    g = np.exp(-(x * x + y * y) / (2.0 * sigma * sigma))
    g /= g.sum()
    k = g * (x * x + y * y - 2.0 * sigma * sigma) / sigma**4
    return k - k.mean()


@dataclass(frozen=True)
class ScatterParams:
    """Merged constants of the single-source forward-scatter model."""

    A: float = 1.0
    focal_length_m: float = 0.05
    beta_c: float = 0.1
    psf: np.ndarray = field(default_factory=lambda: gaussian_kernel(1.0))

    def __post_init__(self):
        object.__setattr__(self, "psf", np.asarray(self.psf, dtype=np.float64))
        if self.A <= 0:
            raise DomainError(f"A must be positive, got {self.A}")
        if self.focal_length_m <= 0:
            raise DomainError(f"focal length must be positive, got {self.focal_length_m}")
        if self.beta_c < 0:
            raise DomainError(f"attenuation must be non-negative, got {self.beta_c}")
        if not np.isclose(self.psf.sum(), 1.0, rtol=0, atol=1e-9):
            raise DomainError("psf must be normalized to unit sum")


def particle_irradiance(R: float, params: ScatterParams) -> float:
    """Observed irradiance of one particle at camera distance ``R`` metres.

    The forward-scatter convolution of a point source with a unit-sum PSF
    contributes the same scalar as the direct term, hence the factor
    (1 + sum(psf)) = 2.
    """
    if R <= 0:
        raise DomainError(f"particle distance must be positive, got {R}")
    direct = params.A * np.exp(-2.0 * params.beta_c * R) / (R * R)
    geom = (R - params.focal_length_m) / R
    return float((1.0 + params.psf.sum()) * direct * geom * geom)


@dataclass(frozen=True)
class ParticleField:
    """Randomly placed particles of one kind with their camera distances."""

    xs: np.ndarray
    ys: np.ndarray
    rs: np.ndarray
    kind: str
    extent: tuple  # (width, height)

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=np.int64)
        ys = np.asarray(self.ys, dtype=np.int64)
        rs = np.asarray(self.rs, dtype=np.float64)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys)
        object.__setattr__(self, "rs", rs)
        if self.kind not in ("H", "V"):
            raise ContractError(f"particle kind must be 'H' or 'V', got {self.kind!r}")
        if not (xs.shape == ys.shape == rs.shape):
            raise ContractError("particle coordinate arrays must have equal length")
        w, h = self.extent
        if xs.size:
            if xs.min() < 0 or xs.max() >= w or ys.min() < 0 or ys.max() >= h:
                raise ContractError("particle coordinates out of image bounds")
            if rs.min() <= 0:
                raise ContractError("particle distances must be positive")
            if len({(int(x), int(y)) for x, y in zip(xs, ys)}) != xs.size:
                raise ContractError("duplicate particle pixel")

    def __len__(self) -> int:
        return int(self.xs.size)


def place_particles(
    rng: np.random.Generator,
    count: int,
    extent: tuple,
    r_range: tuple = (0.0, 256.0),
    kind: str = "H",
) -> ParticleField:
    """Place ``count`` particles uniformly over the image and over r_range.

    Pixel collisions are re-drawn so each particle occupies its own pixel.
    """
    w, h = int(extent[0]), int(extent[1])
    if count < 0:
        raise DomainError(f"count must be non-negative, got {count}")
    if count > w * h:
        raise CapacityError(f"cannot place {count} particles on a {w}x{h} image")
    lo, hi = r_range
    xs = np.empty(count, dtype=np.int64)
    ys = np.empty(count, dtype=np.int64)
    rs = np.empty(count, dtype=np.float64)
    seen = set()
    for i in range(count):
        while True:
            x = int(rng.integers(w))
            y = int(rng.integers(h))
            r = float(rng.uniform(lo, hi))
            if (x, y) not in seen and r > 0.0:
                break
        seen.add((x, y))
        xs[i], ys[i], rs[i] = x, y, r
    return ParticleField(xs=xs, ys=ys, rs=rs, kind=kind, extent=(w, h))


@dataclass(frozen=True)
class CountDistribution:
    """Gaussian particle-count model, rounded and clamped to >= 0."""

    h_mean: float = 40.0
    h_variance: float = 5.0
    v_mean: float = 30.0
    v_variance: float = 5.0


def sample_particle_counts(
    rng: np.random.Generator, dist: CountDistribution = CountDistribution()
) -> tuple:
    """Draw (n_H, n_V) particle counts; order of draws is fixed (H first)."""
    n_h = int(np.floor(rng.normal(dist.h_mean, np.sqrt(dist.h_variance)) + 0.5))
    n_v = int(np.floor(rng.normal(dist.v_mean, np.sqrt(dist.v_variance)) + 0.5))
    return max(n_h, 0), max(n_v, 0)


@dataclass(frozen=True)
class DistanceBins:
    """Per-distance-bin rendering parameters.

    ``upper_edges`` are the inclusive upper bin boundaries in metres (the
    implicit lower boundary of the first bin is 0); the last bin also
    absorbs anything beyond its edge.  Bin n covers (upper[n-1], upper[n]].
    """

    upper_edges: tuple = (64.0, 128.0, 192.0, 256.0)
    sigmas: tuple = (7.0, 5.0, 3.0, 3.0)
    gains: tuple = (80.0, 100.0, 150.0, 200.0)
    threshold: float = 80.0  # 8-bit luminance scale
    brightness: float = 1.0  # particle mask value D
    edge_sigma: float | None = None  # set for the type-V edge-enhancement pass

    def __post_init__(self):
        n = len(self.upper_edges)
        if n == 0:
            raise ConfigError("need at least one distance bin")
        if len(self.sigmas) != n or len(self.gains) != n:
            raise ConfigError("sigmas and gains must match the number of bins")
        if any(e1 >= e2 for e1, e2 in zip(self.upper_edges, self.upper_edges[1:])):
            raise ConfigError("bin edges must be strictly increasing")
        if self.upper_edges[0] <= 0:
            raise ConfigError("first bin edge must be positive")
        if any(s <= 0 for s in self.sigmas):
            raise ConfigError("bin sigmas must be positive")
        if self.threshold <= 0:
            raise ConfigError("threshold must be positive")

    @property
    def count(self) -> int:
        return len(self.upper_edges)

    @property
    def threshold_unit(self) -> float:
        return self.threshold / LUMA_SCALE

    def bin_index(self, r) -> np.ndarray:
        """Bin holding distance r: first bin whose upper edge >= r."""
        edges = np.asarray(self.upper_edges)
        return np.minimum(
            np.searchsorted(edges, np.asarray(r, dtype=np.float64), side="left"),
            self.count - 1,
        )


@dataclass(frozen=True)
class SparseMask:
    """Sparse per-bin particle mask: value D at particle pixels, 0 elsewhere."""

    xs: np.ndarray
    ys: np.ndarray
    value: float
    extent: tuple

    def to_dense(self) -> np.ndarray:
        w, h = self.extent
        out = np.zeros((h, w))
        out[self.ys, self.xs] = self.value
        return out

    def __len__(self) -> int:
        return int(self.xs.size)


@dataclass(frozen=True)
class SnowLayer:
    """Single-channel non-negative artifact layer."""

    values: np.ndarray
    kind: str

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))


def bin_particles(field: ParticleField, bins: DistanceBins) -> list:
    """Partition a particle field into per-bin sparse masks."""
    idx = bins.bin_index(field.rs)
    masks = []
    for n in range(bins.count):
        member = idx == n
        masks.append(
            SparseMask(
                xs=field.xs[member],
                ys=field.ys[member],
                value=bins.brightness,
                extent=field.extent,
            )
        )
    return masks


def _stamp(extent: tuple, mask: SparseMask, patch: np.ndarray) -> np.ndarray:
    w, h = extent
    layer = np.zeros((h, w))
    if len(mask):
        _kernels.accumulate_stamps(
            layer,
            np.ascontiguousarray(patch),
            np.ascontiguousarray(mask.xs, dtype=np.int64),
            np.ascontiguousarray(mask.ys, dtype=np.int64),
        )
    return layer


def render_type_h(masks: list, bins: DistanceBins) -> SnowLayer:
    """Blur each bin with its sigma, then gain with saturation at the knee.

    Per bin the blurred mask S_n maps to gain_n * min(S_n, threshold); the
    saturated value gain_n * threshold keeps the transfer continuous.
    """
    if len(masks) != bins.count:
        raise ContractError("mask list does not match bin count")
    extent = masks[0].extent
    thr = bins.threshold_unit
    layer = np.zeros((extent[1], extent[0]))
    for mask, sigma, gain in zip(masks, bins.sigmas, bins.gains):
        blurred = _stamp(extent, mask, mask.value * gaussian_kernel(sigma))
        layer += gain * np.minimum(blurred, thr)
    return SnowLayer(values=layer, kind="H")


def render_type_v(masks: list, bins: DistanceBins) -> SnowLayer:
    """Blur, gain, edge-enhance, rectify and saturate each bin.

    The Laplacian response of a blurred particle is negative over the blob
    core and positive on the surrounding annulus; rectification keeps only
    the bright rim.  Saturation caps the response at the threshold itself
    (the comparison variable is the output here, so continuity at the knee
    puts the cap at the threshold).
    """
    if bins.edge_sigma is None:
        raise ConfigError("type-V bins need edge_sigma for the enhancement kernel")
    if len(masks) != bins.count:
        raise ContractError("mask list does not match bin count")
    extent = masks[0].extent
    thr = bins.threshold_unit
    log_k = edge_enhance_kernel(bins.edge_sigma)
    layer = np.zeros((extent[1], extent[0]))
    for mask, sigma, gain in zip(masks, bins.sigmas, bins.gains):
        # one combined stamp per particle: LoG * (gain * D * gaussian)
        patch = signal.convolve2d(mask.value * gain * gaussian_kernel(sigma), log_k, mode="full")
        raw = _stamp(extent, mask, patch)
        np.maximum(raw, 0.0, out=raw)
        layer += np.minimum(raw, thr)
    return SnowLayer(values=layer, kind="V")


def composite(base: np.ndarray, h_layer: SnowLayer, v_layer: SnowLayer) -> np.ndarray:
    """Overlay both snow layers additively on every channel, clip to [0, 1]."""
    base = np.asarray(base, dtype=np.float64)
    if base.ndim != 3 or base.shape[2] != 3:
        raise ContractError("base image must be (H, W, 3)")
    require_same_extent(base, h_layer.values, "composite: type-H layer")
    require_same_extent(base, v_layer.values, "composite: type-V layer")
    overlay = h_layer.values + v_layer.values
    return np.clip(base + overlay[:, :, None], 0.0, 1.0)


@dataclass(frozen=True)
class SnowConfig:
    """Complete marine-snow configuration (distance bins and count model)."""

    h_bins: DistanceBins = DistanceBins(
        sigmas=(7.0, 5.0, 3.0, 3.0),
        gains=(80.0, 100.0, 150.0, 200.0),
        threshold=80.0,
    )
    v_bins: DistanceBins = DistanceBins(
        sigmas=(7.0, 5.0, 4.0, 4.0),
        gains=(70.0, 80.0, 120.0, 150.0),
        threshold=28.0,
        edge_sigma=0.2,
    )
    counts: CountDistribution = CountDistribution()
    r_max: float = 256.0

    @property
    def r_range(self) -> tuple:
        return (0.0, self.r_max)


def render_snow(
    rng: np.random.Generator, extent: tuple, config: SnowConfig = SnowConfig()
) -> tuple:
    """Sample counts and fields, render both layers.

    Returns (h_layer, v_layer, n_h, n_v).  Draw order: counts, H field,
    V field.
    """
    n_h, n_v = sample_particle_counts(rng, config.counts)
    field_h = place_particles(rng, n_h, extent, config.r_range, kind="H")
    field_v = place_particles(rng, n_v, extent, config.r_range, kind="V")
    h_layer = render_type_h(bin_particles(field_h, config.h_bins), config.h_bins)
    v_layer = render_type_v(bin_particles(field_v, config.v_bins), config.v_bins)
    return h_layer, v_layer, n_h, n_v
