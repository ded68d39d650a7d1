"""Wavelength-resolved data and per-channel effective attenuation.

The observation model needs one scalar attenuation coefficient per colour
channel.  It is obtained by integrating the water attenuation spectrum
against the camera response, surface reflectance and illumination over the
visible band (400-700 nm):

    beta_vert(d)      = ln( I(0) / I(d) ) / d
    beta_horiz(dv,dh) = ln( I(dv) / I(dv+dh) ) / dh

where I(t) = integral of SR(lam) * rho(lam) * Theta0(lam) * exp(-beta(lam) t).

All curves are resampled onto a common wavelength grid at load time and are
treated as piecewise-linear between grid nodes.  Integrals use a composite
8-point Gauss-Legendre rule per grid segment: at optical depths beta*t of a
few units the integrand curves strongly *inside* a 10 nm segment, and a
node-level trapezoid rule is three orders of magnitude too coarse for the
accuracy this module guarantees.
"""

from __future__ import annotations

import csv
import enum
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DomainError, SpectralDataError, UnknownIdentifierError, ContractError

BAND_MIN_NM = 400.0
BAND_MAX_NM = 700.0
DEFAULT_GRID_STEP_NM = 10.0

CHANNELS = ("r", "g", "b")

_EXCLUDED_TYPES = ("5C", "7C", "9C")


class WaterType(enum.Enum):
    """The seven optical water classes retained by the synthesizer.

    The three most turbid coastal classes (5C, 7C, 9C) are rejected at parse
    time: scenes are essentially opaque in those waters.
    """

    I = "I"
    IA = "IA"
    IB = "IB"
    II = "II"
    III = "III"
    C1 = "1C"
    C3 = "3C"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def from_string(cls, name: str) -> "WaterType":
        token = name.strip().upper()
        for wt in cls:
            if wt.value == token:
                return wt
        if token in _EXCLUDED_TYPES:
            raise SpectralDataError(
                f"water type {name!r} is excluded (scenes are nearly opaque in "
                f"{token}); supported types: {', '.join(w.value for w in cls)}"
            )
        raise UnknownIdentifierError(
            f"unknown water type {name!r}; supported types: "
            f"{', '.join(w.value for w in cls)}"
        )


def default_grid(step_nm: float = DEFAULT_GRID_STEP_NM) -> np.ndarray:
    """Common wavelength grid over the visible band."""
    if step_nm <= 0:
        raise DomainError(f"grid step must be positive, got {step_nm}")
    n = int(round((BAND_MAX_NM - BAND_MIN_NM) / step_nm))
    if not math.isclose(BAND_MIN_NM + n * step_nm, BAND_MAX_NM, rel_tol=0, abs_tol=1e-9):
        raise DomainError(f"grid step {step_nm} does not divide the 400-700 nm band")
    return BAND_MIN_NM + step_nm * np.arange(n + 1)


@dataclass(frozen=True)
class SpectralCurve:
    """A sampled function of wavelength, piecewise-linear between samples."""

    wavelengths_nm: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        wl = np.asarray(self.wavelengths_nm, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "wavelengths_nm", wl)
        object.__setattr__(self, "values", vals)
        if wl.ndim != 1 or vals.shape != wl.shape:
            raise SpectralDataError("wavelengths and values must be 1-D and equally long")
        if wl.size < 2:
            raise SpectralDataError("a spectral curve needs at least 2 samples")
        if not np.all(np.isfinite(wl)) or not np.all(np.isfinite(vals)):
            raise SpectralDataError("spectral samples must be finite")
        diffs = np.diff(wl)
        if np.any(diffs <= 0):
            row = int(np.argmax(diffs <= 0)) + 2
            raise SpectralDataError(f"wavelengths must be strictly increasing (row {row})")

    @classmethod
    def constant(cls, grid: np.ndarray, value: float) -> "SpectralCurve":
        return cls(np.asarray(grid, dtype=float), np.full(len(grid), float(value)))

    def resample(self, grid: np.ndarray) -> "SpectralCurve":
        """Linearly resample onto ``grid``; identity if already on it."""
        grid = np.asarray(grid, dtype=float)
        if np.array_equal(self.wavelengths_nm, grid):
            return self
        return SpectralCurve(grid, np.interp(grid, self.wavelengths_nm, self.values))

    def on_grid(self, grid: np.ndarray) -> bool:
        return np.array_equal(self.wavelengths_nm, np.asarray(grid, dtype=float))


@dataclass(frozen=True)
class CameraResponse:
    """Per-channel spectral sensitivity of one camera."""

    id: str
    channels: dict  # {"r"|"g"|"b": SpectralCurve}

    def __post_init__(self):
        if set(self.channels) != set(CHANNELS):
            raise SpectralDataError(f"camera {self.id!r} must define r, g and b channels")
        grids = [self.channels[c].wavelengths_nm for c in CHANNELS]
        if not all(np.array_equal(grids[0], g) for g in grids[1:]):
            raise SpectralDataError(f"camera {self.id!r} channels must share one grid")


@dataclass(frozen=True)
class SpectralLibrary:
    """All spectral inputs resampled onto one wavelength grid."""

    grid: np.ndarray
    attenuation: dict  # {WaterType: SpectralCurve}
    irradiance: SpectralCurve
    cameras: tuple  # tuple[CameraResponse, ...]
    reflectance: SpectralCurve
    _quad: "_GridQuadrature" = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        missing = [wt.value for wt in WaterType if wt not in self.attenuation]
        if missing:
            raise SpectralDataError(f"attenuation data missing water type(s): {', '.join(missing)}")
        if not self.cameras:
            raise SpectralDataError("library needs at least one camera response")
        for wt, curve in self.attenuation.items():
            if np.any(curve.values < 0):
                raise SpectralDataError(f"attenuation for type {wt.value} has negative values")
        object.__setattr__(self, "cameras", tuple(self.cameras))
        object.__setattr__(self, "_quad", _GridQuadrature(self.grid))

    @property
    def camera_ids(self) -> tuple:
        return tuple(cam.id for cam in self.cameras)

    def camera(self, camera_id: str) -> CameraResponse:
        for cam in self.cameras:
            if cam.id == camera_id:
                return cam
        raise UnknownIdentifierError(
            f"unknown camera {camera_id!r}; available: {', '.join(self.camera_ids)}"
        )


class _GridQuadrature:
    """Composite Gauss-Legendre rule over the segments of a wavelength grid.

    Factors are evaluated at the quadrature nodes from their linear
    interpolants, so products of curves are integrated as the true product
    function rather than a re-linearized one.
    """

    ORDER = 8

    def __init__(self, grid: np.ndarray):
        grid = np.asarray(grid, dtype=float)
        x, w = np.polynomial.legendre.leggauss(self.ORDER)
        h = np.diff(grid)
        self.grid = grid
        self.node_frac = 0.5 * (x + 1.0)                   # position within segment
        self.node_weights = 0.5 * h[:, None] * w[None, :]  # (segments, order)

    def nodes(self, values: np.ndarray) -> np.ndarray:
        """Evaluate a curve's linear interpolant at all quadrature nodes."""
        left = values[:-1, None]
        right = values[1:, None]
        return left + (right - left) * self.node_frac[None, :]

    def integrate(self, node_values: np.ndarray) -> float:
        return float(np.sum(self.node_weights * node_values))


def product_integral(
    factors: Sequence[SpectralCurve],
    pointwise_exponent_curve: SpectralCurve | None = None,
    exponent_scale: float = 0.0,
) -> float:
    """Integrate the product of curves, optionally times exp(scale * curve).

    Computes  integral over [400, 700] nm of
    (prod_i factors_i)(lam) * exp(exponent_scale * exponent_curve(lam)) dlam
    with all curves on one shared grid.
    """
    if not factors:
        raise ContractError("product_integral needs at least one factor")
    grid = factors[0].wavelengths_nm
    for f in factors[1:]:
        if not f.on_grid(grid):
            raise ContractError("all factor curves must share the same wavelength grid")
    quad = _GridQuadrature(grid)
    prod = quad.nodes(factors[0].values).copy()
    for f in factors[1:]:
        prod *= quad.nodes(f.values)
    if pointwise_exponent_curve is not None:
        if not pointwise_exponent_curve.on_grid(grid):
            raise ContractError("exponent curve must share the factors' wavelength grid")
        prod *= np.exp(exponent_scale * quad.nodes(pointwise_exponent_curve.values))
    return quad.integrate(prod)


def _channel_factor_nodes(
    library: SpectralLibrary, camera: CameraResponse, channel: str
) -> np.ndarray:
    if channel not in CHANNELS:
        raise ContractError(f"channel must be one of {CHANNELS}, got {channel!r}")
    quad = library._quad
    nodes = quad.nodes(camera.channels[channel].values).copy()
    nodes *= quad.nodes(library.reflectance.values)
    nodes *= quad.nodes(library.irradiance.values)
    return nodes


def attenuated_band_integrals(
    library: SpectralLibrary,
    water_type: WaterType,
    camera: CameraResponse,
    depths: np.ndarray,
) -> np.ndarray:
    """I_c(t) = integral SR_c * rho * Theta0 * exp(-beta(lam) * t), vectorized.

    Returns an array of shape (len(depths), 3) ordered (r, g, b).  This is
    the shared building block of both effective-attenuation operations and
    of the per-image distance lookup tables.
    """
    depths = np.asarray(depths, dtype=float)
    quad = library._quad
    beta_nodes = quad.nodes(library.attenuation[water_type].values).ravel()
    weights = quad.node_weights.ravel()
    att = np.exp(-np.multiply.outer(depths, beta_nodes))  # (n, segments*order)
    out = np.empty(depths.shape + (3,))
    for k, ch in enumerate(CHANNELS):
        f = _channel_factor_nodes(library, camera, ch).ravel()
        out[..., k] = att @ (weights * f)
    return out


def effective_beta_vert(
    library: SpectralLibrary,
    water_type: WaterType,
    camera: CameraResponse,
    channel: str,
    d_vert: float,
) -> float:
    """Per-channel attenuation (1/m) over a vertical path of ``d_vert`` metres."""
    if d_vert <= 0:
        raise DomainError(f"d_vert must be positive, got {d_vert}")
    quad = library._quad
    f = _channel_factor_nodes(library, camera, channel)
    beta = quad.nodes(library.attenuation[water_type].values)
    num = quad.integrate(f)
    den = quad.integrate(f * np.exp(-d_vert * beta))
    if num <= 0 or den <= 0:
        raise DomainError(
            f"degenerate spectra: band integral is non-positive for channel {channel!r}"
        )
    return math.log(num / den) / d_vert


def effective_beta_horiz(
    library: SpectralLibrary,
    water_type: WaterType,
    camera: CameraResponse,
    channel: str,
    d_vert: float,
    d_horiz: float,
) -> float:
    """Per-channel attenuation (1/m) along the camera-to-scene path."""
    if d_vert < 0:
        raise DomainError(f"d_vert must be non-negative, got {d_vert}")
    if d_horiz <= 0:
        raise DomainError(f"d_horiz must be positive, got {d_horiz}")
    quad = library._quad
    f = _channel_factor_nodes(library, camera, channel)
    beta = quad.nodes(library.attenuation[water_type].values)
    num = quad.integrate(f * np.exp(-d_vert * beta))
    den = quad.integrate(f * np.exp(-(d_vert + d_horiz) * beta))
    if num <= 0 or den <= 0:
        raise DomainError(
            f"degenerate spectra: band integral is non-positive for channel {channel!r}"
        )
    return math.log(num / den) / d_horiz


# ---------------------------------------------------------------------------
# CSV loading
# ---------------------------------------------------------------------------

_ATTENUATION_HEADER = ("wavelength_nm", "I", "IA", "IB", "II", "III", "1C", "3C")


def _read_rows(path) -> tuple:
    path = Path(path)
    if not path.exists():
        raise SpectralDataError(f"spectral data file not found: {path}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SpectralDataError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        rows = []
        for i, row in enumerate(reader, start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise SpectralDataError(f"{path}: row {i} has {len(row)} fields, expected {len(header)}")
            try:
                rows.append([float(c) for c in row])
            except ValueError as exc:
                raise SpectralDataError(f"{path}: row {i}: {exc}") from None
    if len(rows) < 2:
        raise SpectralDataError(f"{path}: need at least 2 data rows")
    return header, np.asarray(rows, dtype=float)


def _column_curve(path, data: np.ndarray, col: int) -> SpectralCurve:
    wl = data[:, 0]
    diffs = np.diff(wl)
    if np.any(diffs <= 0):
        row = int(np.argmax(diffs <= 0)) + 2
        raise SpectralDataError(f"{path}: wavelengths not strictly increasing at row {row}")
    return SpectralCurve(wl, data[:, col])


def load_attenuation(path, grid: np.ndarray) -> dict:
    header, data = _read_rows(path)
    if header[0] != "wavelength_nm":
        raise SpectralDataError(f"{path}: first column must be 'wavelength_nm'")
    curves = {}
    for col, name in enumerate(header[1:], start=1):
        wt = WaterType.from_string(name)  # rejects 5C/7C/9C with a parse error
        curves[wt] = _column_curve(path, data, col).resample(grid)
    missing = [wt.value for wt in WaterType if wt not in curves]
    if missing:
        raise SpectralDataError(f"{path}: missing water type(s): {', '.join(missing)}")
    for wt, curve in curves.items():
        if np.any(curve.values < 0):
            raise SpectralDataError(f"{path}: negative attenuation for type {wt.value}")
    return curves


def load_irradiance(path, grid: np.ndarray) -> SpectralCurve:
    header, data = _read_rows(path)
    if header != ["wavelength_nm", "irradiance"]:
        raise SpectralDataError(f"{path}: header must be 'wavelength_nm,irradiance'")
    return _column_curve(path, data, 1).resample(grid)


def load_camera(path, grid: np.ndarray) -> CameraResponse:
    path = Path(path)
    header, data = _read_rows(path)
    if header != ["wavelength_nm", "r", "g", "b"]:
        raise SpectralDataError(f"{path}: header must be 'wavelength_nm,r,g,b'")
    # attenuation data only covers the visible band; drop out-of-band samples
    in_band = (data[:, 0] >= BAND_MIN_NM) & (data[:, 0] <= BAND_MAX_NM)
    if np.count_nonzero(in_band) < 2:
        raise SpectralDataError(f"{path}: fewer than 2 samples inside 400-700 nm")
    data = data[in_band]
    channels = {
        ch: _column_curve(path, data, col).resample(grid)
        for col, ch in enumerate(CHANNELS, start=1)
    }
    return CameraResponse(id=path.stem, channels=channels)


def load_library(
    attenuation_path,
    irradiance_path,
    cameras_path,
    reflectance_path=None,
    grid_step_nm: float = DEFAULT_GRID_STEP_NM,
) -> SpectralLibrary:
    """Load a complete spectral library from CSV files.

    ``cameras_path`` is a directory; every ``*.csv`` in it becomes one camera
    whose id is the file stem.  Reflectance defaults to the constant 1 curve.
    """
    grid = default_grid(grid_step_nm)
    attenuation = load_attenuation(attenuation_path, grid)
    irradiance = load_irradiance(irradiance_path, grid)
    cameras_dir = Path(cameras_path)
    if not cameras_dir.is_dir():
        raise SpectralDataError(f"camera directory not found: {cameras_dir}")
    cameras = [load_camera(p, grid) for p in sorted(cameras_dir.glob("*.csv"))]
    if not cameras:
        raise SpectralDataError(f"no camera CSV files in {cameras_dir}")
    if reflectance_path is not None:
        header, data = _read_rows(reflectance_path)
        if header != ["wavelength_nm", "reflectance"]:
            raise SpectralDataError(
                f"{reflectance_path}: header must be 'wavelength_nm,reflectance'"
            )
        reflectance = _column_curve(reflectance_path, data, 1).resample(grid)
    else:
        reflectance = SpectralCurve.constant(grid, 1.0)
    return SpectralLibrary(
        grid=grid,
        attenuation=attenuation,
        irradiance=irradiance,
        cameras=cameras,
        reflectance=reflectance,
    )


def bundled_data_dir() -> Path:
    """Directory holding the shipped spectral CSVs.

    The ``UWSYNTH_DATA_DIR`` environment variable overrides the bundled data;
    it must follow the same layout (attenuation_jerlov.csv,
    irradiance_solar.csv, cameras/*.csv).
    """
    override = os.environ.get("UWSYNTH_DATA_DIR")
    if override:
        return Path(override)
    return Path(__file__).parent / "data"


def default_library(grid_step_nm: float = DEFAULT_GRID_STEP_NM) -> SpectralLibrary:
    data_dir = bundled_data_dir()
    return load_library(
        data_dir / "attenuation_jerlov.csv",
        data_dir / "irradiance_solar.csv",
        data_dir / "cameras",
        grid_step_nm=grid_step_nm,
    )
