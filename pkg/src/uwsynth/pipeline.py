"""End-to-end paired dataset generation.

Corpus layout (input):   <corpus>/rgb/<id>.png   8-bit, 3-channel
                         <corpus>/depth/<id>.png 16-bit, 1-channel
Output layout:           <out>/clean/<id>.png
                         <out>/degraded/<id>_<watertype>.png
                         <out>/manifest.jsonl

Every pair is produced from a seed derived by hashing
(master_seed, image id, water type), so results do not depend on worker
count or processing order, and interrupted runs can resume by skipping
pairs whose files already verify.
"""

from __future__ import annotations

import hashlib
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from PIL import Image

from .colorshift import (
    ALL_WATER_TYPES,
    ColorShiftConfig,
    apply_color_shift,
    normalize_depth,
    sample_scene_params,
)
from .errors import ConfigError, IngestError, ManifestError, UwsynthError
from .images import RGBDImage, to_uint8, to_unit_float
from .marinesnow import (
    CountDistribution,
    SnowConfig,
    composite,
    render_snow,
    sample_particle_counts,
)
from .spectra import SpectralLibrary, WaterType, default_library

MANIFEST_NAME = "manifest.jsonl"
MANIFEST_VERSION = 1

POLICY_ALL_SEVEN = "all-seven"
POLICY_RANDOM_ONE = "random-one"


class OutputError(UwsynthError):
    """Output directory cannot be prepared or written."""

    category = "io"


@dataclass(frozen=True)
class GenerationConfig:
    """Everything that determines a dataset apart from the corpus itself."""

    master_seed: int = 0
    water_type_policy: str = POLICY_RANDOM_ONE
    width: int = 1344
    height: int = 756
    color_shift: ColorShiftConfig = ColorShiftConfig()
    snow: SnowConfig = SnowConfig()

    def validate(self) -> None:
        if self.water_type_policy not in (POLICY_ALL_SEVEN, POLICY_RANDOM_ONE):
            raise ConfigError(
                f"unknown water_type_policy {self.water_type_policy!r} "
                f"(use {POLICY_ALL_SEVEN!r} or {POLICY_RANDOM_ONE!r})"
            )
        if self.width <= 0 or self.height <= 0:
            raise ConfigError(f"invalid resolution {self.width}x{self.height}")
        self.color_shift.validate()

    @property
    def resolution(self) -> tuple:
        return (self.width, self.height)


def _config_from_mapping(data: dict) -> GenerationConfig:
    cfg = GenerationConfig()
    known = {"master_seed", "water_type_policy", "resolution", "color_shift", "snow"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")

    kwargs = {}
    if "master_seed" in data:
        kwargs["master_seed"] = int(data["master_seed"])
    if "water_type_policy" in data:
        kwargs["water_type_policy"] = str(data["water_type_policy"])
    if "resolution" in data:
        res = data["resolution"]
        kwargs["width"] = int(res["width"])
        kwargs["height"] = int(res["height"])

    cs = dict(data.get("color_shift", {}))
    if cs:
        cs_kwargs = {}
        for key in ("d_vert_min", "d_vert_max", "depth_min", "depth_max"):
            if key in cs:
                cs_kwargs[key] = float(cs.pop(key))
        for key in ("background_min", "background_max"):
            if key in cs:
                cs_kwargs[key] = tuple(float(v) for v in cs.pop(key))
        if "beta_table_size" in cs:
            cs_kwargs["beta_table_size"] = int(cs.pop("beta_table_size"))
        if cs:
            raise ConfigError(f"unknown color_shift key(s): {', '.join(sorted(cs))}")
        kwargs["color_shift"] = replace(cfg.color_shift, **cs_kwargs)

    snow = dict(data.get("snow", {}))
    if snow:
        snow_kwargs = {}
        default_snow = SnowConfig()
        for section, bins in (("type_h", default_snow.h_bins), ("type_v", default_snow.v_bins)):
            block = dict(snow.pop(section, {}))
            if not block:
                continue
            bin_kwargs = {}
            if "bin_edges" in block:
                bin_kwargs["upper_edges"] = tuple(float(v) for v in block.pop("bin_edges"))
            for key in ("sigmas", "gains"):
                if key in block:
                    bin_kwargs[key] = tuple(float(v) for v in block.pop(key))
            for key in ("threshold", "brightness", "edge_sigma"):
                if key in block:
                    bin_kwargs[key] = float(block.pop(key))
            if block:
                raise ConfigError(
                    f"unknown snow.{section} key(s): {', '.join(sorted(block))}"
                )
            snow_kwargs["h_bins" if section == "type_h" else "v_bins"] = replace(
                bins, **bin_kwargs
            )
        counts = dict(snow.pop("counts", {}))
        if counts:
            count_kwargs = {
                k: float(counts.pop(k))
                for k in ("h_mean", "h_variance", "v_mean", "v_variance")
                if k in counts
            }
            if counts:
                raise ConfigError(f"unknown snow.counts key(s): {', '.join(sorted(counts))}")
            snow_kwargs["counts"] = CountDistribution(**{**vars(default_snow.counts), **count_kwargs})
        if "r_max" in snow:
            snow_kwargs["r_max"] = float(snow.pop("r_max"))
        if snow:
            raise ConfigError(f"unknown snow key(s): {', '.join(sorted(snow))}")
        kwargs["snow"] = replace(cfg.snow, **snow_kwargs)

    cfg = replace(cfg, **kwargs)
    cfg.validate()
    return cfg


def load_config(path) -> GenerationConfig:
    """Read a generation config from a TOML or JSON file."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    text = path.read_bytes()
    if path.suffix.lower() == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    else:
        try:
            import tomllib  # Python >= 3.11
        except ModuleNotFoundError:
            import tomli as tomllib
        try:
            data = tomllib.loads(text.decode("utf-8"))
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: invalid TOML: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top-level config must be a table/object")
    return _config_from_mapping(data)


def derive_seed(master_seed: int, *parts) -> int:
    """Stable 64-bit seed from the master seed and any identifying parts."""
    h = hashlib.blake2b(digest_size=8)
    h.update(str(int(master_seed)).encode())
    for part in parts:
        h.update(b"\x1f")
        h.update(str(part).encode())
    return int.from_bytes(h.digest(), "big")


# ---------------------------------------------------------------------------
# Ingest
# ---------------------------------------------------------------------------


def _open_image(path) -> Image.Image:
    path = Path(path)
    if not path.exists():
        raise IngestError(f"input image not found: {path}")
    try:
        img = Image.open(path)
        img.load()
    except Exception as exc:
        raise IngestError(f"cannot decode {path}: {exc}") from None
    return img


def load_rgbd(rgb_path, depth_path, resolution: tuple | None = None) -> RGBDImage:
    """Load a clean RGB image and its raw depth map.

    ``resolution`` (width, height), when given, resizes both: the colour
    image bilinearly and the depth map with nearest-neighbour so no phantom
    intermediate distances are invented across discontinuities.
    """
    rgb_img = _open_image(rgb_path).convert("RGB")
    depth_img = _open_image(depth_path)
    if depth_img.mode not in ("I", "I;16", "L", "F"):
        raise IngestError(
            f"{depth_path}: unsupported depth mode {depth_img.mode!r} "
            "(expected single-channel 8/16-bit or float)"
        )
    if depth_img.mode == "I;16":
        depth_img = depth_img.convert("I")

    if resolution is not None:
        target = (int(resolution[0]), int(resolution[1]))
        if rgb_img.size != target:
            rgb_img = rgb_img.resize(target, Image.BILINEAR)
        if depth_img.size != target:
            depth_img = depth_img.resize(target, Image.NEAREST)
    elif rgb_img.size != depth_img.size:
        raise IngestError(
            f"extent mismatch: {rgb_path} is {rgb_img.size}, {depth_path} is {depth_img.size}"
        )

    rgb = to_unit_float(np.asarray(rgb_img, dtype=np.uint8))
    depth = np.asarray(depth_img, dtype=np.float64)
    return RGBDImage(id=Path(rgb_path).stem, rgb=rgb, raw_depth=depth)


def scan_corpus(corpus_dir) -> list:
    """Resolve the (id, rgb_path, depth_path) triples of a corpus directory."""
    corpus_dir = Path(corpus_dir)
    rgb_dir = corpus_dir / "rgb"
    depth_dir = corpus_dir / "depth"
    if not rgb_dir.is_dir() or not depth_dir.is_dir():
        raise IngestError(f"corpus {corpus_dir} must contain rgb/ and depth/ directories")
    items = []
    for rgb_path in sorted(rgb_dir.glob("*.png")):
        depth_path = depth_dir / rgb_path.name
        if not depth_path.exists():
            raise IngestError(f"missing depth image for {rgb_path.stem!r}: {depth_path}")
        items.append((rgb_path.stem, rgb_path, depth_path))
    if not items:
        raise IngestError(f"no PNG images found under {rgb_dir}")
    return items


# ---------------------------------------------------------------------------
# Manifest
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PairRecord:
    """Provenance of one clean/degraded pair."""

    id: str
    source_id: str
    water_type: str
    d_vert: float
    background: tuple  # (B_r, B_g, B_b)
    camera_id: str
    n_particles_h: int
    n_particles_v: int
    seed: int
    clean_path: str
    degraded_path: str

    def to_json(self) -> str:
        return json.dumps(
            {
                "id": self.id,
                "source_id": self.source_id,
                "water_type": self.water_type,
                "d_vert": self.d_vert,
                "background": list(self.background),
                "camera_id": self.camera_id,
                "n_particles_h": self.n_particles_h,
                "n_particles_v": self.n_particles_v,
                "seed": self.seed,
                "clean_path": self.clean_path,
                "degraded_path": self.degraded_path,
            },
            sort_keys=True,
        )

    @classmethod
    def from_mapping(cls, obj: dict) -> "PairRecord":
        return cls(
            id=str(obj["id"]),
            source_id=str(obj["source_id"]),
            water_type=str(obj["water_type"]),
            d_vert=float(obj["d_vert"]),
            background=tuple(float(v) for v in obj["background"]),
            camera_id=str(obj["camera_id"]),
            n_particles_h=int(obj["n_particles_h"]),
            n_particles_v=int(obj["n_particles_v"]),
            seed=int(obj["seed"]),
            clean_path=str(obj["clean_path"]),
            degraded_path=str(obj["degraded_path"]),
        )


@dataclass(frozen=True)
class PairManifest:
    rows: tuple

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)


def write_manifest(manifest: PairManifest, path) -> None:
    """Write atomically: the file appears complete or not at all."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"manifest_version": MANIFEST_VERSION}) + "\n")
        for row in manifest:
            fh.write(row.to_json() + "\n")
    os.replace(tmp, path)


def read_manifest(path) -> PairManifest:
    path = Path(path)
    if not path.exists():
        raise ManifestError(f"manifest not found: {path}")
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ManifestError(f"{path}: line {lineno}: invalid JSON ({exc})") from None
            if lineno == 1:
                if obj.get("manifest_version") != MANIFEST_VERSION:
                    raise ManifestError(
                        f"{path}: line 1: expected manifest_version {MANIFEST_VERSION} header"
                    )
                continue
            try:
                rows.append(PairRecord.from_mapping(obj))
            except (KeyError, TypeError, ValueError) as exc:
                raise ManifestError(f"{path}: line {lineno}: bad record ({exc})") from None
    return PairManifest(rows=rows)


def validate_manifest(manifest: PairManifest, base_dir) -> None:
    """Check that every referenced file exists; raise listing the missing ones."""
    base_dir = Path(base_dir)
    missing = []
    for row in manifest:
        for rel in (row.clean_path, row.degraded_path):
            if not (base_dir / rel).exists():
                missing.append(rel)
    if missing:
        raise ManifestError("manifest references missing file(s): " + ", ".join(missing))


# ---------------------------------------------------------------------------
# Generation
# ---------------------------------------------------------------------------


def _pair_record(source_id, water_type, params, n_h, n_v, derived_seed) -> PairRecord:
    return PairRecord(
        id=f"{source_id}_{water_type.value}",
        source_id=source_id,
        water_type=water_type.value,
        d_vert=params.d_vert,
        background=tuple(float(v) for v in params.background),
        camera_id=params.camera_id,
        n_particles_h=n_h,
        n_particles_v=n_v,
        seed=derived_seed,
        clean_path=f"clean/{source_id}.png",
        degraded_path=f"degraded/{source_id}_{water_type.value}.png",
    )


def pair_provenance(
    source_id: str,
    config: GenerationConfig,
    water_type: WaterType,
    derived_seed: int,
    library: SpectralLibrary,
) -> PairRecord:
    """Replay only the parameter draws of `generate_pair`; no rendering.

    The scene parameters and particle counts are drawn before anything that
    depends on pixel data, so the provenance row of an already-synthesized
    pair can be reconstructed from its seed alone.
    """
    rng = np.random.default_rng(derived_seed)
    params = sample_scene_params(rng, config.color_shift, water_type, library, seed=derived_seed)
    n_h, n_v = sample_particle_counts(rng, config.snow.counts)
    return _pair_record(source_id, water_type, params, n_h, n_v, derived_seed)


def generate_pair(
    rgbd: RGBDImage,
    config: GenerationConfig,
    water_type: WaterType,
    derived_seed: int,
    library: SpectralLibrary | None = None,
    depth=None,
) -> tuple:
    """Synthesize one degraded image for one water type.

    Returns (clean, degraded, record) with float images in [0, 1].  All
    randomness comes from ``derived_seed``; RNG draw order is scene
    parameters, then particle counts, then the H and V particle fields.
    ``depth`` accepts a pre-normalized `DepthMap` so callers synthesizing
    several water types of one image do not repeat the hole fill.
    """
    if library is None:
        library = default_library()
    config.validate()
    rng = np.random.default_rng(derived_seed)
    cs = config.color_shift
    if depth is None:
        depth = normalize_depth(rgbd.raw_depth, cs.depth_min, cs.depth_max)
    params = sample_scene_params(rng, cs, water_type, library, seed=derived_seed)
    shifted = apply_color_shift(rgbd.rgb, depth, params, library, cs)
    h_layer, v_layer, n_h, n_v = render_snow(rng, rgbd.extent, config.snow)
    degraded = composite(shifted, h_layer, v_layer)
    record = _pair_record(rgbd.id, water_type, params, n_h, n_v, derived_seed)
    return rgbd.rgb, degraded, record


def _select_water_types(config: GenerationConfig, image_id: str) -> list:
    if config.water_type_policy == POLICY_ALL_SEVEN:
        return list(ALL_WATER_TYPES)
    pick_rng = np.random.default_rng(derive_seed(config.master_seed, image_id, "watertype"))
    return [ALL_WATER_TYPES[int(pick_rng.integers(len(ALL_WATER_TYPES)))]]


def _png_verifies(path: Path, resolution: tuple) -> bool:
    if not path.exists():
        return False
    try:
        with Image.open(path) as img:
            return img.size == tuple(resolution)
    except Exception:
        return False


def _save_png(array_u8: np.ndarray, path: Path) -> None:
    Image.fromarray(array_u8).save(path)


def generate_dataset(
    corpus,
    config: GenerationConfig,
    out_dir,
    library: SpectralLibrary | None = None,
    workers: int = 1,
    progress=None,
) -> PairManifest:
    """Produce the paired dataset for a corpus; returns the manifest.

    ``corpus`` is a list of (id, rgb_path, depth_path) triples as returned
    by `scan_corpus`.  Existing output files that verify are not
    regenerated, so an interrupted run resumes where it stopped.  The
    manifest is written last, atomically.
    """
    config.validate()
    if library is None:
        library = default_library()
    if not corpus:
        raise IngestError("corpus is empty")
    out_dir = Path(out_dir)
    try:
        (out_dir / "clean").mkdir(parents=True, exist_ok=True)
        (out_dir / "degraded").mkdir(parents=True, exist_ok=True)
        probe = out_dir / ".write-probe"
        probe.touch()
        probe.unlink()
    except OSError as exc:
        raise OutputError(f"output directory {out_dir} is not writable: {exc}") from None

    def process_image(item) -> list:
        image_id, rgb_path, depth_path = item
        water_types = _select_water_types(config, image_id)
        clean_path = out_dir / "clean" / f"{image_id}.png"
        need_clean = not _png_verifies(clean_path, config.resolution)
        todo = [
            wt
            for wt in water_types
            if not _png_verifies(
                out_dir / "degraded" / f"{image_id}_{wt.value}.png", config.resolution
            )
        ]
        rgbd = None
        depth = None
        if todo or need_clean:
            rgbd = load_rgbd(rgb_path, depth_path, config.resolution)
            if need_clean:
                _save_png(to_uint8(rgbd.rgb), clean_path)
        if todo:
            cs = config.color_shift
            depth = normalize_depth(rgbd.raw_depth, cs.depth_min, cs.depth_max)
        records = []
        for wt in water_types:
            seed = derive_seed(config.master_seed, image_id, wt.value)
            if wt in todo:
                _, degraded, record = generate_pair(rgbd, config, wt, seed, library, depth=depth)
                _save_png(to_uint8(degraded), out_dir / record.degraded_path)
            else:
                record = pair_provenance(image_id, config, wt, seed, library)
            records.append(record)
        if progress is not None:
            progress(image_id)
        return records

    if workers <= 1:
        per_image = [process_image(item) for item in corpus]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_image = list(pool.map(process_image, corpus))

    rows = [record for records in per_image for record in records]
    rows.sort(key=lambda r: r.id)
    manifest = PairManifest(rows=rows)
    write_manifest(manifest, out_dir / MANIFEST_NAME)
    return manifest
