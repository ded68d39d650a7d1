"""Command-line interface.

stdout carries machine-readable results only; progress and diagnostics go
to stderr.  Operational failures print one ``<category>: <message>`` line
on stderr and exit with status 1 (argparse usage errors exit with 2).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .colorshift import ALL_WATER_TYPES
from .errors import UwsynthError
from .images import to_uint8
from .metrics import evaluate_pairs
from .pipeline import (
    MANIFEST_NAME,
    MANIFEST_VERSION,
    POLICY_ALL_SEVEN,
    POLICY_RANDOM_ONE,
    GenerationConfig,
    derive_seed,
    generate_dataset,
    generate_pair,
    load_config,
    load_rgbd,
    read_manifest,
    scan_corpus,
)
from .spectra import (
    CHANNELS,
    WaterType,
    default_library,
    effective_beta_horiz,
    effective_beta_vert,
)

_WATER_TYPE_NAMES = [wt.value for wt in ALL_WATER_TYPES]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uwsynth",
        description="Synthesize underwater-degraded images from atmospheric RGB-D input.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="degrade a single RGB-D image")
    p.add_argument("--rgb", required=True, help="clean RGB PNG")
    p.add_argument("--depth", required=True, help="raw depth PNG (16-bit)")
    p.add_argument("--config", help="TOML/JSON generation config")
    p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    p.add_argument(
        "--water-type",
        choices=_WATER_TYPE_NAMES,
        help="water type; a seeded random one is drawn when omitted",
    )
    p.add_argument("--out", required=True, help="output PNG path")

    p = sub.add_parser("batch", help="generate a paired dataset from a corpus")
    p.add_argument("--corpus", required=True, help="directory with rgb/ and depth/")
    p.add_argument("--config", help="TOML/JSON generation config")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--workers", type=int, default=1, help="parallel image workers")
    p.add_argument("--seed", type=int, help="override the config master seed")
    p.add_argument(
        "--policy",
        choices=[POLICY_ALL_SEVEN, POLICY_RANDOM_ONE],
        help="water types per image (overrides the config)",
    )

    p = sub.add_parser("spectra", help="print effective attenuation for one geometry")
    p.add_argument("--water-type", required=True, choices=_WATER_TYPE_NAMES)
    p.add_argument("--camera", required=True, help="camera id (CSV file stem)")
    p.add_argument("--d-vert", type=float, required=True, help="vertical distance (m)")
    p.add_argument("--d-horiz", type=float, required=True, help="horizontal distance (m)")

    p = sub.add_parser("eval", help="PSNR/SSIM report for a generated manifest")
    p.add_argument("--manifest", required=True, help="manifest.jsonl path")
    p.add_argument("--out", required=True, help="report JSON path (.txt twin written too)")

    return parser


def _load_generation_config(args) -> GenerationConfig:
    from dataclasses import replace

    config = load_config(args.config) if args.config else GenerationConfig()
    if getattr(args, "seed", None) is not None:
        config = replace(config, master_seed=args.seed)
    if getattr(args, "policy", None) is not None:
        config = replace(config, water_type_policy=args.policy)
    config.validate()
    return config


def _cmd_synth(args) -> int:
    config = _load_generation_config(args)
    rgbd = load_rgbd(args.rgb, args.depth, config.resolution)
    if args.water_type is not None:
        water_type = WaterType.from_string(args.water_type)
    else:
        pick = np.random.default_rng(derive_seed(config.master_seed, rgbd.id, "watertype"))
        water_type = ALL_WATER_TYPES[int(pick.integers(len(ALL_WATER_TYPES)))]
    seed = derive_seed(config.master_seed, rgbd.id, water_type.value)
    _, degraded, record = generate_pair(rgbd, config, water_type, seed)
    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    from PIL import Image

    Image.fromarray(to_uint8(degraded)).save(out_path)
    print(f'{{"manifest_version": {MANIFEST_VERSION}}}')
    print(record.to_json())
    print(f"wrote {out_path}", file=sys.stderr)
    return 0


def _cmd_batch(args) -> int:
    config = _load_generation_config(args)
    corpus = scan_corpus(args.corpus)

    def progress(image_id):
        print(f"synthesized {image_id}", file=sys.stderr)

    generate_dataset(
        corpus, config, args.out, workers=max(1, args.workers), progress=progress
    )
    manifest_path = Path(args.out) / MANIFEST_NAME
    print(manifest_path)
    return 0


def _cmd_spectra(args) -> int:
    library = default_library()
    water_type = WaterType.from_string(args.water_type)
    camera = library.camera(args.camera)
    if args.d_vert <= 0 or args.d_horiz <= 0:
        raise UwsynthError(f"distances must be positive, got {args.d_vert}, {args.d_horiz}")

    print("channel,beta_vert,beta_horiz,t_vert,t_horiz")
    for ch in CHANNELS:
        bv = effective_beta_vert(library, water_type, camera, ch, args.d_vert)
        bh = effective_beta_horiz(library, water_type, camera, ch, args.d_vert, args.d_horiz)
        tv = np.exp(-bv * args.d_vert)
        th = np.exp(-bh * args.d_horiz)
        print(f"{ch},{bv:.6g},{bh:.6g},{tv:.6g},{th:.6g}")
    return 0


def _cmd_eval(args) -> int:
    manifest_path = Path(args.manifest)
    manifest = read_manifest(manifest_path)
    report = evaluate_pairs(manifest, base_dir=manifest_path.parent)
    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(report.to_json() + "\n", encoding="utf-8")
    out_path.with_suffix(".txt").write_text(report.to_text(), encoding="utf-8")
    if report.mean_ssim is None:
        print("no pairs evaluated")
    else:
        print(f"mean_psnr_db={report.mean_psnr_db:.4f} mean_ssim={report.mean_ssim:.4f}")
    if report.errors:
        print(f"warning: {len(report.errors)} pair(s) could not be evaluated", file=sys.stderr)
    return 0


_COMMANDS = {
    "synth": _cmd_synth,
    "batch": _cmd_batch,
    "spectra": _cmd_spectra,
    "eval": _cmd_eval,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except UwsynthError as exc:
        print(f"{exc.category}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
