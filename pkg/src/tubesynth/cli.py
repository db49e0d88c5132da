"""Command line entry points.

`tubesynth generate` drives the full batch pipeline from a JSON config,
`tubesynth select` filters the metadata table to AP cases, and
`tubesynth dump-tube` writes the cross-section, projections, and profiles
for inspection.

Exit codes: 0 success, 1 validation failure, 2 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np
from PIL import Image

from .dataset import GenerationConfig, generate_dataset, select_cases
from .errors import TubeSynthError
from .tube_profile import DEFAULT_ANGLES, TubeCrossSection, radon_project, rasterize_cross_section, tube_profiles

logger = logging.getLogger("tubesynth")


def _cmd_generate(args) -> int:
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out is not None:
        overrides["out_dir"] = args.out
    config = GenerationConfig.from_json(args.config, **overrides)
    entries = generate_dataset(config, workers=args.workers, dry_run=args.dry_run)
    if args.dry_run:
        logger.info("dry run complete, nothing written")
    else:
        logger.info("wrote %d cases + manifest to %s", len(entries), config.out_dir)
    return 0


def _cmd_select(args) -> int:
    exclude = ()
    if args.exclude:
        exclude = tuple(
            line.strip() for line in Path(args.exclude).read_text().splitlines() if line.strip()
        )
    records = select_cases(args.metadata, view=args.view, exclude=exclude, images_dir=args.images_dir)
    with open(args.out, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(r.case_id + "\n")
    logger.info("%d %s case(s) -> %s", len(records), args.view, args.out)
    return 0


def _save_png16(path, array) -> None:
    arr = np.asarray(array, dtype=float)
    top = arr.max() if arr.max() > 0 else 1.0
    data = np.round(arr / top * 65535.0).astype(np.uint16)
    Image.fromarray(data).save(path)


def _cmd_dump_tube(args) -> int:
    spec = TubeCrossSection()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    grid = rasterize_cross_section(spec)
    _save_png16(out / "cross_section.png", grid)
    projections = np.stack([radon_project(grid, a) for a in DEFAULT_ANGLES])
    _save_png16(out / "projections.png", projections)
    with open(out / "profiles.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        for angle, profile in tube_profiles(spec).items():
            writer.writerow([angle] + [f"{v:.8f}" for v in profile.samples])
    logger.info("dumped tube debug artifacts to %s", out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tubesynth", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="render the synthetic dataset from a JSON config")
    gen.add_argument("--config", required=True, help="JSON file mirroring GenerationConfig")
    gen.add_argument("--seed", type=int, default=None, help="override the config seed")
    gen.add_argument("--out", default=None, help="override the config output directory")
    gen.add_argument("--workers", type=int, default=1, help="parallel render workers")
    gen.add_argument("--dry-run", action="store_true", help="plan only, write nothing")
    gen.set_defaults(func=_cmd_generate)

    sel = sub.add_parser("select", help="list eligible cases from a metadata CSV")
    sel.add_argument("--metadata", required=True)
    sel.add_argument("--view", default="AP", choices=["AP", "PA"])
    sel.add_argument("--out", required=True, help="output text file, one case id per line")
    sel.add_argument("--exclude", default=None, help="text file of case ids to drop")
    sel.add_argument("--images-dir", default=None)
    sel.set_defaults(func=_cmd_select)

    dump = sub.add_parser("dump-tube", help="write cross-section/projection debug artifacts")
    dump.add_argument("--out", required=True)
    dump.set_defaults(func=_cmd_dump_tube)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except TubeSynthError as e:
        logger.error("%s", e)
        return 1
    except OSError as e:
        logger.error("I/O failure: %s", e)
        return 2


if __name__ == "__main__":
    sys.exit(main())
