#!/usr/bin/env python3
"""Build the training fixtures by driving the generator CLI.

Creates a tiny deterministic source corpus (images + clavicle masks +
metadata CSV) and then invokes `tubesynth generate` on it, so the trainer
tests consume exactly what the generator ships: a JSON-lines manifest plus
PNG image/mask pairs.
"""

import json
import subprocess
import sys
from pathlib import Path

import numpy as np
from PIL import Image

ROOT = Path(__file__).resolve().parent.parent / "fixtures"
RESOLUTION = 64
N_CASES = 24
COUNTS = {"num_positive": 10, "num_negative": 10}
SEED = 20240809


def build_corpus(root: Path) -> dict:
    images = root / "images"
    clavicles = root / "clavicles"
    images.mkdir(parents=True, exist_ok=True)
    clavicles.mkdir(parents=True, exist_ok=True)

    rng = np.random.default_rng(4242)
    mask = np.zeros((RESOLUTION, RESOLUTION), dtype=np.uint8)
    q = RESOLUTION // 4
    mask[q : q + 6, q - 6 : q] = 255
    mask[q : q + 6, 3 * q : 3 * q + 6] = 255
    mask_img = Image.fromarray(mask, mode="L")

    rows = ["Image Index,View Position"]
    for i in range(N_CASES):
        name = f"{i:08d}_000.png"
        # gentle gradient + mild grain keeps the blended tube clearly above
        # the noise floor at this small working resolution
        base = np.clip(
            0.4
            + 0.15 * np.sin(np.linspace(0, 3, RESOLUTION))[:, None]
            + 0.02 * rng.standard_normal((RESOLUTION, RESOLUTION)),
            0,
            1,
        )
        Image.fromarray((base * 255).astype(np.uint8), mode="L").save(images / name)
        mask_img.save(clavicles / f"{i:08d}_000_clavicle.png")
        rows.append(f"{name},AP")
    (root / "metadata.csv").write_text("\n".join(rows) + "\n")

    return {
        "working_resolution": RESOLUTION,
        "seed": SEED,
        "counts": COUNTS,
        "paths": {
            "images_dir": str(images),
            "clavicle_masks_dir": str(clavicles),
            "metadata_csv": str(root / "metadata.csv"),
            "out_dir": str(root / "out"),
        },
    }


def main() -> int:
    manifest = ROOT / "out" / "manifest.jsonl"
    if manifest.exists():
        print(f"fixtures already present: {manifest}")
        return 0
    config = build_corpus(ROOT)
    config_path = ROOT / "config.json"
    config_path.write_text(json.dumps(config, indent=2))
    subprocess.run(
        [sys.executable, "-m", "tubesynth.cli", "generate", "--config", str(config_path)],
        check=True,
    )
    print(f"fixtures written under {ROOT}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
