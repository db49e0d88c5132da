import json
import sys
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

sys.path.insert(0, str(Path(__file__).parent))

from tubesynth import TubeCrossSection


@pytest.fixture(scope="session")
def default_spec():
    return TubeCrossSection()


def squares_mask(resolution=224):
    """Two 10x10 clavicle blobs: centroids at columns 59.5 / 159.5, lowest row 80."""
    mask = np.zeros((resolution, resolution), dtype=np.uint8)
    mask[71:81, 55:65] = 1
    mask[71:81, 155:165] = 1
    return mask


def write_corpus(root: Path, n_cases: int, resolution: int = 224, n_pa: int = 0, n_other: int = 0):
    """Build a deterministic fixture corpus: images, clavicle masks, metadata CSV.

    Returns the config dict pointing at it (counts/paths filled in by the test).
    """
    images = root / "images"
    clavicles = root / "clavicles"
    images.mkdir(parents=True, exist_ok=True)
    clavicles.mkdir(parents=True, exist_ok=True)

    rng = np.random.default_rng(123)
    base = np.clip(
        0.35
        + 0.25 * np.sin(np.linspace(0, 3, resolution))[:, None]
        + 0.05 * rng.standard_normal((resolution, resolution)),
        0,
        1,
    )
    Image.fromarray((base * 255).astype(np.uint8), mode="L").save(root / "_base.png")

    mask = squares_mask(resolution) if resolution == 224 else scaled_squares_mask(resolution)
    mask_img = Image.fromarray(mask * 255, mode="L")

    rows = ["Image Index,View Position,Patient Age"]
    for i in range(n_cases):
        name = f"{i:08d}_000.png"
        (images / name).write_bytes((root / "_base.png").read_bytes())
        mask_img.save(clavicles / f"{i:08d}_000_clavicle.png")
        rows.append(f"{name},AP,50")
    for i in range(n_pa):
        name = f"pa_{i:04d}.png"
        (images / name).write_bytes((root / "_base.png").read_bytes())
        rows.append(f"{name},PA,50")
    for i in range(n_other):
        name = f"odd_{i:04d}.png"
        (images / name).write_bytes((root / "_base.png").read_bytes())
        rows.append(f"{name},LATERAL,50")
    (root / "metadata.csv").write_text("\n".join(rows) + "\n")

    return {
        "working_resolution": resolution,
        "paths": {
            "images_dir": str(images),
            "clavicle_masks_dir": str(clavicles),
            "metadata_csv": str(root / "metadata.csv"),
            "out_dir": str(root / "out"),
        },
    }


def scaled_squares_mask(resolution):
    """Squares fixture scaled down for small working resolutions."""
    mask = np.zeros((resolution, resolution), dtype=np.uint8)
    q = resolution // 4
    mask[q : q + 6, q - 6 : q] = 1
    mask[q : q + 6, 3 * q : 3 * q + 6] = 1
    return mask


def write_config(path: Path, corpus_cfg: dict, **extra) -> Path:
    cfg = dict(corpus_cfg)
    cfg.update(extra)
    path.write_text(json.dumps(cfg, indent=2))
    return path
