"""Batch synthesis: case selection, seeded rendering, manifest assembly.

Positives get a tube stamped along a randomized trajectory and blended in;
negatives are passed through at working resolution with an empty mask, so
one manifest feeds a single training loader. Every case renders from its
own seed derived from (global seed, source case id), which keeps output
bytes identical across runs and worker counts.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np
from PIL import Image

from .compositor import DEFAULT_MASK_THRESHOLD, SyntheticCase, blend, derive_mask, stamp_tube
from .errors import (
    LandmarkExtractionError,
    SchemaError,
    ShortfallError,
    ValidationError,
)
from .landmarks import ClavicleMask, extract_landmarks
from .trajectory import TrajectoryParams, interpolate_bspline, sample_control_points
from .tube_profile import DEFAULT_ANGLES, ProjectionProfile, TubeCrossSection, tube_profiles

logger = logging.getLogger(__name__)

REQUIRED_COLUMNS = ("Image Index", "View Position")
CLAVICLE_SUFFIX = "_clavicle.png"


@dataclass(frozen=True)
class CaseRecord:
    case_id: str
    image_path: str
    view_position: str  # "AP", "PA" or "other"
    has_tube_annotation: bool | None = None


@dataclass(frozen=True)
class GenerationConfig:
    working_resolution: int = 224
    seed: int = 0
    angles: tuple[float, ...] = DEFAULT_ANGLES
    blend_weight_range: tuple[float, float] = (0.1, 0.2)
    trajectory: TrajectoryParams = field(default_factory=TrajectoryParams)
    tube: TubeCrossSection = field(default_factory=TubeCrossSection)
    num_positive: int = 869
    num_negative: int = 800
    images_dir: str = ""
    clavicle_masks_dir: str = ""
    metadata_csv: str = ""
    out_dir: str = ""
    excluded_case_ids: tuple[str, ...] = ()
    mask_threshold: float = DEFAULT_MASK_THRESHOLD

    def __post_init__(self):
        if self.num_positive < 0 or self.num_negative < 0:
            raise ValidationError("counts must be non-negative")
        if not self.angles:
            raise ValidationError("angles must be nonempty")
        bad = [a for a in self.angles if a not in DEFAULT_ANGLES]
        if bad:
            raise ValidationError(f"angles must be drawn from {DEFAULT_ANGLES}, got {bad}")
        lo, hi = self.blend_weight_range
        if not 0.0 <= lo <= hi <= 1.0:
            raise ValidationError(f"blend_weight_range must sit inside [0, 1], got {self.blend_weight_range}")
        if self.working_resolution < 32:
            raise ValidationError("working_resolution below 32 px is not drawable")

    @classmethod
    def from_json(cls, path: str | Path, **overrides) -> "GenerationConfig":
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
        paths = raw.pop("paths", {})
        counts = raw.pop("counts", {})
        kwargs: dict = {}
        kwargs.update({k: v for k, v in raw.items() if k not in ("trajectory", "tube")})
        if "trajectory" in raw:
            t = dict(raw["trajectory"])
            for rng_key in ("x_jitter_px", "y_end_offset_px"):
                if rng_key in t:
                    t[rng_key] = tuple(t[rng_key])
            kwargs["trajectory"] = TrajectoryParams(**t)
        if "tube" in raw:
            kwargs["tube"] = TubeCrossSection(**raw["tube"])
        if "num_positive" in counts:
            kwargs["num_positive"] = counts["num_positive"]
        if "num_negative" in counts:
            kwargs["num_negative"] = counts["num_negative"]
        for key in ("images_dir", "clavicle_masks_dir", "metadata_csv", "out_dir"):
            if key in paths:
                kwargs[key] = paths[key]
        if "angles" in kwargs:
            kwargs["angles"] = tuple(kwargs["angles"])
        if "blend_weight_range" in kwargs:
            kwargs["blend_weight_range"] = tuple(kwargs["blend_weight_range"])
        if "excluded_case_ids" in kwargs:
            kwargs["excluded_case_ids"] = tuple(kwargs["excluded_case_ids"])
        kwargs.update(overrides)
        try:
            return cls(**kwargs)
        except TypeError as e:
            raise ValidationError(f"bad config field: {e}") from e


@dataclass(frozen=True)
class ManifestEntry:
    case_id: str
    source_case_id: str
    label: int
    image_file: str
    mask_file: str
    seed: int
    angle: float | None
    blend_weight: float | None
    control_points: list | None
    landmarks: dict | None

    def to_json(self) -> str:
        return json.dumps(asdict(self))


def parse_view(raw: str) -> str:
    view = raw.strip().upper()
    return view if view in ("AP", "PA") else "other"


def select_cases(
    metadata_csv: str | Path,
    view: str = "AP",
    exclude: tuple[str, ...] = (),
    images_dir: str | Path | None = None,
) -> list[CaseRecord]:
    """Read the metadata table and keep records in the requested view.

    Rows whose view string is neither AP nor PA classify as "other" and are
    excluded; case ids on the exclusion list (known tube cases) are dropped.
    Record order follows file order.
    """
    excluded = set(exclude)
    records: list[CaseRecord] = []
    with open(metadata_csv, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in REQUIRED_COLUMNS if c not in header]
        if missing:
            raise SchemaError(f"metadata CSV missing column(s) {missing}, found {header}")
        for row in reader:
            file_name = row["Image Index"].strip()
            case_id = Path(file_name).stem
            known_tube = case_id in excluded
            record = CaseRecord(
                case_id=case_id,
                image_path=str(Path(images_dir) / file_name) if images_dir else file_name,
                view_position=parse_view(row["View Position"]),
                has_tube_annotation=True if known_tube else None,
            )
            if record.view_position == view and not known_tube:
                records.append(record)
    return records


def case_seed(global_seed: int, source_case_id: str) -> int:
    """Stable 64-bit per-case seed from the global seed and source id."""
    digest = hashlib.sha256(f"{global_seed}:{source_case_id}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def load_grayscale(path: str | Path, resolution: int) -> np.ndarray:
    """8-bit grayscale PNG resized to working resolution, scaled to [0, 1]."""
    with Image.open(path) as im:
        im = im.convert("L")
        if im.size != (resolution, resolution):
            im = im.resize((resolution, resolution), Image.BILINEAR)
        return np.asarray(im, dtype=float) / 255.0


def load_clavicle_mask(path: str | Path, source_id: str, resolution: int) -> ClavicleMask:
    with Image.open(path) as im:
        arr = np.asarray(im.convert("L"))
    if arr.shape != (resolution, resolution):
        raise ValidationError(
            f"clavicle mask {path} has shape {arr.shape}, expected {(resolution, resolution)}"
        )
    return ClavicleMask(pixels=(arr > 0).astype(np.uint8), source_id=source_id)


def save_grayscale(path: str | Path, image: np.ndarray) -> None:
    data = np.round(np.clip(image, 0.0, 1.0) * 255.0).astype(np.uint8)
    Image.fromarray(data, mode="L").save(path)


def save_mask(path: str | Path, mask: np.ndarray) -> None:
    Image.fromarray(mask.astype(np.uint8) * 255, mode="L").save(path)


def clavicle_mask_path(config: GenerationConfig, source_case_id: str) -> Path:
    return Path(config.clavicle_masks_dir) / f"{source_case_id}{CLAVICLE_SUFFIX}"


def render_case(
    record: CaseRecord,
    config: GenerationConfig,
    rng: np.random.Generator,
    profiles: dict[float, ProjectionProfile] | None = None,
) -> SyntheticCase:
    """Full positive-case pipeline for one source radiograph.

    Landmarks anchor the trajectory, a profile angle is chosen uniformly,
    the stamped overlay is thresholded into the ground-truth mask, and the
    overlay is blended with a weight drawn from the configured range.
    """
    res = config.working_resolution
    mask_file = clavicle_mask_path(config, record.case_id)
    if not mask_file.exists():
        raise LandmarkExtractionError(record.case_id, f"clavicle mask not found: {mask_file}")
    clavicles = load_clavicle_mask(mask_file, record.case_id, res)
    marks = extract_landmarks(clavicles)

    if profiles is None:
        profiles = tube_profiles(config.tube, config.angles)

    control_points = sample_control_points(marks, config.trajectory, res, rng)
    curve = interpolate_bspline(control_points, config.trajectory.resolve_samples(res))
    angle = config.angles[int(rng.integers(len(config.angles)))]
    overlay = stamp_tube(curve, profiles[angle], (res, res), config.mask_threshold)
    mask = derive_mask(overlay)

    lo, hi = config.blend_weight_range
    weight = float(rng.uniform(lo, hi))
    radiograph = load_grayscale(record.image_path, res)
    blended = blend(radiograph, overlay, weight)

    return SyntheticCase(
        image=blended,
        mask=mask,
        label=True,
        meta={
            "source_case_id": record.case_id,
            "angle": angle,
            "blend_weight": weight,
            "control_points": control_points.tolist(),
            "landmarks": {"mid_x": marks.mid_x, "low_y": marks.low_y},
        },
    )


@dataclass(frozen=True)
class _RenderTask:
    index: int
    case_id: str
    record: CaseRecord
    seed: int
    positive: bool
    config: GenerationConfig
    out_dir: str


def _run_task(task: _RenderTask) -> ManifestEntry:
    config = task.config
    image_file = f"images/{task.case_id}.png"
    mask_file = f"masks/{task.case_id}.png"
    if task.positive:
        rng = np.random.default_rng(task.seed)
        case = render_case(task.record, config, rng, _worker_profiles(config))
        save_grayscale(Path(task.out_dir) / image_file, case.image)
        save_mask(Path(task.out_dir) / mask_file, case.mask)
        meta = case.meta
        return ManifestEntry(
            case_id=task.case_id,
            source_case_id=task.record.case_id,
            label=1,
            image_file=image_file,
            mask_file=mask_file,
            seed=task.seed,
            angle=meta["angle"],
            blend_weight=meta["blend_weight"],
            control_points=meta["control_points"],
            landmarks=meta["landmarks"],
        )
    res = config.working_resolution
    image = load_grayscale(task.record.image_path, res)
    save_grayscale(Path(task.out_dir) / image_file, image)
    save_mask(Path(task.out_dir) / mask_file, np.zeros((res, res), dtype=bool))
    return ManifestEntry(
        case_id=task.case_id,
        source_case_id=task.record.case_id,
        label=0,
        image_file=image_file,
        mask_file=mask_file,
        seed=task.seed,
        angle=None,
        blend_weight=None,
        control_points=None,
        landmarks=None,
    )


_PROFILE_CACHE: dict[tuple, dict[float, ProjectionProfile]] = {}


def _worker_profiles(config: GenerationConfig) -> dict[float, ProjectionProfile]:
    key = (config.tube, config.angles)
    if key not in _PROFILE_CACHE:
        _PROFILE_CACHE[key] = tube_profiles(config.tube, config.angles)
    return _PROFILE_CACHE[key]


def generate_dataset(
    config: GenerationConfig,
    workers: int = 1,
    dry_run: bool = False,
) -> list[ManifestEntry]:
    """Produce the full synthetic dataset tree and its manifest.

    Eligible AP cases are shuffled with the global seed; positives are the
    first cases whose clavicle landmarks extract cleanly (failures are
    logged, skipped, and left available as negatives), negatives follow
    from the remaining pool. The manifest is written last, atomically.
    """
    records = select_cases(
        config.metadata_csv,
        view="AP",
        exclude=config.excluded_case_ids,
        images_dir=config.images_dir,
    )

    rng = np.random.default_rng(config.seed)
    order = [records[i] for i in rng.permutation(len(records))]

    positives: list[CaseRecord] = []
    leftovers: list[CaseRecord] = []
    res = config.working_resolution
    for record in order:
        if len(positives) == config.num_positive:
            leftovers.append(record)
            continue
        mask_file = clavicle_mask_path(config, record.case_id)
        if not mask_file.exists():
            logger.warning("skip %s for tube placement: no clavicle mask", record.case_id)
            leftovers.append(record)
            continue
        try:
            extract_landmarks(load_clavicle_mask(mask_file, record.case_id, res))
        except (LandmarkExtractionError, ValidationError) as e:
            logger.warning("skip %s for tube placement: %s", record.case_id, e)
            leftovers.append(record)
            continue
        positives.append(record)

    if len(positives) < config.num_positive:
        raise ShortfallError(
            f"requested {config.num_positive} positives but only {len(positives)} "
            f"eligible cases with usable clavicle masks (short {config.num_positive - len(positives)})"
        )
    if len(leftovers) < config.num_negative:
        raise ShortfallError(
            f"requested {config.num_negative} negatives but only {len(leftovers)} "
            f"cases remain (short {config.num_negative - len(leftovers)})"
        )
    negatives = leftovers[: config.num_negative]

    tasks: list[_RenderTask] = []
    for i, record in enumerate(positives + negatives):
        tasks.append(
            _RenderTask(
                index=i,
                case_id=f"case_{i:06d}",
                record=record,
                seed=case_seed(config.seed, record.case_id),
                positive=i < len(positives),
                config=config,
                out_dir=config.out_dir,
            )
        )

    if dry_run:
        for t in tasks:
            logger.info("would render %s from %s (label=%d)", t.case_id, t.record.case_id, int(t.positive))
        return []

    out_dir = Path(config.out_dir)
    (out_dir / "images").mkdir(parents=True, exist_ok=True)
    (out_dir / "masks").mkdir(parents=True, exist_ok=True)

    if workers <= 1:
        entries = [_run_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            entries = list(pool.map(_run_task, tasks, chunksize=8))

    manifest_path = out_dir / "manifest.jsonl"
    tmp_path = out_dir / ".manifest.jsonl.tmp"
    with open(tmp_path, "w", encoding="utf-8") as fh:
        for entry in entries:
            fh.write(entry.to_json() + "\n")
    os.replace(tmp_path, manifest_path)
    return entries


def read_manifest(path: str | Path) -> list[ManifestEntry]:
    entries = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                entries.append(ManifestEntry(**json.loads(line)))
    return entries
