"""Rasterize the tube profile along a trajectory and blend it into a radiograph.

Each dense curve point stamps the 15-sample profile along the local normal;
a stamp is splatted with bilinear weights and normalized by its own weight
sum, and overlapping stamps combine by per-pixel maximum, so a straight
tube reproduces its profile exactly. The ground-truth mask is a plain
threshold of the overlay before blending.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import OutOfBoundsError, ValidationError
from .tube_profile import PROFILE_LENGTH, ProjectionProfile
from .trajectory import TrajectoryCurve

DEFAULT_MASK_THRESHOLD = 0.05


@dataclass(frozen=True)
class TubeOverlay:
    """Continuous opacity field of one stamped tube."""

    opacity: np.ndarray = field(repr=False)
    profile_angle: float = 0.0
    mask_threshold: float = DEFAULT_MASK_THRESHOLD


@dataclass(frozen=True)
class SyntheticCase:
    image: np.ndarray = field(repr=False)
    mask: np.ndarray = field(repr=False)
    label: bool = False
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.label != bool(self.mask.any()):
            raise ValidationError("label must match mask emptiness")


def stamp_tube(
    curve: TrajectoryCurve,
    profile: ProjectionProfile,
    canvas: tuple[int, int],
    mask_threshold: float = DEFAULT_MASK_THRESHOLD,
) -> TubeOverlay:
    """Draw the sampled profile along the curve onto an empty canvas.

    At each dense point the profile is laid out at unit spacing along the
    left normal of the local tangent, centered on the centerline. Rows
    spilling past the top/bottom edges are clipped; columns out of bounds
    raise OutOfBoundsError.
    """
    h, w = canvas
    dense = curve.dense_points
    out = np.zeros((h, w))
    if len(dense) == 0:
        return TubeOverlay(opacity=out, profile_angle=profile.angle_deg, mask_threshold=mask_threshold)

    tangents = curve.tangents
    normals = np.column_stack([-tangents[:, 1], tangents[:, 0]])
    offsets = np.arange(PROFILE_LENGTH) - (PROFILE_LENGTH - 1) / 2.0

    qx = (dense[:, 0:1] + offsets[None, :] * normals[:, 0:1]).ravel()
    qy = (dense[:, 1:2] + offsets[None, :] * normals[:, 1:2]).ravel()
    vals = np.tile(profile.samples, len(dense))
    stamp_idx = np.repeat(np.arange(len(dense), dtype=np.int64), PROFILE_LENGTH)

    x0 = np.floor(qx).astype(np.int64)
    y0 = np.floor(qy).astype(np.int64)
    fx = qx - x0
    fy = qy - y0

    cols, rows, weights, values, stamps = [], [], [], [], []
    for dy_ in (0, 1):
        for dx_ in (0, 1):
            wgt = (fx if dx_ else 1.0 - fx) * (fy if dy_ else 1.0 - fy)
            keep = wgt > 0
            cols.append(x0[keep] + dx_)
            rows.append(y0[keep] + dy_)
            weights.append(wgt[keep])
            values.append(vals[keep])
            stamps.append(stamp_idx[keep])
    col = np.concatenate(cols)
    row = np.concatenate(rows)
    wgt = np.concatenate(weights)
    val = np.concatenate(values)
    stm = np.concatenate(stamps)

    if (col < 0).any() or (col >= w).any():
        raise OutOfBoundsError(
            f"stamp columns span [{col.min()}, {col.max()}], canvas width {w}"
        )
    inside = (row >= 0) & (row < h)
    col, row, wgt, val, stm = col[inside], row[inside], wgt[inside], val[inside], stm[inside]

    # per-stamp weighted average, then max across stamps
    key = stm * (h * w) + row * w + col
    uniq, inv = np.unique(key, return_inverse=True)
    num = np.bincount(inv, weights=wgt * val)
    den = np.bincount(inv, weights=wgt)
    flat = out.ravel()
    np.maximum.at(flat, uniq % (h * w), num / den)
    return TubeOverlay(opacity=flat.reshape(h, w), profile_angle=profile.angle_deg, mask_threshold=mask_threshold)


def derive_mask(overlay: TubeOverlay) -> np.ndarray:
    """Binary ground-truth mask: opacity at or above the overlay threshold."""
    return overlay.opacity >= overlay.mask_threshold


def blend(radiograph: np.ndarray, overlay: TubeOverlay, w: float) -> np.ndarray:
    """Opacity-weighted blend toward white; radiopaque structures brighten.

    out = (1 - w * opacity) * radiograph + w * opacity, written so pixels
    with zero opacity stay bit-identical to the input.
    """
    img = np.asarray(radiograph, dtype=float)
    if img.shape != overlay.opacity.shape:
        raise ValidationError(
            f"radiograph shape {img.shape} != overlay shape {overlay.opacity.shape}"
        )
    if not 0.0 <= w <= 1.0:
        raise ValidationError(f"blend weight must lie in [0, 1], got {w}")
    return img + w * overlay.opacity * (1.0 - img)
