"""Randomized tube centerlines anchored at the clavicle landmarks.

Control points jitter around the anchor column and descend from the image
top to just below the clavicles; a cubic interpolating spline through the
points in B-spline form gives the smooth centerline to draw along.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import make_interp_spline

from .errors import OutOfBoundsError, ValidationError
from .landmarks import ClavicleLandmarks


@dataclass(frozen=True)
class TrajectoryParams:
    x_jitter_px: tuple[int, int] = (-2, 2)
    y_end_offset_px: tuple[int, int] = (0, 30)
    num_control_points: int = 4
    samples_per_curve: int | None = None  # defaults to 4 x image height

    def __post_init__(self):
        if self.num_control_points < 4:
            raise ValidationError(f"need at least 4 control points, got {self.num_control_points}")
        if self.x_jitter_px[0] > self.x_jitter_px[1] or self.y_end_offset_px[0] > self.y_end_offset_px[1]:
            raise ValidationError("jitter ranges must be (low, high) with low <= high")

    def resolve_samples(self, image_height: int) -> int:
        n = 4 * image_height if self.samples_per_curve is None else self.samples_per_curve
        if n < image_height:
            raise ValidationError(f"samples_per_curve={n} below image height {image_height}")
        return n


@dataclass(frozen=True)
class TrajectoryCurve:
    control_points: np.ndarray = field(repr=False)  # (n, 2) as (x, y)
    dense_points: np.ndarray = field(repr=False)  # (m, 2) as (x, y)
    tangents: np.ndarray = field(repr=False)  # (m, 2) unit vectors


def sample_control_points(
    landmarks: ClavicleLandmarks,
    params: TrajectoryParams,
    image_height: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Draw the randomized control points for one tube.

    The end offset is drawn first, then one independent x jitter per point;
    y coordinates are evenly spaced from 0 to low_y + offset.
    """
    off_lo, off_hi = params.y_end_offset_px
    end_offset = int(rng.integers(off_lo, off_hi + 1))
    y_end = landmarks.low_y + end_offset
    if y_end >= image_height:
        raise OutOfBoundsError(
            f"trajectory end y={y_end} exceeds image height {image_height}"
        )

    jit_lo, jit_hi = params.x_jitter_px
    n = params.num_control_points
    xs = landmarks.mid_x + rng.integers(jit_lo, jit_hi + 1, size=n)
    ys = np.linspace(0.0, float(y_end), n)
    return np.column_stack([xs.astype(float), ys])


def interpolate_bspline(control_points: np.ndarray, samples_per_curve: int) -> TrajectoryCurve:
    """Cubic interpolating spline through the control points.

    Parameterized by cumulative chord length and sampled uniformly in
    parameter; tangents are normalized first differences of the dense
    points (last one repeated).
    """
    pts = np.asarray(control_points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 4:
        raise ValidationError(f"need >= 4 (x, y) control points, got shape {pts.shape}")
    dy = np.diff(pts[:, 1])
    if not (dy > 0).all():
        raise ValidationError("control point y coordinates must strictly increase")

    chord = np.concatenate([[0.0], np.cumsum(np.hypot(*np.diff(pts, axis=0).T))])
    spline = make_interp_spline(chord, pts, k=3)
    dense = spline(np.linspace(0.0, chord[-1], samples_per_curve))

    diffs = np.diff(dense, axis=0)
    norms = np.linalg.norm(diffs, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    tangents = np.vstack([diffs / norms, diffs[-1:] / norms[-1:]])
    return TrajectoryCurve(control_points=pts, dense_points=dense, tangents=tangents)
