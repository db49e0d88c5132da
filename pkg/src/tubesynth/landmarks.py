"""Clavicle-mask landmark extraction.

The trachea sits between the clavicles on a frontal radiograph, so the
anchor for tube placement is the midpoint between the two clavicle
centroids plus the lowest clavicle row.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import LandmarkExtractionError, ValidationError

MIN_COMPONENT_AREA = 25  # px, filters speckle left by mask thresholding


@dataclass(frozen=True)
class ClavicleMask:
    """Binary clavicle segmentation at working resolution."""

    pixels: np.ndarray
    source_id: str

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 2:
            raise ValidationError(f"mask must be 2D, got shape {px.shape}")
        if not np.isin(px, (0, 1)).all():
            raise ValidationError("mask values must be strictly binary")
        object.__setattr__(self, "pixels", px.astype(np.uint8))


@dataclass(frozen=True)
class ClavicleLandmarks:
    mid_x: int
    low_y: int


def extract_landmarks(mask: ClavicleMask) -> ClavicleLandmarks:
    """Locate the tube anchor from the two largest clavicle components.

    Components are 4-connected and must each cover at least 25 px; fewer
    than two qualifying components raises LandmarkExtractionError so the
    caller can skip the case instead of silently defaulting.
    """
    labeled, n = ndimage.label(mask.pixels)  # default structure = 4-connectivity
    if n < 2:
        raise LandmarkExtractionError(mask.source_id, f"found {n} component(s), need 2")

    areas = ndimage.sum_labels(np.ones_like(labeled), labeled, index=np.arange(1, n + 1))
    qualifying = np.nonzero(areas >= MIN_COMPONENT_AREA)[0]
    if qualifying.size < 2:
        raise LandmarkExtractionError(
            mask.source_id,
            f"only {qualifying.size} component(s) of area >= {MIN_COMPONENT_AREA} px",
        )

    # two largest by area; stable tie-break on label order
    order = qualifying[np.argsort(-areas[qualifying], kind="stable")][:2]
    labels = order + 1

    mid = 0.0
    low_y = 0
    for lab in labels:
        ys, xs = np.nonzero(labeled == lab)
        mid += xs.sum() / xs.size / 2.0
        low_y = max(low_y, int(ys.max()))

    mid_x = math.floor(mid + 0.5)  # round half up, keeps the fixture arithmetic obvious
    return ClavicleLandmarks(mid_x=mid_x, low_y=low_y)
