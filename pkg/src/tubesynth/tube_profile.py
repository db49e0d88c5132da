"""Cross-section model of an endotracheal tube and its projected drawing profiles.

The tube is simulated as a hollow annulus with a radiopaque rectangular
marker strip embedded in the wall. Projecting the cross-section with a
Radon transform at a handful of angles and resampling the support to 15
pixels yields the normalized intensity profiles used to draw the tube.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptySupportError, ValidationError

DEFAULT_ANGLES = (0, 30, 60, 90)
PROFILE_LENGTH = 15

# values below this are treated as float dust when cropping a projection
SUPPORT_EPS = 1e-9


@dataclass(frozen=True)
class TubeCrossSection:
    """Physical parameters of the simulated tube slice, in grid units."""

    outer_diameter_d1: float = 160.0
    inner_diameter_d2: float = 100.0
    strip_thickness_t: float = 20.0
    tube_attenuation_c1: float = 0.1
    marker_attenuation_c2: float = 1.0
    grid_size: int = 256

    def __post_init__(self):
        d1, d2, t = self.outer_diameter_d1, self.inner_diameter_d2, self.strip_thickness_t
        c1, c2 = self.tube_attenuation_c1, self.marker_attenuation_c2
        if not 0 < d2 < d1 <= self.grid_size:
            raise ValidationError(
                f"need 0 < inner_diameter_d2 < outer_diameter_d1 <= grid_size, "
                f"got d2={d2}, d1={d1}, grid_size={self.grid_size}"
            )
        if t > (d1 - d2) / 2:
            raise ValidationError(
                f"strip_thickness_t={t} exceeds wall thickness {(d1 - d2) / 2}"
            )
        if not 0 < c1 < c2:
            raise ValidationError(
                f"need 0 < tube_attenuation_c1 < marker_attenuation_c2, got c1={c1}, c2={c2}"
            )


@dataclass(frozen=True)
class ProjectionProfile:
    """Normalized 15-sample drawing profile at one projection angle."""

    angle_deg: float
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        object.__setattr__(self, "samples", samples)
        if samples.shape != (PROFILE_LENGTH,):
            raise ValidationError(f"profile must have {PROFILE_LENGTH} samples, got {samples.shape}")
        if samples.min() < 0 or not np.isclose(samples.max(), 1.0, rtol=0, atol=1e-12):
            raise ValidationError("profile samples must lie in [0, 1] with max == 1")


def rasterize_cross_section(spec: TubeCrossSection) -> np.ndarray:
    """Render the tube slice onto a square attenuation grid.

    Wall annulus gets c1, the marker rectangle (width t, spanning the wall
    radially, centered at 12 o'clock) replaces the wall's c1 with c2, and
    everything else is 0. Values are exactly {0, c1, c2}.
    """
    g = spec.grid_size
    c = (g - 1) / 2.0
    yy, xx = np.mgrid[0:g, 0:g]
    r = np.hypot(xx - c, yy - c)

    grid = np.zeros((g, g))
    wall = (r >= spec.inner_diameter_d2 / 2) & (r <= spec.outer_diameter_d1 / 2)
    grid[wall] = spec.tube_attenuation_c1

    marker = (
        (np.abs(xx - c) <= spec.strip_thickness_t / 2)
        & (yy >= c - spec.outer_diameter_d1 / 2)
        & (yy <= c - spec.inner_diameter_d2 / 2)
    )
    grid[marker & wall] = spec.marker_attenuation_c2
    return grid


def _bilinear_sample(grid: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Sample `grid` at subpixel (x, y) positions; outside counts as 0."""
    g = grid.shape[0]
    x0 = np.floor(x).astype(np.int64)
    y0 = np.floor(y).astype(np.int64)
    fx = x - x0
    fy = y - y0
    out = np.zeros(x.shape, dtype=float)
    for dy in (0, 1):
        for dx in (0, 1):
            xi = x0 + dx
            yi = y0 + dy
            w = (fx if dx else 1.0 - fx) * (fy if dy else 1.0 - fy)
            inside = (xi >= 0) & (xi < g) & (yi >= 0) & (yi < g)
            vals = np.where(inside, grid[yi.clip(0, g - 1), xi.clip(0, g - 1)], 0.0)
            out += w * vals
    return out


def radon_project(grid: np.ndarray, angle_deg: float) -> np.ndarray:
    """Line-integral projection of a square grid at one detector angle.

    Element i integrates the grid along the line perpendicular to the
    detector axis at offset ``i - (g - 1) / 2``, where the detector axis is
    the x axis rotated by ``angle_deg`` about the grid center. Sampling uses
    bilinear interpolation at unit steps along each line, so the result
    length equals the grid side.

    Parameters
    ----------
    grid : square 2D array of non-negative attenuation values
    angle_deg : projection angle in [0, 180)
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 2 or grid.shape[0] != grid.shape[1]:
        raise ValidationError(f"grid must be square 2D, got shape {grid.shape}")
    if not 0 <= angle_deg < 180:
        raise ValidationError(f"angle_deg must lie in [0, 180), got {angle_deg}")

    g = grid.shape[0]
    c = (g - 1) / 2.0
    theta = np.radians(angle_deg)
    s = np.arange(g) - c
    u = np.arange(g) - c
    x = c + s[:, None] * np.cos(theta) - u[None, :] * np.sin(theta)
    y = c + s[:, None] * np.sin(theta) + u[None, :] * np.cos(theta)
    return _bilinear_sample(grid, x, y).sum(axis=1)


def sample_profile(raw_projection: np.ndarray, angle_deg: float = 0.0) -> ProjectionProfile:
    """Crop a projection to its positive support and resample to 15 points.

    Values below 1e-9 are zeroed first (interpolation dust), the remaining
    contiguous support is linearly resampled to 15 equally spaced points
    including both endpoints, and the result is divided by its maximum.
    """
    raw = np.asarray(raw_projection, dtype=float)
    raw = np.where(raw < SUPPORT_EPS, 0.0, raw)
    nonzero = np.nonzero(raw > 0)[0]
    if nonzero.size == 0:
        raise EmptySupportError("projection has no positive support")
    support = raw[nonzero[0] : nonzero[-1] + 1]
    positions = np.linspace(0, len(support) - 1, PROFILE_LENGTH)
    samples = np.interp(positions, np.arange(len(support)), support)
    return ProjectionProfile(angle_deg=angle_deg, samples=samples / samples.max())


def tube_profiles(
    spec: TubeCrossSection, angles: tuple[float, ...] = DEFAULT_ANGLES
) -> dict[float, ProjectionProfile]:
    """Rasterize once and produce the drawing profile for each angle."""
    grid = rasterize_cross_section(spec)
    return {a: sample_profile(radon_project(grid, a), a) for a in angles}
