"""Content-diversity statistics and paired-feature convex hulls.

Six per-video attributes (brightness, contrast, sharpness, SI, TI, CI)
computed on a subsampled frame grid, plus 2-D convex hulls used to compare
the feature-space coverage of datasets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptySequence, FrameTooSmall, SingleFrame
from .media import FrameSequence, RGBFrame, subsample_frames, to_rgb


@dataclass
class DiversityProfile:
    brightness: float
    contrast: float
    sharpness: float
    si: float
    ti: float
    ci: float

    def as_tuple(self):
        return (self.brightness, self.contrast, self.sharpness, self.si, self.ti, self.ci)


def _sample_std(x):
    # n-1 denominator throughout (house convention)
    return float(np.std(x, ddof=1))


def brightness_contrast(seq: FrameSequence) -> tuple[float, float]:
    """Global luma mean, and mean over frames of per-frame sample std."""
    if len(seq) == 0:
        raise EmptySequence("no frames")
    stack = seq.luma_stack()
    brightness = float(stack.mean())
    contrast = float(np.mean([_sample_std(f) for f in stack]))
    return brightness, contrast


def _gradient_magnitude(frame):
    """Central-difference gradient magnitude on interior pixels.

    Returns an (H-2, W-2) map; interior-only to match the (H-2)(W-2)
    normalization of the sharpness definition.
    """
    h, w = frame.shape
    if h < 3 or w < 3:
        raise FrameTooSmall(f"need >= 3x3, got {h}x{w}")
    dh = (frame[2:, 1:-1] - frame[:-2, 1:-1]) / 2.0
    dw = (frame[1:-1, 2:] - frame[1:-1, :-2]) / 2.0
    return np.sqrt(dh * dh + dw * dw)


def sharpness(seq: FrameSequence) -> float:
    """Mean gradient magnitude over interior pixels and frames."""
    if len(seq) == 0:
        raise EmptySequence("no frames")
    return float(np.mean([_gradient_magnitude(f).mean() for f in seq.luma_stack()]))


def spatial_information(seq: FrameSequence) -> float:
    """Mean over frames of the sample std of the gradient-magnitude map."""
    if len(seq) == 0:
        raise EmptySequence("no frames")
    grads = [_gradient_magnitude(f) for f in seq.luma_stack()]
    if grads[0].size < 2:
        raise FrameTooSmall("gradient map needs >= 2 interior pixels for a sample std")
    return float(np.mean([_sample_std(g) for g in grads]))


def temporal_information(seq: FrameSequence) -> float:
    """Mean over consecutive pairs of the sample std of the difference map."""
    if len(seq) < 2:
        raise SingleFrame("temporal information needs >= 2 frames")
    stack = seq.luma_stack()
    diffs = stack[1:] - stack[:-1]
    return float(np.mean([_sample_std(d) for d in diffs]))


def colorfulness(rgb_frames: list[RGBFrame]) -> float:
    """Per-frame opponent-color statistic, averaged over frames.

    rg = r - g; yb = (r + g)/2 - b (yellow is the mean of red and green).
    """
    if not rgb_frames:
        raise EmptySequence("no frames")
    vals = []
    for fr in rgb_frames:
        rg = fr.r - fr.g
        yb = 0.5 * (fr.r + fr.g) - fr.b
        vals.append(
            np.sqrt(_sample_std(rg) ** 2 + _sample_std(yb) ** 2)
            + 0.3 * np.sqrt(rg.mean() ** 2 + yb.mean() ** 2)
        )
    return float(np.mean(vals))


def diversity_profile(seq: FrameSequence, stride: int = 10) -> DiversityProfile:
    """All six features on the every-`stride`-frame grid.

    TI uses differences between consecutive subsampled frames; pass stride=1
    to difference original neighbors instead.
    """
    sub = subsample_frames(seq, stride)
    b, c = brightness_contrast(sub)
    sh = sharpness(sub)
    si = spatial_information(sub)
    ti = temporal_information(sub)
    rgb = [to_rgb(f) for f in sub.frames]
    ci = colorfulness(rgb)
    return DiversityProfile(brightness=b, contrast=c, sharpness=sh, si=si, ti=ti, ci=ci)


@dataclass
class Hull2D:
    """Convex polygon: CCW vertex list plus shoelace area."""

    vertices: list[tuple[float, float]]
    area: float


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull_2d(points) -> Hull2D:
    """Andrew monotone-chain hull; degenerate inputs yield area-0 hulls."""
    pts = sorted(set((float(x), float(y)) for x, y in points))
    if len(pts) <= 2:
        return Hull2D(vertices=pts, area=0.0)

    lower = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    verts = lower[:-1] + upper[:-1]

    if len(verts) < 3:  # all collinear
        return Hull2D(vertices=verts, area=0.0)
    area = 0.0
    for i in range(len(verts)):
        x1, y1 = verts[i]
        x2, y2 = verts[(i + 1) % len(verts)]
        area += x1 * y2 - x2 * y1
    return Hull2D(vertices=verts, area=0.5 * area)
