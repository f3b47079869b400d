"""Chunk construction, overlap-constrained cropping, and contrastive pairing.

A chunk is a pristine image plus n distinct distorted versions. Two square
crop windows with bounded overlapping area (OLA) are shared by every image
in the chunk; pairs are then labeled by three rules: same image across the
two crops is a positive, everything else within the chunk (and any
cross-content crop) is a negative.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import AttemptsExhausted, EmptyNegatives, Infeasible
from ..media import RGBFrame
from .augment import AugmentationSpec, apply_augmentation, build_augmentation_bank


@dataclass
class Chunk:
    source: RGBFrame
    distorted: list[RGBFrame]
    specs: list[AugmentationSpec]

    @property
    def n(self):
        return len(self.distorted)

    @property
    def images(self):
        """Pristine first (index 0), then the n distorted versions."""
        return [self.source] + self.distorted


def make_chunk(frame: RGBFrame, n: int, rng: np.random.Generator) -> Chunk:
    """Apply n distinct (kind, level) distortions sampled without replacement."""
    bank = build_augmentation_bank()
    if not 1 <= n <= len(bank):
        raise EmptyNegatives(f"n must be in [1, {len(bank)}], got {n}")
    chosen_idx = rng.choice(len(bank), size=n, replace=False)
    specs = [
        AugmentationSpec(kind=bank[i].kind, level=bank[i].level, seed=int(rng.integers(2**31)))
        for i in chosen_idx
    ]
    return Chunk(source=frame, distorted=[apply_augmentation(frame, s) for s in specs], specs=specs)


@dataclass
class CropPair:
    window1: tuple[int, int, int]  # (top, left, size)
    window2: tuple[int, int, int]
    ola: float


def _overlap(w1, w2):
    t1, l1, p = w1
    t2, l2, _ = w2
    dy = max(0, min(t1 + p, t2 + p) - max(t1, t2))
    dx = max(0, min(l1 + p, l2 + p) - max(l1, l2))
    return dy * dx / float(p * p)


def ola_crop(dims, p, ola_min, ola_max, rng, max_attempts=10_000) -> CropPair:
    """Two P x P windows whose overlap fraction lies in [ola_min, ola_max].

    Window 1 is uniform over valid positions; window 2 rejection-sampled.
    """
    h, w = dims
    if p > h or p > w:
        raise Infeasible(f"crop {p} larger than frame {h}x{w}")
    if not 0 <= ola_min < ola_max <= 1:
        raise Infeasible(f"bad ola bounds [{ola_min}, {ola_max}]")
    max_top, max_left = h - p, w - p
    if max_top == 0 and max_left == 0:
        w1 = (0, 0, p)
        if ola_max < 1.0:
            raise Infeasible("full-frame crops always overlap fully")
        return CropPair(window1=w1, window2=w1, ola=1.0)

    for _ in range(max_attempts):
        w1 = (int(rng.integers(max_top + 1)), int(rng.integers(max_left + 1)), p)
        w2 = (int(rng.integers(max_top + 1)), int(rng.integers(max_left + 1)), p)
        ola = _overlap(w1, w2)
        if ola_min <= ola <= ola_max:
            return CropPair(window1=w1, window2=w2, ola=ola)
    raise AttemptsExhausted(f"no crop pair within [{ola_min}, {ola_max}] after {max_attempts} attempts")


def crop(img: RGBFrame, window) -> RGBFrame:
    t, l, p = window
    return RGBFrame(r=img.r[t : t + p, l : l + p], g=img.g[t : t + p, l : l + p], b=img.b[t : t + p, l : l + p])


@dataclass
class PairBatch:
    """Anchor crops with one positive and a nonempty negative set each."""

    anchors: list[RGBFrame]
    positives: list[RGBFrame]
    negatives: list[list[RGBFrame]]
    temperature: float = 0.1

    def __len__(self):
        return len(self.anchors)


def generate_pairs(chunk: Chunk, crop_pair: CropPair, cross_content: list[RGBFrame] | None = None,
                   temperature: float = 0.1) -> PairBatch:
    """Label crops of a chunk under the three pairing rules.

    For every index m (0 = pristine): anchor = crop1 of image m, positive =
    crop2 of image m; negatives = both crops of every other index, plus all
    provided cross-content crops.
    """
    if chunk.n == 0:
        raise EmptyNegatives("chunk with no distorted images has nothing to contrast")
    cross_content = cross_content or []
    crops1 = [crop(img, crop_pair.window1) for img in chunk.images]
    crops2 = [crop(img, crop_pair.window2) for img in chunk.images]
    anchors, positives, negatives = [], [], []
    for m in range(len(chunk.images)):
        anchors.append(crops1[m])
        positives.append(crops2[m])
        negs = []
        for l in range(len(chunk.images)):
            if l != m:
                negs.append(crops1[l])
                negs.append(crops2[l])
        negs.extend(cross_content)
        if not negs:
            raise EmptyNegatives("anchor with no negatives")
        negatives.append(negs)
    return PairBatch(anchors=anchors, positives=positives, negatives=negatives, temperature=temperature)
