"""Synthetic distortion bank: 25 kinds x 5 monotone severity levels.

Applications are deterministic given (image, spec): stochastic kinds draw
from a generator seeded by the spec. Images are float RGB stacks in
[0, 255]; dimensions are always preserved.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.fft import dctn, idctn

from ..errors import ImageTooSmall
from ..media import RGBFrame

MIN_SIZE = 64
LEVELS = (1, 2, 3, 4, 5)


@dataclass(frozen=True)
class AugmentationSpec:
    kind: str
    level: int
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise KeyError(f"unknown distortion kind {self.kind!r}")
        if self.level not in LEVELS:
            raise ValueError(f"level must be 1..5, got {self.level}")


def _lvl(spec, table):
    return table[spec.level - 1]


def _blur(img, sigma):
    return np.stack([ndimage.gaussian_filter(c, sigma, mode="reflect") for c in img])


def _disk_kernel(radius):
    r = int(np.ceil(radius))
    y, x = np.mgrid[-r : r + 1, -r : r + 1]
    k = (x * x + y * y <= radius * radius).astype(np.float64)
    return k / k.sum()


def _convolve(img, kernel):
    return np.stack([ndimage.convolve(c, kernel, mode="reflect") for c in img])


def _box_kernel(length, axis):
    if axis == 0:
        k = np.ones((length, 1))
    else:
        k = np.ones((1, length))
    return k / k.sum()


def _gray(img):
    return 0.299 * img[0] + 0.587 * img[1] + 0.114 * img[2]


def _resample(img, factor, order):
    h, w = img.shape[1:]
    small_h, small_w = max(1, int(round(h / factor))), max(1, int(round(w / factor)))

    def one(c):
        small = ndimage.zoom(c, (small_h / h, small_w / w), order=order, mode="nearest")
        back = ndimage.zoom(small, (h / small.shape[0], w / small.shape[1]), order=order, mode="nearest")
        return back[:h, :w]

    return np.stack([one(c) for c in img])


def _block_dct_quantize(img, step, block=8):
    h, w = img.shape[1:]
    ph, pw = (-h) % block, (-w) % block
    out = []
    for c in img:
        padded = np.pad(c, ((0, ph), (0, pw)), mode="edge")
        hh, ww = padded.shape
        blocks = padded.reshape(hh // block, block, ww // block, block).transpose(0, 2, 1, 3)
        coeffs = dctn(blocks, axes=(2, 3), norm="ortho")
        coeffs = np.round(coeffs / step) * step
        rec = idctn(coeffs, axes=(2, 3), norm="ortho")
        rec = rec.transpose(0, 2, 1, 3).reshape(hh, ww)
        out.append(rec[:h, :w])
    return np.stack(out)


def _pixelate(img, block):
    h, w = img.shape[1:]

    def one(c):
        ph, pw = (-h) % block, (-w) % block
        padded = np.pad(c, ((0, ph), (0, pw)), mode="edge")
        hh, ww = padded.shape
        means = padded.reshape(hh // block, block, ww // block, block).mean(axis=(1, 3))
        return np.repeat(np.repeat(means, block, axis=0), block, axis=1)[:h, :w]

    return np.stack([one(c) for c in img])


def _vignette(img, strength):
    h, w = img.shape[1:]
    y = np.linspace(-1.0, 1.0, h)[:, None]
    x = np.linspace(-1.0, 1.0, w)[None, :]
    falloff = 1.0 - strength * (x * x + y * y) / 2.0
    return img * falloff[None, :, :]


def _apply(img, spec, rng):
    k, s = spec.kind, spec

    if k == "gaussian-blur":
        return _blur(img, _lvl(s, (0.8, 1.6, 2.4, 3.6, 5.0)))
    if k == "lens-blur":
        return _convolve(img, _disk_kernel(_lvl(s, (1.2, 2.0, 3.0, 4.5, 6.5))))
    if k == "motion-blur-h":
        return _convolve(img, _box_kernel(_lvl(s, (3, 5, 7, 11, 15)), axis=1))
    if k == "motion-blur-v":
        return _convolve(img, _box_kernel(_lvl(s, (3, 5, 7, 11, 15)), axis=0))
    if k == "gaussian-noise":
        sigma = _lvl(s, (2.0, 5.0, 10.0, 18.0, 30.0))
        return img + rng.normal(0.0, sigma, img.shape)
    if k == "impulse-noise":
        p = _lvl(s, (0.005, 0.01, 0.03, 0.06, 0.1))
        u = rng.random(img.shape[1:])
        out = img.copy()
        out[:, u < p / 2] = 0.0
        out[:, (u >= p / 2) & (u < p)] = 255.0
        return out
    if k == "multiplicative-noise":
        sigma = _lvl(s, (0.02, 0.05, 0.1, 0.18, 0.3))
        return img * (1.0 + rng.normal(0.0, sigma, img.shape))
    if k == "block-quantization":
        return _block_dct_quantize(img, _lvl(s, (20.0, 40.0, 60.0, 90.0, 130.0)))
    if k == "color-quantization":
        levels = _lvl(s, (32, 16, 8, 5, 3))
        step = 255.0 / (levels - 1)
        return np.round(img / step) * step
    if k == "pixelate":
        return _pixelate(img, _lvl(s, (2, 4, 6, 8, 12)))
    if k == "bilinear-downscale-upscale":
        return _resample(img, _lvl(s, (1.5, 2.0, 3.0, 4.0, 6.0)), order=1)
    if k == "nearest-downscale-upscale":
        return _resample(img, _lvl(s, (1.5, 2.0, 3.0, 4.0, 6.0)), order=0)
    if k == "brightness-up":
        return img + _lvl(s, (10.0, 20.0, 30.0, 40.0, 50.0))
    if k == "brightness-down":
        return img - _lvl(s, (10.0, 20.0, 30.0, 40.0, 50.0))
    if k == "contrast-up":
        return (img - 128.0) * _lvl(s, (1.15, 1.3, 1.5, 1.75, 2.0)) + 128.0
    if k == "contrast-down":
        return (img - 128.0) * _lvl(s, (0.85, 0.7, 0.55, 0.4, 0.25)) + 128.0
    if k == "gamma-high":
        g = _lvl(s, (1.2, 1.5, 1.8, 2.2, 2.6))
        return 255.0 * (np.clip(img, 0, 255) / 255.0) ** g
    if k == "gamma-low":
        g = _lvl(s, (0.83, 0.67, 0.55, 0.45, 0.38))
        return 255.0 * (np.clip(img, 0, 255) / 255.0) ** g
    if k == "saturation-up":
        gray = _gray(img)
        return gray[None] + _lvl(s, (1.3, 1.6, 2.0, 2.5, 3.0)) * (img - gray[None])
    if k == "saturation-down":
        gray = _gray(img)
        return gray[None] + _lvl(s, (0.7, 0.5, 0.35, 0.2, 0.05)) * (img - gray[None])
    if k == "white-balance-warm":
        d = _lvl(s, (6.0, 12.0, 18.0, 26.0, 36.0))
        return img + np.array([d, 0.0, -d])[:, None, None]
    if k == "white-balance-cool":
        d = _lvl(s, (6.0, 12.0, 18.0, 26.0, 36.0))
        return img + np.array([-d, 0.0, d])[:, None, None]
    if k == "oversharpen":
        amount = _lvl(s, (0.8, 1.5, 2.5, 4.0, 6.0))
        return img + amount * (img - _blur(img, 1.5))
    if k == "vignette":
        return _vignette(img, _lvl(s, (0.15, 0.3, 0.45, 0.6, 0.8)))
    if k == "chroma-shift":
        shift = _lvl(s, (1, 2, 3, 4, 6))
        out = img.copy()
        out[0] = np.roll(img[0], shift, axis=1)
        out[2] = np.roll(img[2], -shift, axis=1)
        return out
    raise KeyError(k)


KINDS = (
    "gaussian-blur",
    "lens-blur",
    "motion-blur-h",
    "motion-blur-v",
    "gaussian-noise",
    "impulse-noise",
    "multiplicative-noise",
    "block-quantization",
    "color-quantization",
    "pixelate",
    "bilinear-downscale-upscale",
    "nearest-downscale-upscale",
    "brightness-up",
    "brightness-down",
    "contrast-up",
    "contrast-down",
    "gamma-high",
    "gamma-low",
    "saturation-up",
    "saturation-down",
    "white-balance-warm",
    "white-balance-cool",
    "oversharpen",
    "vignette",
    "chroma-shift",
)


def build_augmentation_bank(seed: int = 0) -> list[AugmentationSpec]:
    """All 125 (kind, level) specs in a fixed order."""
    return [AugmentationSpec(kind=k, level=lv, seed=seed) for k in KINDS for lv in LEVELS]


def apply_augmentation(img: RGBFrame, spec: AugmentationSpec) -> RGBFrame:
    """Apply one distortion; deterministic given (img, spec) including seed."""
    stack = img.stack().astype(np.float64)
    h, w = stack.shape[1:]
    if h < MIN_SIZE or w < MIN_SIZE:
        raise ImageTooSmall(f"need >= {MIN_SIZE}x{MIN_SIZE}, got {h}x{w}")
    rng = np.random.default_rng(np.random.SeedSequence((KINDS.index(spec.kind), spec.level, spec.seed)))
    out = np.clip(_apply(stack, spec, rng), 0.0, 255.0)
    return RGBFrame(r=out[0], g=out[1], b=out[2])
