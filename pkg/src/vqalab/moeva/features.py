"""Fused quality features: deep embedding + spatial NSS + temporal NSS."""

from __future__ import annotations

import numpy as np

from ..errors import LayoutMismatch, TooFewFrames
from ..media import FrameSequence, subsample_frames, to_rgb
from ..nss import SPATIAL_NSS_DIM, TEMPORAL_NSS_DIM, s_nss_video, temporal_nss
from .encoder import EMBED_DIM, encoder_forward

FEATURE_DIM = EMBED_DIM + SPATIAL_NSS_DIM + TEMPORAL_NSS_DIM  # 173

DEEP_SLICE = slice(0, EMBED_DIM)
SPATIAL_SLICE = slice(EMBED_DIM, EMBED_DIM + SPATIAL_NSS_DIM)
TEMPORAL_SLICE = slice(EMBED_DIM + SPATIAL_NSS_DIM, FEATURE_DIM)


def _center_crop_rgb(rgb, size):
    h, w = rgb.r.shape
    if h < size or w < size:
        raise TooFewFrames(f"frame {h}x{w} smaller than crop {size}")
    t, l = (h - size) // 2, (w - size) // 2
    from ..media import RGBFrame

    return RGBFrame(
        r=rgb.r[t : t + size, l : l + size],
        g=rgb.g[t : t + size, l : l + size],
        b=rgb.b[t : t + size, l : l + size],
    )


def video_embedding(seq: FrameSequence, encoder_params: dict, stride: int = 15, crop_size: int = 64) -> np.ndarray:
    """Mean of per-frame backbone embeddings on center crops."""
    sub = subsample_frames(seq, stride)
    if len(sub) == 0:
        raise TooFewFrames("no frames to embed")
    crops = [_center_crop_rgb(to_rgb(f), crop_size) for f in sub.frames]
    emb = encoder_forward(encoder_params, crops, project=False)
    return emb.mean(axis=0)


def moeva_features(
    seq: FrameSequence,
    encoder_params: dict,
    deep_stride: int = 15,
    nss_stride: int = 10,
    crop_size: int = 64,
) -> np.ndarray:
    """[deep(128) | spatial-NSS(36) | temporal-NSS(9)] = 173 dims."""
    deep = video_embedding(seq, encoder_params, stride=deep_stride, crop_size=crop_size)
    spatial = s_nss_video(seq, stride=nss_stride)
    temporal = temporal_nss(seq)
    return np.concatenate([deep, spatial, temporal])


def moeva_predict(features, regressor):
    """Map fused feature vectors to quality scores; order preserved."""
    feats = np.atleast_2d(np.asarray(features, dtype=np.float64))
    if feats.shape[1] != regressor.x_train.shape[1]:
        raise LayoutMismatch(f"feature length {feats.shape[1]} != trained {regressor.x_train.shape[1]}")
    out = regressor.predict(feats)
    return out if np.asarray(features).ndim == 2 else float(out[0])
