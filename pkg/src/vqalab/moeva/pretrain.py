"""Contrastive pre-training loop with online and momentum encoders.

Anchors go through the online encoder, positives and negatives through the
momentum encoder. Plain gradient descent on the online parameters, then the
momentum parameters follow by exponential moving average. Deterministic
given the config seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidMomentum, TooFewFrames
from .encoder import encoder_backward, encoder_forward, init_params
from .loss import infonce_loss
from .pairing import crop, generate_pairs, make_chunk, ola_crop


@dataclass
class EncoderPair:
    """Online and momentum parameter sets plus the momentum coefficient."""

    online: dict
    momentum: dict
    m: float

    def __post_init__(self):
        if not 0.0 <= self.m < 1.0:
            raise InvalidMomentum(f"m must be in [0, 1), got {self.m}")
        for name, arr in self.online.items():
            if self.momentum[name].shape != arr.shape:
                raise InvalidMomentum(f"shape mismatch for {name}")


def momentum_update(pair: EncoderPair) -> EncoderPair:
    """theta_M <- m * theta_M + (1 - m) * theta_O, elementwise."""
    new_m = {
        name: pair.m * pair.momentum[name] + (1.0 - pair.m) * pair.online[name]
        for name in pair.momentum
    }
    return EncoderPair(online=pair.online, momentum=new_m, m=pair.m)


@dataclass
class PretrainConfig:
    tau: float = 0.1
    m: float = 0.99
    lr: float = 0.3
    steps: int = 200
    n_per_chunk: int = 4
    crop_size: int = 64
    ola_min: float = 0.25
    ola_max: float = 0.75
    frame_stride: int = 15
    chunks_per_step: int = 2
    seed: int = 0


@dataclass
class PretrainResult:
    pair: EncoderPair
    loss_trace: list[float] = field(default_factory=list)


def pretrain(corpus_frames, config: PretrainConfig) -> PretrainResult:
    """Run the contrastive loop over a list of RGB frames.

    corpus_frames should already be frame-subsampled (every 15th frame of
    the source videos by default; see FrameSequence subsampling upstream).
    """
    if len(corpus_frames) < 1:
        raise TooFewFrames("empty corpus")
    rng = np.random.default_rng(config.seed)
    online = init_params(np.random.default_rng(config.seed + 1))
    momentum = {k: v.copy() for k, v in online.items()}
    pair = EncoderPair(online=online, momentum=momentum, m=config.m)

    trace = []
    for _ in range(config.steps):
        # build this step's chunks; each chunk gets its own crop windows
        frame_idx = rng.choice(len(corpus_frames), size=config.chunks_per_step, replace=False) \
            if len(corpus_frames) >= config.chunks_per_step else \
            rng.integers(len(corpus_frames), size=config.chunks_per_step)
        chunks = [make_chunk(corpus_frames[int(i)], config.n_per_chunk, rng) for i in frame_idx]
        crop_pairs = []
        for ch in chunks:
            dims = ch.source.r.shape
            crop_pairs.append(ola_crop(dims, config.crop_size, config.ola_min, config.ola_max, rng))

        anchors, positives, negatives = [], [], []
        for ci, (ch, cp) in enumerate(zip(chunks, crop_pairs)):
            cross = []
            for cj, (other, ocp) in enumerate(zip(chunks, crop_pairs)):
                if cj != ci:
                    cross.extend(crop(img, ocp.window2) for img in other.images)
            batch = generate_pairs(ch, cp, cross_content=cross, temperature=config.tau)
            anchors.extend(batch.anchors)
            positives.extend(batch.positives)
            negatives.extend(batch.negatives)

        q, cache = encoder_forward(pair.online, anchors, project=True, want_cache=True)
        k_pos = encoder_forward(pair.momentum, positives, project=True)
        k_negs = [encoder_forward(pair.momentum, negs, project=True) for negs in negatives]

        loss, dq, _, _ = infonce_loss(q, k_pos, k_negs, config.tau)
        grads = encoder_backward(pair.online, cache, dq)
        for name in pair.online:
            pair.online[name] = pair.online[name] - config.lr * grads[name]
        pair = momentum_update(pair)
        trace.append(loss)

    return PretrainResult(pair=pair, loss_trace=trace)


# --- encoder serialization ----------------------------------------------

_MAGIC = b"MOEV"


def save_encoder(params: dict, path):
    """Versioned binary: magic, u32 layer count, per layer name/shape/f64 data."""
    import struct

    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", len(params)))
        for name in sorted(params):
            arr = np.ascontiguousarray(params[name], dtype="<f8")
            nb = name.encode()
            fh.write(struct.pack("<I", len(nb)))
            fh.write(nb)
            fh.write(struct.pack("<I", arr.ndim))
            fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
            fh.write(arr.tobytes())


def load_encoder(path) -> dict:
    import struct

    params = {}
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise InvalidMomentum("bad encoder file magic")
        (count,) = struct.unpack("<I", fh.read(4))
        for _ in range(count):
            (nlen,) = struct.unpack("<I", fh.read(4))
            name = fh.read(nlen).decode()
            (ndim,) = struct.unpack("<I", fh.read(4))
            shape = struct.unpack(f"<{ndim}I", fh.read(4 * ndim))
            size = int(np.prod(shape))
            params[name] = np.frombuffer(fh.read(8 * size), dtype="<f8").copy().reshape(shape)
    return params
