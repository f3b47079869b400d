"""Small convolutional embedding network with hand-written backprop.

Two valid 3x3 convolutions (16, 32 channels) with ReLU and 2x average
pooling, global average pooling, a linear layer to a 128-d embedding, and a
2-layer projection head to 64 dims. Outputs are L2-normalized inside the
differentiated graph. float64 throughout so gradients check against finite
differences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import ShapeMismatch
from ..media import RGBFrame

EMBED_DIM = 128
PROJ_DIM = 64
NORM_EPS = 1e-12

PARAM_SHAPES = {
    "w1": (16, 3, 3, 3),
    "b1": (16,),
    "w2": (32, 16, 3, 3),
    "b2": (32,),
    "wf": (EMBED_DIM, 32),
    "bf": (EMBED_DIM,),
    "wh1": (EMBED_DIM, EMBED_DIM),
    "bh1": (EMBED_DIM,),
    "wh2": (PROJ_DIM, EMBED_DIM),
    "bh2": (PROJ_DIM,),
}


def init_params(rng: np.random.Generator) -> dict:
    """He-style random initialization; biases small positive to keep most
    rectifier units active."""
    params = {}
    for name, shape in PARAM_SHAPES.items():
        if name.startswith("b"):
            params[name] = np.full(shape, 0.01)
        else:
            fan_in = int(np.prod(shape[1:]))
            params[name] = rng.normal(0.0, np.sqrt(2.0 / fan_in), shape)
    return params


def images_to_array(images) -> np.ndarray:
    """List of RGBFrame (or array) -> (B, 3, P, P) float64 scaled to [0, 1]."""
    if isinstance(images, np.ndarray):
        return images.astype(np.float64)
    return np.stack([img.stack() for img in images]).astype(np.float64) / 255.0


def _conv_forward(x, w, b):
    # x (B,C,H,W), w (O,C,3,3) -> (B,O,H-2,W-2), valid convolution
    windows = sliding_window_view(x, (3, 3), axis=(2, 3))
    out = np.einsum("ocij,bchwij->bohw", w, windows, optimize=True)
    return out + b[None, :, None, None], windows


def _conv_backward(dout, windows, w, x_shape):
    dw = np.einsum("bohw,bchwij->ocij", dout, windows, optimize=True)
    db = dout.sum(axis=(0, 2, 3))
    padded = np.pad(dout, ((0, 0), (0, 0), (2, 2), (2, 2)))
    pw = sliding_window_view(padded, (3, 3), axis=(2, 3))
    wflip = w[:, :, ::-1, ::-1]
    dx = np.einsum("bohwij,ocij->bchw", pw, wflip, optimize=True)
    assert dx.shape == x_shape
    return dx, dw, db


def _pool_forward(x):
    b, c, h, w = x.shape
    h2, w2 = h - h % 2, w - w % 2
    cropped = x[:, :, :h2, :w2]
    pooled = cropped.reshape(b, c, h2 // 2, 2, w2 // 2, 2).mean(axis=(3, 5))
    return pooled, (h, w)


def _pool_backward(dout, orig_hw):
    h, w = orig_hw
    up = np.repeat(np.repeat(dout, 2, axis=2), 2, axis=3) * 0.25
    b, c = dout.shape[:2]
    dx = np.zeros((b, c, h, w))
    dx[:, :, : up.shape[2], : up.shape[3]] = up
    return dx


def _normalize(z):
    norm = np.sqrt(np.sum(z * z, axis=-1, keepdims=True) + NORM_EPS)
    return z / norm, norm


def _normalize_backward(dy, z, norm):
    y = z / norm
    return dy / norm - y * np.sum(y * dy, axis=-1, keepdims=True) / norm


def encoder_forward(params: dict, images, project: bool = True, want_cache: bool = False):
    """Embed a batch of crops.

    project=True returns the normalized 64-d head output (used by the
    contrastive loss); project=False the normalized 128-d backbone
    embedding (used as the deep feature).
    """
    x = images_to_array(images)
    if x.ndim != 4 or x.shape[1] != 3:
        raise ShapeMismatch(f"expected (B, 3, P, P), got {x.shape}")
    c1, win1 = _conv_forward(x, params["w1"], params["b1"])
    r1 = np.maximum(c1, 0.0)
    p1, hw1 = _pool_forward(r1)
    c2, win2 = _conv_forward(p1, params["w2"], params["b2"])
    r2 = np.maximum(c2, 0.0)
    p2, hw2 = _pool_forward(r2)
    gap = p2.mean(axis=(2, 3))
    emb = gap @ params["wf"].T + params["bf"]
    if project:
        h1 = emb @ params["wh1"].T + params["bh1"]
        a1 = np.maximum(h1, 0.0)
        z = a1 @ params["wh2"].T + params["bh2"]
    else:
        z = emb
    out, norm = _normalize(z)
    if not want_cache:
        return out
    cache = {
        "x": x, "win1": win1, "c1": c1, "hw1": hw1, "p1": p1,
        "win2": win2, "c2": c2, "hw2": hw2, "p2": p2, "gap": gap,
        "emb": emb, "z": z, "norm": norm, "project": project,
    }
    if project:
        cache["h1"] = h1
        cache["a1"] = a1
    return out, cache


def encoder_backward(params: dict, cache: dict, dout: np.ndarray) -> dict:
    """Gradients of a scalar loss w.r.t. every parameter, given the gradient
    at the normalized output."""
    grads = {}
    dz = _normalize_backward(dout, cache["z"], cache["norm"])
    if cache["project"]:
        grads["wh2"] = dz.T @ cache["a1"]
        grads["bh2"] = dz.sum(axis=0)
        da1 = dz @ params["wh2"]
        dh1 = da1 * (cache["h1"] > 0)
        grads["wh1"] = dh1.T @ cache["emb"]
        grads["bh1"] = dh1.sum(axis=0)
        demb = dh1 @ params["wh1"]
    else:
        grads["wh2"] = np.zeros_like(params["wh2"])
        grads["bh2"] = np.zeros_like(params["bh2"])
        grads["wh1"] = np.zeros_like(params["wh1"])
        grads["bh1"] = np.zeros_like(params["bh1"])
        demb = dz
    grads["wf"] = demb.T @ cache["gap"]
    grads["bf"] = demb.sum(axis=0)
    dgap = demb @ params["wf"]
    b, c, h, w = cache["p2"].shape
    dp2 = np.broadcast_to(dgap[:, :, None, None], (b, c, h, w)) / (h * w)
    dr2 = _pool_backward(dp2, cache["hw2"])
    dc2 = dr2 * (cache["c2"] > 0)
    dp1, grads["w2"], grads["b2"] = _conv_backward(dc2, cache["win2"], params["w2"], cache["p1"].shape)
    dr1 = _pool_backward(dp1, cache["hw1"])
    dc1 = dr1 * (cache["c1"] > 0)
    _, grads["w1"], grads["b1"] = _conv_backward(dc1, cache["win1"], params["w1"], cache["x"].shape)
    return grads


@dataclass
class TinyEncoder:
    """Parameter container for the embedding network."""

    params: dict

    @classmethod
    def initialize(cls, seed: int = 0):
        return cls(params=init_params(np.random.default_rng(seed)))

    def embed(self, images, project: bool = True):
        return encoder_forward(self.params, images, project=project)

    def copy(self):
        return TinyEncoder(params={k: v.copy() for k, v in self.params.items()})
