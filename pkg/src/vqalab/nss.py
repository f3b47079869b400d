"""Natural-scene-statistics features and the distance-to-pristine quality model.

Spatial features follow the classic MSCN + (A)GGD construction (7x7 Gaussian
window, sigma 7/6, C = 1, two scales); the temporal features use a 3-level
Haar analysis of per-pixel luma time series over non-overlapping dyadic
blocks.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate
from scipy.special import gamma as gamma_fn

from .errors import (
    DegenerateSamples,
    EmptyCorpus,
    FrameTooSmall,
    OneSidedSamples,
    SingularCovariance,
    TooFewFrames,
)
from .media import FrameSequence, subsample_frames

SPATIAL_NSS_DIM = 36
TEMPORAL_NSS_DIM = 9

MSCN_WINDOW = 7
MSCN_SIGMA = 7.0 / 6.0
PATCH_SIZE = 96
SHARPNESS_FRACTION = 0.75
COV_RIDGE = 1e-6


@dataclass
class GGDParams:
    alpha: float
    sigma: float


@dataclass
class AGGDParams:
    alpha: float
    sigma_l: float
    sigma_r: float
    eta: float


@dataclass
class PristineModel:
    """Mean and covariance of pristine-patch NSS features."""

    mean: np.ndarray
    cov: np.ndarray


def _gaussian_window(size=MSCN_WINDOW, sigma=MSCN_SIGMA):
    half = size // 2
    x = np.arange(-half, half + 1, dtype=np.float64)
    g = np.exp(-(x * x) / (2.0 * sigma * sigma))
    k = np.outer(g, g)
    return k / k.sum()


_WINDOW = _gaussian_window()


def mscn(luma: np.ndarray) -> np.ndarray:
    """Mean-subtracted contrast-normalized map: (I - mu) / (sigma + 1).

    Local moments from a normalized 7x7 Gaussian window with symmetric
    boundary extension.
    """
    h, w = luma.shape
    if h < MSCN_WINDOW or w < MSCN_WINDOW:
        raise FrameTooSmall(f"need >= {MSCN_WINDOW}x{MSCN_WINDOW}, got {h}x{w}")
    img = luma.astype(np.float64)
    mu = correlate(img, _WINDOW, mode="reflect")
    var = correlate(img * img, _WINDOW, mode="reflect") - mu * mu
    sigma = np.sqrt(np.maximum(var, 0.0))
    return (img - mu) / (sigma + 1.0)


def local_sigma(luma: np.ndarray) -> np.ndarray:
    """The denominator field of the MSCN map; a local-sharpness proxy."""
    img = luma.astype(np.float64)
    mu = correlate(img, _WINDOW, mode="reflect")
    var = correlate(img * img, _WINDOW, mode="reflect") - mu * mu
    return np.sqrt(np.maximum(var, 0.0))


def _ggd_ratio(alpha):
    return gamma_fn(2.0 / alpha) ** 2 / (gamma_fn(1.0 / alpha) * gamma_fn(3.0 / alpha))


def _solve_ggd_alpha(rho, lo=0.1, hi=10.0, tol=1e-8):
    """Bisection for alpha with GGD moment ratio equal to rho.

    The ratio is strictly increasing in alpha; out-of-range targets clamp
    to the search bounds.
    """
    f_lo = _ggd_ratio(lo) - rho
    f_hi = _ggd_ratio(hi) - rho
    if f_lo >= 0:
        return lo
    if f_hi <= 0:
        return hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _ggd_ratio(mid) - rho <= 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def fit_ggd(samples) -> GGDParams:
    """Moment-matching GGD fit; sigma is the RMS of the samples."""
    x = np.asarray(samples, dtype=np.float64).ravel()
    if x.size == 0 or not np.all(np.isfinite(x)) or np.all(x == 0):
        raise DegenerateSamples("GGD fit needs finite, not-all-zero samples")
    m2 = np.mean(x * x)
    m1 = np.mean(np.abs(x))
    rho = (m1 * m1) / m2
    alpha = _solve_ggd_alpha(rho)
    return GGDParams(alpha=alpha, sigma=float(np.sqrt(m2)))


def fit_aggd(samples) -> AGGDParams:
    """Asymmetric moment-matching fit with side-conditional RMS scales."""
    x = np.asarray(samples, dtype=np.float64).ravel()
    if x.size == 0 or not np.all(np.isfinite(x)) or np.all(x == 0):
        raise DegenerateSamples("AGGD fit needs finite, not-all-zero samples")
    left = x[x < 0]
    right = x[x > 0]
    if left.size == 0 or right.size == 0:
        raise OneSidedSamples("AGGD fit needs samples of both signs")
    sigma_l = float(np.sqrt(np.mean(left * left)))
    sigma_r = float(np.sqrt(np.mean(right * right)))
    gamma_hat = sigma_l / sigma_r
    rhat = np.mean(np.abs(x)) ** 2 / np.mean(x * x)
    rhat_norm = rhat * (gamma_hat**3 + 1.0) * (gamma_hat + 1.0) / (gamma_hat**2 + 1.0) ** 2
    alpha = _solve_ggd_alpha(rhat_norm)
    # mean of the fitted AGGD
    beta_l = sigma_l * np.sqrt(gamma_fn(1.0 / alpha) / gamma_fn(3.0 / alpha))
    beta_r = sigma_r * np.sqrt(gamma_fn(1.0 / alpha) / gamma_fn(3.0 / alpha))
    eta = (beta_r - beta_l) * gamma_fn(2.0 / alpha) / gamma_fn(1.0 / alpha)
    return AGGDParams(alpha=alpha, sigma_l=sigma_l, sigma_r=sigma_r, eta=float(eta))


_ORIENTATION_SLICES = {
    "h": lambda m: m[:, :-1] * m[:, 1:],
    "v": lambda m: m[:-1, :] * m[1:, :],
    "d1": lambda m: m[:-1, :-1] * m[1:, 1:],
    "d2": lambda m: m[1:, :-1] * m[:-1, 1:],
}


def _downsample2(img):
    """2x low-pass decimation by 2x2 block averaging."""
    h, w = img.shape
    img = img[: h - h % 2, : w - w % 2]
    return 0.25 * (img[0::2, 0::2] + img[0::2, 1::2] + img[1::2, 0::2] + img[1::2, 1::2])


def _nss_features_one_scale(mscn_map):
    ggd = fit_ggd(mscn_map)
    feats = [ggd.alpha, ggd.sigma**2]
    for key in ("h", "v", "d1", "d2"):
        prod = _ORIENTATION_SLICES[key](mscn_map)
        aggd = fit_aggd(prod)
        feats.extend([aggd.alpha, aggd.eta, aggd.sigma_l**2, aggd.sigma_r**2])
    return feats


def spatial_nss(luma: np.ndarray) -> np.ndarray:
    """36-dim spatial NSS vector: 2 scales x (GGD + 4 orientation AGGDs)."""
    h, w = luma.shape
    if h < 32 or w < 32:
        raise FrameTooSmall(f"need >= 32x32, got {h}x{w}")
    img = luma.astype(np.float64)
    feats = []
    for scale in range(2):
        if scale > 0:
            img = _downsample2(img)
        feats.extend(_nss_features_one_scale(mscn(img)))
    return np.array(feats, dtype=np.float64)


def s_nss_video(seq: FrameSequence, stride: int = 10) -> np.ndarray:
    """Element-wise mean of per-frame spatial NSS over subsampled frames."""
    sub = subsample_frames(seq, stride)
    if len(sub) == 0:
        raise TooFewFrames("no frames to pool")
    return np.mean([spatial_nss(f.luma) for f in sub.frames], axis=0)


brisque_features = s_nss_video


def _frame_patches(luma, patch=PATCH_SIZE):
    h, w = luma.shape
    for top in range(0, h - patch + 1, patch):
        for left in range(0, w - patch + 1, patch):
            yield top, left


def _patch_features(luma, tops_lefts, patch=PATCH_SIZE):
    """36-dim features per patch; scale-2 stats from the downsampled frame."""
    img = luma.astype(np.float64)
    m1 = mscn(img)
    img2 = _downsample2(img)
    m2 = mscn(img2)
    feats = []
    for top, left in tops_lefts:
        f = _nss_features_one_scale(m1[top : top + patch, left : left + patch])
        t2, l2, p2 = top // 2, left // 2, patch // 2
        f.extend(_nss_features_one_scale(m2[t2 : t2 + p2, l2 : l2 + p2]))
        feats.append(f)
    return np.array(feats, dtype=np.float64)


def fit_pristine_model(corpus, patch=PATCH_SIZE) -> PristineModel:
    """Fit the pristine feature model on the sharpest patches of a corpus.

    Patches with local sharpness >= 0.75 x the frame's peak patch sharpness
    are kept; covariance is ridge-regularized.
    """
    if not corpus:
        raise EmptyCorpus("no frames in pristine corpus")
    all_feats = []
    for luma in corpus:
        locs = list(_frame_patches(luma, patch))
        if not locs:
            raise FrameTooSmall(f"frame {luma.shape} too small for {patch}x{patch} patches")
        sig = local_sigma(luma)
        sharp = np.array([sig[t : t + patch, l : l + patch].mean() for t, l in locs])
        keep = [loc for loc, s in zip(locs, sharp) if s >= SHARPNESS_FRACTION * sharp.max()]
        all_feats.append(_patch_features(luma, keep, patch))
    feats = np.vstack(all_feats)
    mean = feats.mean(axis=0)
    centered = feats - mean
    if feats.shape[0] > 1:
        cov = centered.T @ centered / (feats.shape[0] - 1)
    else:
        cov = np.zeros((feats.shape[1], feats.shape[1]))
    cov = 0.5 * (cov + cov.T) + COV_RIDGE * np.eye(feats.shape[1])
    return PristineModel(mean=mean, cov=cov)


def niqe_frame_score(luma: np.ndarray, model: PristineModel, patch=PATCH_SIZE) -> float:
    """Mahalanobis-style distance between frame-patch and pristine statistics."""
    locs = list(_frame_patches(luma, patch))
    if not locs:
        raise FrameTooSmall(f"frame {luma.shape} too small for {patch}x{patch} patches")
    feats = _patch_features(luma, locs, patch)
    return mahalanobis_distance(model.mean, model.cov, feats.mean(axis=0), _cov_of(feats))


def _cov_of(feats):
    if feats.shape[0] > 1:
        c = np.cov(feats, rowvar=False)
        return 0.5 * (c + c.T)
    return np.zeros((feats.shape[1], feats.shape[1]))


def mahalanobis_distance(mean1, cov1, mean2, cov2) -> float:
    """sqrt((v1-v2)^T ((S1+S2)/2)^-1 (v1-v2)) with a symmetric pseudo-inverse."""
    diff = np.asarray(mean1, dtype=np.float64) - np.asarray(mean2, dtype=np.float64)
    pooled = 0.5 * (np.asarray(cov1) + np.asarray(cov2))
    pooled = 0.5 * (pooled + pooled.T) + COV_RIDGE * np.eye(len(diff))
    try:
        inv = np.linalg.pinv(pooled)
    except np.linalg.LinAlgError as exc:
        raise SingularCovariance(str(exc)) from exc
    d2 = float(diff @ inv @ diff)
    return float(np.sqrt(max(d2, 0.0)))


def niqe_score(seq_or_frame, model: PristineModel) -> float:
    """Video score: mean of per-frame distances (single frames score directly)."""
    if isinstance(seq_or_frame, FrameSequence):
        if len(seq_or_frame) == 0:
            raise TooFewFrames("empty sequence")
        return float(np.mean([niqe_frame_score(f.luma, model) for f in seq_or_frame.frames]))
    return niqe_frame_score(np.asarray(seq_or_frame), model)


HAAR_LEVELS = 3


def haar_temporal_details(stack: np.ndarray, levels: int = HAAR_LEVELS):
    """Per-level Haar detail coefficients of per-pixel time series.

    Non-overlapping dyadic blocks: each level halves the (approximation)
    time axis; returns a list of (n_t, H, W) detail arrays.
    """
    approx = stack.astype(np.float64)
    details = []
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    for _ in range(levels):
        n = approx.shape[0] - approx.shape[0] % 2
        a = approx[:n:2]
        b = approx[1:n:2]
        details.append((a - b) * inv_sqrt2)
        approx = (a + b) * inv_sqrt2
    return details


def temporal_nss(seq: FrameSequence, levels: int = HAAR_LEVELS) -> np.ndarray:
    """9-dim temporal NSS: per Haar level (alpha, sigma, mean |coeff|).

    Degenerate (all-zero) levels encode the sentinel triple (0, 0, 0) so
    static segments don't fail whole videos.
    """
    if len(seq) < 2**levels:
        raise TooFewFrames(f"need >= {2**levels} frames, got {len(seq)}")
    feats = []
    for det in haar_temporal_details(seq.luma_stack(), levels):
        coeffs = det.ravel()
        energy = float(np.mean(np.abs(coeffs))) if coeffs.size else 0.0
        try:
            ggd = fit_ggd(coeffs)
            feats.extend([ggd.alpha, ggd.sigma, energy])
        except DegenerateSamples:
            feats.extend([0.0, 0.0, 0.0])
    return np.array(feats, dtype=np.float64)


# --- pristine model serialization ---------------------------------------

_MAGIC = b"NIQE"


def save_pristine_model(model: PristineModel, path):
    """Versioned little-endian binary: magic, u32 dim, f64 mean, f64 cov."""
    dim = model.mean.shape[0]
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", dim))
        fh.write(model.mean.astype("<f8").tobytes())
        fh.write(model.cov.astype("<f8").tobytes())


def load_pristine_model(path) -> PristineModel:
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise SingularCovariance("bad pristine model file magic")
        (dim,) = struct.unpack("<I", fh.read(4))
        mean = np.frombuffer(fh.read(8 * dim), dtype="<f8").copy()
        cov = np.frombuffer(fh.read(8 * dim * dim), dtype="<f8").copy().reshape(dim, dim)
    return PristineModel(mean=mean, cov=cov)
