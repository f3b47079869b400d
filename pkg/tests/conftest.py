"""Shared builders for synthetic video content used across the test suite."""

import numpy as np
import pytest

from vqalab.media import Frame, FrameSequence, RGBFrame


def mono_sequence(stack, fps=(30, 1)):
    """uint8 (F, H, W) array -> mono FrameSequence."""
    stack = np.asarray(stack, dtype=np.uint8)
    frames = [Frame(luma=f, layout="mono") for f in stack]
    return FrameSequence(width=stack.shape[2], height=stack.shape[1],
                         fps_num=fps[0], fps_den=fps[1], frames=frames)


def seq444(y, u, v, fps=(30, 1)):
    """uint8 (F, H, W) planes -> 4:4:4 FrameSequence."""
    y = np.asarray(y, dtype=np.uint8)
    u = np.asarray(u, dtype=np.uint8)
    v = np.asarray(v, dtype=np.uint8)
    frames = [Frame(luma=yy, chroma_u=uu, chroma_v=vv, layout="444")
              for yy, uu, vv in zip(y, u, v)]
    return FrameSequence(width=y.shape[2], height=y.shape[1],
                         fps_num=fps[0], fps_den=fps[1], frames=frames)


def gray444(y, fps=(30, 1)):
    """Luma-only content carried in a 4:4:4 container (neutral chroma)."""
    y = np.asarray(y, dtype=np.uint8)
    flat = np.full_like(y, 128)
    return seq444(y, flat, flat, fps=fps)


def random_seq444(rng, frames=6, height=8, width=8):
    shape = (frames, height, width)
    return seq444(rng.integers(0, 256, shape), rng.integers(0, 256, shape),
                  rng.integers(0, 256, shape))


def random_rgb(rng, height=64, width=64):
    return RGBFrame(
        r=rng.uniform(0, 255, (height, width)),
        g=rng.uniform(0, 255, (height, width)),
        b=rng.uniform(0, 255, (height, width)),
    )


def textured_luma(rng, height, width, smooth=2.0):
    """Smoothed noise scaled to use most of the 8-bit range."""
    from scipy.ndimage import gaussian_filter

    base = gaussian_filter(rng.normal(size=(height, width)), smooth)
    base = (base - base.min()) / (base.max() - base.min())
    return (20 + 215 * base).astype(np.uint8)


def rgb_to_yuv444(rgb: RGBFrame):
    """Full-range BT.601 inverse; returns float planes (y, u, v)."""
    y = 0.299 * rgb.r + 0.587 * rgb.g + 0.114 * rgb.b
    u = (rgb.b - y) / 1.772 + 128.0
    v = (rgb.r - y) / 1.402 + 128.0
    return y, u, v


def sample_ggd(rng, alpha, sigma, n):
    """Inverse-moment generalized Gaussian sampler via the gamma distribution."""
    from scipy.special import gamma as g

    beta = sigma * np.sqrt(g(1.0 / alpha) / g(3.0 / alpha))
    mag = beta * rng.gamma(1.0 / alpha, 1.0, n) ** (1.0 / alpha)
    return mag * rng.choice([-1.0, 1.0], n)


def sample_aggd(rng, alpha, sigma_l, sigma_r, n):
    """Asymmetric GGD sampler: side chosen with probability proportional to
    the side scale, magnitudes from the matching half-GGD."""
    from scipy.special import gamma as g

    scale = np.sqrt(g(1.0 / alpha) / g(3.0 / alpha))
    beta_l, beta_r = sigma_l * scale, sigma_r * scale
    neg = rng.random(n) < beta_l / (beta_l + beta_r)
    mag = rng.gamma(1.0 / alpha, 1.0, n) ** (1.0 / alpha)
    return np.where(neg, -beta_l * mag, beta_r * mag)


def simulate_panel(rng, n_videos, n_subjects, x_range=(20.0, 80.0),
                   b_sigma=1.5, v_range=(0.5, 2.5), a_range=(0.1, 1.0)):
    """Forward-simulate the score-formation model; returns (matrix, truth)."""
    from vqalab.sureal import OpinionEntry, OpinionMatrix

    x = rng.uniform(*x_range, n_videos)
    b = rng.normal(0.0, b_sigma, n_subjects)
    b -= b.mean()
    v = rng.uniform(*v_range, n_subjects)
    a = rng.uniform(*a_range, n_videos)
    entries = []
    for i in range(n_subjects):
        for j in range(n_videos):
            score = x[j] + b[i] + rng.normal(0.0, np.sqrt(v[i] ** 2 + a[j] ** 2))
            entries.append(OpinionEntry(subject=f"s{i:03d}", video=f"v{j:04d}",
                                        session=1 + (j % 2), score=float(score)))
    truth = {"x": x, "b": b, "v": v, "a": a}
    return OpinionMatrix(entries=entries), truth


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# acceptance-gate verdict lines, echoed after capture ends so they always
# appear in the terminal output (one line per criterion)
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
