"""Raw video ingestion: Y4M parsing, color conversion, clip admission, subsampling.

Y4M (YUV4MPEG2) is the canonical input; decoding compressed containers is
delegated to an external transcoder. Parsing is bit-exact and round-trippable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptySequence,
    MalformedHeader,
    MissingChroma,
    TruncatedFrame,
    UnsupportedColorspace,
    ZeroStride,
)

LAYOUT_MONO = "mono"
LAYOUT_420 = "420"
LAYOUT_444 = "444"

_COLORSPACE_TO_LAYOUT = {
    "C420": LAYOUT_420,
    "C420jpeg": LAYOUT_420,
    "C420mpeg2": LAYOUT_420,
    "C444": LAYOUT_444,
    "Cmono": LAYOUT_MONO,
}


@dataclass
class Frame:
    """One decoded frame: 8-bit luma plus optional subsampled chroma."""

    luma: np.ndarray
    chroma_u: np.ndarray | None = None
    chroma_v: np.ndarray | None = None
    layout: str = LAYOUT_MONO

    def __post_init__(self):
        if self.layout not in (LAYOUT_MONO, LAYOUT_420, LAYOUT_444):
            raise UnsupportedColorspace(self.layout)
        has_chroma = self.chroma_u is not None and self.chroma_v is not None
        if (self.layout != LAYOUT_MONO) != has_chroma:
            raise MissingChroma(f"layout {self.layout} inconsistent with chroma planes")


@dataclass
class FrameSequence:
    """Decoded video: ordered frames with shared geometry and frame rate."""

    width: int
    height: int
    fps_num: int
    fps_den: int
    frames: list[Frame] = field(default_factory=list)

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise EmptySequence(f"bad dimensions {self.width}x{self.height}")
        if self.fps_num <= 0 or self.fps_den <= 0:
            raise EmptySequence("bad frame rate")

    def __len__(self):
        return len(self.frames)

    @property
    def layout(self):
        return self.frames[0].layout if self.frames else LAYOUT_MONO

    def luma_stack(self):
        """All luma planes as one float64 (F, H, W) array."""
        return np.stack([f.luma.astype(np.float64) for f in self.frames])


@dataclass
class RGBFrame:
    """Real-valued RGB planes in [0, 255], all with identical shape."""

    r: np.ndarray
    g: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        if not (self.r.shape == self.g.shape == self.b.shape):
            raise MissingChroma("rgb plane shapes differ")

    def stack(self):
        return np.stack([self.r, self.g, self.b])


@dataclass
class ClipMeta:
    """Admission metadata for one candidate clip."""

    id: str
    width: int
    height: int
    duration: float

    @property
    def portrait(self):
        return self.height > self.width


@dataclass
class AdmissionReport:
    accepted: bool
    violations: list[str]


def _chroma_shape(width, height, layout):
    if layout == LAYOUT_420:
        return ((height + 1) // 2, (width + 1) // 2)
    if layout == LAYOUT_444:
        return (height, width)
    return None


def parse_y4m(stream: bytes, strict: bool = True) -> FrameSequence:
    """Parse a YUV4MPEG2 byte stream.

    In strict mode a truncated final frame raises TruncatedFrame; lenient
    mode drops it silently.
    """
    newline = stream.find(b"\n")
    if newline < 0 or not stream.startswith(b"YUV4MPEG2"):
        raise MalformedHeader("missing YUV4MPEG2 signature line")
    header = stream[:newline].decode("ascii", errors="replace")
    tokens = header.split(" ")[1:]

    width = height = None
    fps_num = fps_den = None
    layout = LAYOUT_420  # y4m default colorspace is 4:2:0
    for tok in tokens:
        if not tok:
            continue
        if tok[0] == "W":
            width = int(tok[1:])
        elif tok[0] == "H":
            height = int(tok[1:])
        elif tok[0] == "F":
            num, _, den = tok[1:].partition(":")
            fps_num, fps_den = int(num), int(den or "1")
        elif tok[0] == "C":
            if tok not in _COLORSPACE_TO_LAYOUT:
                raise UnsupportedColorspace(tok)
            layout = _COLORSPACE_TO_LAYOUT[tok]
        # I/A/X parameters are accepted and ignored

    if width is None or height is None or fps_num is None:
        raise MalformedHeader(f"header missing W/H/F tokens: {header!r}")

    y_size = width * height
    c_shape = _chroma_shape(width, height, layout)
    c_size = 0 if c_shape is None else c_shape[0] * c_shape[1]
    frame_size = y_size + 2 * c_size

    frames = []
    pos = newline + 1
    n = len(stream)
    while pos < n:
        marker_end = stream.find(b"\n", pos)
        if marker_end < 0 or not stream[pos:marker_end].startswith(b"FRAME"):
            raise TruncatedFrame(f"bad FRAME marker at offset {pos}")
        payload_start = marker_end + 1
        payload = stream[payload_start : payload_start + frame_size]
        if len(payload) < frame_size:
            if strict:
                raise TruncatedFrame(
                    f"frame {len(frames)} payload {len(payload)} < {frame_size} bytes"
                )
            break
        buf = np.frombuffer(payload, dtype=np.uint8)
        luma = buf[:y_size].reshape(height, width)
        if c_shape is None:
            frames.append(Frame(luma=luma, layout=layout))
        else:
            u = buf[y_size : y_size + c_size].reshape(c_shape)
            v = buf[y_size + c_size :].reshape(c_shape)
            frames.append(Frame(luma=luma, chroma_u=u, chroma_v=v, layout=layout))
        pos = payload_start + frame_size

    return FrameSequence(width=width, height=height, fps_num=fps_num, fps_den=fps_den, frames=frames)


def serialize_y4m(seq: FrameSequence) -> bytes:
    """Inverse of parse_y4m; round-trips planes bit-exactly."""
    layout_tag = {LAYOUT_MONO: "Cmono", LAYOUT_420: "C420", LAYOUT_444: "C444"}[seq.layout]
    out = [f"YUV4MPEG2 W{seq.width} H{seq.height} F{seq.fps_num}:{seq.fps_den} {layout_tag}\n".encode()]
    for f in seq.frames:
        out.append(b"FRAME\n")
        out.append(np.ascontiguousarray(f.luma, dtype=np.uint8).tobytes())
        if f.chroma_u is not None:
            out.append(np.ascontiguousarray(f.chroma_u, dtype=np.uint8).tobytes())
            out.append(np.ascontiguousarray(f.chroma_v, dtype=np.uint8).tobytes())
    return b"".join(out)


def _upsample_nn(plane, height, width):
    up = np.repeat(np.repeat(plane, 2, axis=0), 2, axis=1)
    return up[:height, :width]


def to_rgb(frame: Frame, full_range: bool = False) -> RGBFrame:
    """BT.601 YUV -> RGB; limited (studio) range by default.

    4:2:0 chroma is upsampled by nearest neighbor before conversion.
    """
    if frame.layout == LAYOUT_MONO:
        raise MissingChroma("frame has no chroma planes")
    h, w = frame.luma.shape
    y = frame.luma.astype(np.float64)
    u = frame.chroma_u.astype(np.float64)
    v = frame.chroma_v.astype(np.float64)
    if frame.layout == LAYOUT_420:
        u = _upsample_nn(u, h, w)
        v = _upsample_nn(v, h, w)

    if full_range:
        yy = y
        scale_c = 1.0
    else:
        yy = (255.0 / 219.0) * (y - 16.0)
        scale_c = 255.0 / 224.0
    cb = (u - 128.0) * scale_c
    cr = (v - 128.0) * scale_c

    r = yy + 1.402 * cr
    g = yy - (1.772 * 0.114 / 0.587) * cb - (1.402 * 0.299 / 0.587) * cr
    b = yy + 1.772 * cb
    return RGBFrame(
        r=np.clip(r, 0.0, 255.0),
        g=np.clip(g, 0.0, 255.0),
        b=np.clip(b, 0.0, 255.0),
    )


# Dataset admission bounds for portrait mobile clips.
HEIGHT_BOUNDS = (900, 1500)
WIDTH_BOUNDS = (500, 800)
DURATION_BOUNDS = (10.0, 65.0)


def validate_clip(meta: ClipMeta) -> AdmissionReport:
    """Check a clip against the dataset admission rules; rejection is a value."""
    violations = []
    if not HEIGHT_BOUNDS[0] <= meta.height <= HEIGHT_BOUNDS[1]:
        violations.append("height")
    if not WIDTH_BOUNDS[0] <= meta.width <= WIDTH_BOUNDS[1]:
        violations.append("width")
    if not DURATION_BOUNDS[0] <= meta.duration <= DURATION_BOUNDS[1]:
        violations.append("duration")
    if not meta.portrait:
        violations.append("portrait")
    return AdmissionReport(accepted=not violations, violations=violations)


def subsample_frames(seq: FrameSequence, stride: int) -> FrameSequence:
    """Keep frames 0, stride, 2*stride, ...; metadata preserved."""
    if stride < 1:
        raise ZeroStride(f"stride must be >= 1, got {stride}")
    return FrameSequence(
        width=seq.width,
        height=seq.height,
        fps_num=seq.fps_num,
        fps_den=seq.fps_den,
        frames=seq.frames[::stride],
    )
