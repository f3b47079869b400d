"""Static plot-data emission: MOS histograms, score box data, hulls.

Outputs are CSV data files plus non-interactive SVG renderings.
"""

from __future__ import annotations

import csv
import io

import numpy as np

from .diversity import convex_hull_2d
from .errors import SchemaError

FIG7_PAIRS = (("si", "ti"), ("ci", "sharpness"), ("brightness", "contrast"))


def mos_histogram(mos, bin_width: float = 1.0):
    """Counts over fixed-width bins covering [floor(min), ceil(max)]."""
    mos = np.asarray(mos, dtype=np.float64)
    if mos.size == 0:
        raise SchemaError("empty MOS vector")
    lo = np.floor(mos.min() / bin_width) * bin_width
    hi = np.ceil(mos.max() / bin_width) * bin_width
    if hi == lo:
        hi = lo + bin_width
    edges = np.arange(lo, hi + bin_width / 2, bin_width)
    counts, edges = np.histogram(mos, bins=edges)
    return edges, counts


def subject_box_data(scores_by_subject: dict):
    """Five-number summary per subject for raw-score box plots."""
    rows = []
    for subj in sorted(scores_by_subject):
        s = np.sort(np.asarray(scores_by_subject[subj], dtype=np.float64))
        if s.size == 0:
            raise SchemaError(f"subject {subj} has no scores")
        rows.append({
            "subject_id": subj,
            "min": float(s[0]),
            "q1": float(np.percentile(s, 25)),
            "median": float(np.median(s)),
            "q3": float(np.percentile(s, 75)),
            "max": float(s[-1]),
        })
    return rows


def hull_csv(points) -> str:
    """CSV vertex list (x,y per row, CCW) of the points' convex hull."""
    hull = convex_hull_2d(points)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["x", "y"])
    for x, y in hull.vertices:
        writer.writerow([f"{x:g}", f"{y:g}"])
    return buf.getvalue()


def diversity_pair_points(profiles: list[dict], pair) -> list[tuple[float, float]]:
    xk, yk = pair
    return [(float(p[xk]), float(p[yk])) for p in profiles]


def render_scatter_hull_svg(points, path, title=""):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    hull = convex_hull_2d(points)
    fig, ax = plt.subplots(figsize=(4, 4))
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    ax.scatter(xs, ys, s=8, alpha=0.6)
    if len(hull.vertices) >= 3:
        vx = [v[0] for v in hull.vertices] + [hull.vertices[0][0]]
        vy = [v[1] for v in hull.vertices] + [hull.vertices[0][1]]
        ax.plot(vx, vy, "r-")
    ax.set_title(title)
    fig.savefig(path, format="svg")
    plt.close(fig)


def render_histogram_svg(mos, path, bin_width: float = 1.0, title="MOS histogram"):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    edges, counts = mos_histogram(mos, bin_width)
    fig, ax = plt.subplots(figsize=(5, 3))
    ax.bar(edges[:-1], counts, width=bin_width, align="edge")
    ax.set_title(title)
    fig.savefig(path, format="svg")
    plt.close(fig)
