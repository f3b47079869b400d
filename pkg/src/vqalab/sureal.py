"""Subjective raw-score processing and maximum-likelihood score recovery.

Raw opinion scores are z-scored per subject-session, rescaled to [0, 100],
and either averaged into MOS or decomposed by an alternating-ascent MLE into
per-video true quality, per-subject bias/inconsistency, and per-content
ambiguity. Consistency analysis and outlier flagging operate on the same
structures.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateSession,
    InsufficientData,
    UnratedVideo,
)


@dataclass
class OpinionEntry:
    subject: str
    video: str
    session: int
    score: float
    timestamp: str = ""


@dataclass
class OpinionMatrix:
    """Sparse subject x video x session score records.

    At most one entry per (subject, video); presence doubles as the
    rated-indicator.
    """

    entries: list[OpinionEntry] = field(default_factory=list)

    def __post_init__(self):
        seen = set()
        for e in self.entries:
            key = (e.subject, e.video)
            if key in seen:
                raise InsufficientData(f"duplicate rating for {key}")
            seen.add(key)

    @property
    def subjects(self):
        return sorted({e.subject for e in self.entries})

    @property
    def videos(self):
        return sorted({e.video for e in self.entries})

    @classmethod
    def from_csv(cls, path):
        entries = []
        with open(path, newline="") as fh:
            rows = [r for r in fh if not r.startswith("#")]
        for rec in csv.DictReader(rows):
            entries.append(
                OpinionEntry(
                    subject=rec["subject_id"],
                    video=rec["video_id"],
                    session=int(rec["session"]),
                    score=float(rec["score"]),
                    timestamp=rec.get("timestamp", ""),
                )
            )
        return cls(entries=entries)


@dataclass
class ZScoreMatrix:
    """Same sparsity as the raw matrix, holding z (and rescaled z') values."""

    entries: list[OpinionEntry]
    clamped: int = 0

    @property
    def subjects(self):
        return sorted({e.subject for e in self.entries})

    @property
    def videos(self):
        return sorted({e.video for e in self.entries})


def normalize_zscores(m: OpinionMatrix) -> ZScoreMatrix:
    """Per subject-session z-scores (sample std), sessions concatenated."""
    groups = {}
    for e in m.entries:
        groups.setdefault((e.subject, e.session), []).append(e)
    stats = {}
    for (subj, sess), es in groups.items():
        scores = np.array([e.score for e in es])
        if scores.size < 2:
            raise DegenerateSession(subj, sess)
        mu = scores.mean()
        sigma = scores.std(ddof=1)
        if sigma == 0:
            raise DegenerateSession(subj, sess)
        stats[(subj, sess)] = (mu, sigma)
    out = []
    for e in m.entries:
        mu, sigma = stats[(e.subject, e.session)]
        out.append(
            OpinionEntry(
                subject=e.subject,
                video=e.video,
                session=e.session,
                score=(e.score - mu) / sigma,
                timestamp=e.timestamp,
            )
        )
    return ZScoreMatrix(entries=out)


def rescale_scores(z: ZScoreMatrix) -> ZScoreMatrix:
    """Map z to z' = 100(z + 5)/10; out-of-range values clamp and count."""
    out = []
    clamped = 0
    for e in z.entries:
        val = 10.0 * (e.score + 5.0)
        if val < 0.0 or val > 100.0:
            clamped += 1
            val = min(max(val, 0.0), 100.0)
        out.append(
            OpinionEntry(
                subject=e.subject,
                video=e.video,
                session=e.session,
                score=val,
                timestamp=e.timestamp,
            )
        )
    return ZScoreMatrix(entries=out, clamped=clamped)


def compute_mos(z: ZScoreMatrix):
    """Per-video mean, std (ddof=1 when n > 1), and rater count.

    Returns (video_ids, mos, std, n) with videos in sorted id order.
    """
    per_video = {}
    for e in z.entries:
        per_video.setdefault(e.video, []).append(e.score)
    if not per_video:
        raise UnratedVideo("no ratings at all")
    videos = sorted(per_video)
    mos = np.array([np.mean(per_video[v]) for v in videos])
    std = np.array([np.std(per_video[v], ddof=1) if len(per_video[v]) > 1 else 0.0 for v in videos])
    n = np.array([len(per_video[v]) for v in videos])
    return videos, mos, std, n


@dataclass
class SurealParams:
    videos: list[str]
    subjects: list[str]
    x_e: np.ndarray
    b_s: np.ndarray
    v_s: np.ndarray
    a_c: np.ndarray
    loglik: float
    loglik_trace: list[float]
    converged: bool


V_FLOOR = 1e-6
A_FLOOR = 1e-4


def _loglik(z, mask, x, b, v2, a2):
    var = v2[:, None] + a2[None, :]
    resid = z - x[None, :] - b[:, None]
    terms = -0.5 * np.log(2.0 * np.pi * var) - resid**2 / (2.0 * var)
    return float(np.sum(terms[mask]))


def solve_sureal(m: OpinionMatrix, tol: float = 1e-6, max_iter: int = 500) -> SurealParams:
    """Alternating coordinate-ascent MLE for the score-formation model.

    Scores are modeled as x_e + N(b_s, v_s^2) + N(0, a_c^2). Closed-form
    precision-weighted updates for x_e and b_s; safeguarded Newton steps for
    the variances; mean(b_s) = 0 pins the shared-offset ambiguity. The
    log-likelihood is non-decreasing every sweep.
    """
    subjects = m.subjects
    videos = m.videos
    s_idx = {s: i for i, s in enumerate(subjects)}
    v_idx = {v: j for j, v in enumerate(videos)}
    ns, nv = len(subjects), len(videos)

    z = np.zeros((ns, nv))
    mask = np.zeros((ns, nv), dtype=bool)
    for e in m.entries:
        z[s_idx[e.subject], v_idx[e.video]] = e.score
        mask[s_idx[e.subject], v_idx[e.video]] = True

    if np.any(mask.sum(axis=0) < 2):
        raise InsufficientData("every video needs >= 2 raters")
    if np.any(mask.sum(axis=1) < 2):
        raise InsufficientData("every subject needs >= 2 ratings")

    # init: naive means, unit variances
    x = np.where(mask, z, np.nan)
    x = np.nanmean(x, axis=0)
    b = np.zeros(ns)
    v2 = np.ones(ns)
    a2 = np.full(nv, A_FLOOR**2)

    trace = [_loglik(z, mask, x, b, v2, a2)]
    converged = False
    for _ in range(max_iter):
        x_old, b_old = x.copy(), b.copy()
        v2_old, a2_old = v2.copy(), a2.copy()

        w = np.where(mask, 1.0 / (v2[:, None] + a2[None, :]), 0.0)

        x = np.sum(w * (z - b[:, None]), axis=0) / np.sum(w, axis=0)
        b = np.sum(w * (z - x[None, :]), axis=1) / np.sum(w, axis=1)
        # identifiability: shift the common offset into x
        shift = b.mean()
        b -= shift
        x += shift

        resid = z - x[None, :] - b[:, None]
        v2 = _newton_variance(resid, mask, v2, a2, axis=1)
        a2 = _newton_variance(resid.T, mask.T, a2, v2, axis=1)
        a2 = np.maximum(a2, A_FLOOR**2)
        v2 = np.maximum(v2, V_FLOOR**2)

        trace.append(_loglik(z, mask, x, b, v2, a2))

        delta = max(
            np.max(np.abs(x - x_old)),
            np.max(np.abs(b - b_old)),
            np.max(np.abs(np.sqrt(v2) - np.sqrt(v2_old))),
            np.max(np.abs(np.sqrt(a2) - np.sqrt(a2_old))),
        )
        if delta < tol:
            converged = True
            break

    return SurealParams(
        videos=videos,
        subjects=subjects,
        x_e=x,
        b_s=b,
        v_s=np.sqrt(v2),
        a_c=np.sqrt(a2),
        loglik=trace[-1],
        loglik_trace=trace,
        converged=converged,
    )


def _newton_variance(resid, mask, own_var, other_var, axis, steps=3):
    """Safeguarded per-row Newton ascent on the row's own variance.

    Each row's likelihood depends only on its own variance given the rest,
    so independent (vectorized) updates keep the global log-likelihood
    monotone. Steps that would decrease a row's likelihood are halved away.
    """
    r2 = resid**2
    own = own_var.copy()
    any_mask = mask.any(axis=1)

    def row_ll(cand):
        var = cand[:, None] + other_var[None, :]
        terms = np.where(mask, -0.5 * np.log(var) - r2 / (2.0 * var), 0.0)
        return terms.sum(axis=1)

    base = row_ll(own)
    for _ in range(steps):
        var = own[:, None] + other_var[None, :]
        w = np.where(mask, 1.0 / var, 0.0)
        g = 0.5 * np.sum(w * w * r2 - w, axis=1)
        h = np.sum(0.5 * w * w - w**3 * r2, axis=1)
        fallback = np.sign(g) * 0.1 * np.maximum(own, 1e-8)
        step = np.where(h < 0, -g / np.where(h < 0, h, -1.0), fallback)
        new = own + step

        # backtrack rows into the feasible, non-decreasing region
        good = np.zeros_like(any_mask)
        for _ in range(30):
            remaining = ~good
            if not remaining.any():
                break
            feasible = new > V_FLOOR**2
            cand_ll = row_ll(np.where(feasible, new, own))
            newly = remaining & feasible & (cand_ll >= base - 1e-12)
            good |= newly
            halve = remaining & ~newly
            step = np.where(halve, 0.5 * step, step)
            new = np.where(halve, own + step, new)
        new = np.where(good, new, own)

        new_ll = row_ll(new)
        accept = (new_ll >= base) & any_mask
        own = np.where(accept, new, own)
        base = np.where(accept, new_ll, base)
    return own


@dataclass
class ConsistencyReport:
    inter_plcc: float
    inter_srocc: float
    intra_plcc: float
    intra_srocc: float


def _pearson(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    xc = x - x.mean()
    yc = y - y.mean()
    denom = np.sqrt(np.sum(xc * xc) * np.sum(yc * yc))
    if denom == 0:
        return np.nan
    return float(np.sum(xc * yc) / denom)


def _spearman(x, y):
    from .evaluation import srocc

    return srocc(x, y)


def consistency_analysis(m: OpinionMatrix, splits: int = 100, seed: int = 0) -> ConsistencyReport:
    """Inter-subject (random half-splits) and intra-subject consistency.

    Operates on rescaled z-scores; medians over splits / subjects.
    """
    z = rescale_scores(normalize_zscores(m))
    per_video = {}
    for e in z.entries:
        per_video.setdefault(e.video, []).append(e.score)
    videos = sorted(per_video)

    inter_p, inter_s = [], []
    for split in range(splits):
        rng = np.random.default_rng(np.random.SeedSequence((seed, split)))
        mos_a, mos_b = [], []
        for v in videos:
            scores = np.array(per_video[v])
            perm = rng.permutation(len(scores))
            half = len(scores) // 2
            mos_a.append(scores[perm[:half]].mean())
            mos_b.append(scores[perm[half : 2 * half]].mean())
        inter_p.append(_pearson(mos_a, mos_b))
        inter_s.append(_spearman(np.array(mos_a), np.array(mos_b)))

    _, mos, _, _ = compute_mos(z)
    mos_by_video = dict(zip(videos, mos))
    per_subject = {}
    for e in z.entries:
        per_subject.setdefault(e.subject, []).append((e.video, e.score))
    intra_p, intra_s = [], []
    for subj in sorted(per_subject):
        pairs = per_subject[subj]
        own = np.array([s for _, s in pairs])
        ref = np.array([mos_by_video[v] for v, _ in pairs])
        intra_p.append(_pearson(own, ref))
        intra_s.append(_spearman(own, ref))

    return ConsistencyReport(
        inter_plcc=float(np.median(inter_p)),
        inter_srocc=float(np.median(inter_s)),
        intra_plcc=float(np.median(intra_p)),
        intra_srocc=float(np.median(intra_s)),
    )


def flag_outlier_subjects(p: SurealParams, k: float = 2.5) -> list[str]:
    """Flag subjects whose bias or inconsistency sits k MADs past the median.

    Reporting only; never mutates scores. Panels too small for a MAD are
    never flagged.
    """
    if len(p.subjects) < 3:
        return []
    flags = []
    v_med = np.median(p.v_s)
    v_mad = np.median(np.abs(p.v_s - v_med))
    ab = np.abs(p.b_s)
    b_med = np.median(ab)
    b_mad = np.median(np.abs(ab - b_med))
    for i, subj in enumerate(p.subjects):
        noisy = v_mad > 0 and p.v_s[i] > v_med + k * v_mad
        biased = b_mad > 0 and ab[i] > b_med + k * b_mad
        if noisy or biased:
            flags.append(subj)
    return flags
