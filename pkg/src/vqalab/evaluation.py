"""Benchmark protocol: correlation metrics, logistic mapping, split harness.

SROCC/KRCC are computed on raw predictions; PLCC/RMSE after fitting a
4-parameter logistic that places predictions on the MOS scale. Models are
compared over seeded random train/test splits with per-split CV-trained
regressors, reporting per-metric medians.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import ConstantInput, FitDiverged, LengthMismatch, TooFewItems
from .regression import train_regressor


def _check_pair(x, y, min_len=3):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise LengthMismatch(f"{x.shape} vs {y.shape}")
    if len(x) < min_len:
        raise TooFewItems(f"need >= {min_len} points")
    if np.all(x == x[0]) or np.all(y == y[0]):
        raise ConstantInput("constant input vector")
    return x, y


def midranks(x):
    """Ranks 1..n with ties assigned the mean of their rank range."""
    x = np.asarray(x, dtype=np.float64)
    order = np.argsort(x, kind="stable")
    ranks = np.empty(len(x))
    i = 0
    while i < len(x):
        j = i
        while j + 1 < len(x) and x[order[j + 1]] == x[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def plcc(x, y) -> float:
    """Pearson linear correlation."""
    x, y = _check_pair(x, y)
    xc = x - x.mean()
    yc = y - y.mean()
    return float(np.sum(xc * yc) / np.sqrt(np.sum(xc * xc) * np.sum(yc * yc)))


def srocc(x, y) -> float:
    """Spearman rank correlation: Pearson on midranks."""
    x, y = _check_pair(x, y)
    return float(plcc(midranks(x), midranks(y)))


def krcc(x, y) -> float:
    """Kendall tau-b (tie-corrected), O(n^2) pair counting."""
    x, y = _check_pair(x, y)
    dx = np.sign(x[:, None] - x[None, :])
    dy = np.sign(y[:, None] - y[None, :])
    iu = np.triu_indices(len(x), k=1)
    prod = dx[iu] * dy[iu]
    concordant = np.sum(prod > 0)
    discordant = np.sum(prod < 0)
    tx = np.sum(dx[iu] == 0)
    ty = np.sum(dy[iu] == 0)
    n0 = len(iu[0])
    denom = np.sqrt((n0 - tx) * (n0 - ty))
    if denom == 0:
        raise ConstantInput("all pairs tied")
    return float((concordant - discordant) / denom)


def rmse(x, y) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise LengthMismatch(f"{x.shape} vs {y.shape}")
    return float(np.sqrt(np.mean((x - y) ** 2)))


@dataclass
class LogisticParams:
    beta1: float
    beta2: float
    beta3: float
    beta4: float
    paper_literal: bool = False

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self.paper_literal:
            # printed form: argument -x + beta3/|beta4|
            arg = -x + self.beta3 / abs(self.beta4)
        else:
            arg = -(x - self.beta3) / abs(self.beta4)
        return self.beta2 + (self.beta1 - self.beta2) / (1.0 + np.exp(np.clip(arg, -500, 500)))


def fit_logistic(pred, mos, paper_literal: bool = False) -> LogisticParams:
    """Least-squares 4-parameter logistic fit by variable projection.

    The curve is linear in (beta1, beta2), so those are solved in closed
    form for every (beta3, beta4) candidate and only the two nonlinear
    parameters are searched (Nelder-Mead). Initialization: beta3 =
    mean(pred), beta4 = std(pred)/4. paper_literal=True keeps the printed
    functional form (jointly non-identifiable beta3/beta4; kept for
    comparison only).
    """
    pred, mos = _check_pair(pred, mos, min_len=5)

    def weights(b3, b4):
        if paper_literal:
            arg = -pred + b3 / max(abs(b4), 1e-12)
        else:
            arg = -(pred - b3) / max(abs(b4), 1e-12)
        return 1.0 / (1.0 + np.exp(np.clip(arg, -500, 500)))

    def solve_linear(b34):
        s = weights(b34[0], b34[1])
        a = np.stack([s, 1.0 - s], axis=1)
        coef, *_ = np.linalg.lstsq(a, mos, rcond=None)
        r = a @ coef - mos
        return float(r @ r), coef

    def resid(b):
        curve = LogisticParams(*b, paper_literal=paper_literal)
        return float(np.sum((curve(pred) - mos) ** 2))

    b34_0 = np.array([pred.mean(), max(pred.std() / 4.0, 1e-6)])
    res = minimize(lambda b34: solve_linear(b34)[0], b34_0, method="Nelder-Mead",
                   options={"maxiter": 250, "xatol": 1e-8, "fatol": 1e-13})
    _, coef = solve_linear(res.x)
    best = np.array([coef[0], coef[1], res.x[0], res.x[1]])
    b0 = np.array([mos.max(), mos.min(), *b34_0])
    if resid(best) > resid(b0) + 1e-12:
        raise FitDiverged("logistic fit did not reduce the residual")
    if best[3] == 0:
        best[3] = 1e-12
    return LogisticParams(*best, paper_literal=paper_literal)


@dataclass
class MetricReport:
    srocc: float
    krcc: float
    plcc: float
    rmse: float

    def as_dict(self):
        return {"srocc": self.srocc, "krcc": self.krcc, "plcc": self.plcc, "rmse": self.rmse}


def evaluate_predictions(pred, mos, paper_literal: bool = False) -> MetricReport:
    """Rank metrics on raw predictions, accuracy metrics after logistic mapping.

    If the fitted curve collapses to a constant (predictions carry no linear
    information), PLCC is reported as 0 rather than undefined.
    """
    pred = np.asarray(pred, dtype=np.float64)
    mos = np.asarray(mos, dtype=np.float64)
    s = srocc(pred, mos)
    k = krcc(pred, mos)
    curve = fit_logistic(pred, mos, paper_literal=paper_literal)
    mapped = curve(pred)
    try:
        p = plcc(mapped, mos)
    except ConstantInput:
        p = 0.0
    return MetricReport(srocc=s, krcc=k, plcc=p, rmse=rmse(mapped, mos))


@dataclass
class SplitPlan:
    n_splits: int = 1000
    train_fraction: float = 0.8
    seed: int = 0


def make_splits(n_items: int, plan: SplitPlan):
    """Seeded disjoint train/test index pairs; train size = round(f*n)."""
    if n_items < 5:
        raise TooFewItems(f"need >= 5 items, got {n_items}")
    n_train = int(round(plan.train_fraction * n_items))
    splits = []
    for s in range(plan.n_splits):
        rng = np.random.default_rng(np.random.SeedSequence((plan.seed, s)))
        perm = rng.permutation(n_items)
        splits.append((np.sort(perm[:n_train]), np.sort(perm[n_train:])))
    return splits


@dataclass
class BenchmarkEntry:
    median: MetricReport
    per_split: list[MetricReport] = field(default_factory=list)


def run_benchmark(
    features_by_model: dict,
    mos,
    plan: SplitPlan,
    training_free: set | None = None,
    regressor_kind: str = "svr-rbf",
    cv_folds: int = 5,
    grid: dict | None = None,
    keep_per_split: bool = True,
) -> dict:
    """Evaluate each model's features over the split plan.

    features_by_model maps model name to an (n_videos, d) feature matrix
    (or an (n_videos,) score vector for training-free models, which are
    evaluated on every test set without training).
    """
    mos = np.asarray(mos, dtype=np.float64)
    training_free = training_free or set()
    splits = make_splits(len(mos), plan)
    results = {}
    for name, feats in features_by_model.items():
        feats = np.asarray(feats, dtype=np.float64)
        reports = []
        for split_idx, (train_idx, test_idx) in enumerate(splits):
            if name in training_free:
                pred = feats[test_idx]
            else:
                x = feats if feats.ndim == 2 else feats[:, None]
                model = train_regressor(
                    x[train_idx],
                    mos[train_idx],
                    kind=regressor_kind,
                    cv_folds=cv_folds,
                    grid=grid,
                    seed=int(np.random.default_rng(np.random.SeedSequence((plan.seed, split_idx))).integers(2**31)),
                )
                pred = model.predict(x[test_idx])
            reports.append(evaluate_predictions(pred, mos[test_idx]))
        median = MetricReport(
            srocc=float(np.median([r.srocc for r in reports])),
            krcc=float(np.median([r.krcc for r in reports])),
            plcc=float(np.median([r.plcc for r in reports])),
            rmse=float(np.median([r.rmse for r in reports])),
        )
        results[name] = BenchmarkEntry(median=median, per_split=reports if keep_per_split else [])
    return results


def report_to_json(results: dict) -> str:
    payload = {}
    for name, entry in results.items():
        payload[name] = {
            "median": entry.median.as_dict(),
            "per_split": [r.as_dict() for r in entry.per_split],
        }
    return json.dumps(payload, indent=2, sort_keys=True)
