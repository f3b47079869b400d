"""Benchmark harness: features vs planted quality over random splits.

Builds a synthetic table of 120 items with a planted quality score, then
benchmarks three predictors over seeded 80/20 splits: the quality itself
(a training-free oracle), a noisy-but-informative feature trained through
SVR, and pure noise. The harness reports median SROCC/KRCC/PLCC/RMSE after
per-split logistic mapping.
"""

import numpy as np

from vqalab.evaluation import SplitPlan, report_to_json, run_benchmark
from vqalab.regression import fit_kernel_ridge, fit_svr


def main():
    rng = np.random.default_rng(4)
    n = 120
    quality = rng.uniform(0, 100, n)
    informative = np.stack([quality + rng.normal(0, 12, n),
                            np.sqrt(quality) + rng.normal(0, 1, n)], axis=1)
    noise = rng.normal(size=n)

    plan = SplitPlan(n_splits=50, train_fraction=0.8, seed=0)
    results = run_benchmark(
        {"oracle": quality, "trained-svr": informative, "noise": noise},
        mos=quality,
        plan=plan,
        training_free={"oracle", "noise"},
        cv_folds=3,
        grid={"C": (1.0, 32.0), "epsilon": (1.0,), "gamma": (0.05, 0.5)},
        keep_per_split=False,
    )
    for name, entry in results.items():
        m = entry.median
        print(f"{name:12s} SROCC={m.srocc:6.3f} KRCC={m.krcc:6.3f} "
              f"PLCC={m.plcc:6.3f} RMSE={m.rmse:6.2f}")
    print(f"report is deterministic JSON ({len(report_to_json(results))} bytes)")

    # the two regressors agree closely on an easy smooth target
    x = rng.normal(size=(40, 2))
    y = np.sin(x[:, 0]) + 0.5 * x[:, 1]
    ridge = fit_kernel_ridge(x, y, lam=1e-3, gamma=0.5)
    svr = fit_svr(x, y, c=10.0, eps=0.01, gamma=0.5)
    xt = rng.normal(size=(5, 2))
    print("ridge:", np.round(ridge.predict(xt), 3))
    print("svr:  ", np.round(svr.predict(xt), 3))


if __name__ == "__main__":
    main()
