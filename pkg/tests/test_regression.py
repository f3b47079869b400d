import itertools

import numpy as np
import pytest

from vqalab.errors import LayoutMismatch, TooFewItems
from vqalab.regression import (
    fit_kernel_ridge,
    fit_svr,
    rbf_kernel,
    smo_svr,
    svr_dual_objective,
    train_regressor,
)


def test_rbf_kernel_matches_loop_oracle(rng):
    a = rng.normal(size=(4, 3))
    b = rng.normal(size=(5, 3))
    gamma = 0.7
    k = rbf_kernel(a, b, gamma)
    for i in range(4):
        for j in range(5):
            d2 = np.sum((a[i] - b[j]) ** 2)
            assert k[i, j] == pytest.approx(np.exp(-gamma * d2), abs=1e-12)


def test_rbf_kernel_diagonal_ones(rng):
    a = rng.normal(size=(6, 2))
    assert np.allclose(np.diag(rbf_kernel(a, a, 1.3)), 1.0)


# --- kernel ridge --------------------------------------------------------

def test_kernel_ridge_matches_dense_solve(rng):
    x = rng.normal(size=(20, 4))
    y = rng.normal(size=20)
    lam, gamma = 0.1, 0.5
    model = fit_kernel_ridge(x, y, lam, gamma, standardize=False)
    k = rbf_kernel(x, x, gamma)
    coef = np.linalg.solve(k + lam * np.eye(20), y - y.mean())
    pred_ref = rbf_kernel(x, x, gamma) @ coef + y.mean()
    assert model.predict(x) == pytest.approx(pred_ref, abs=1e-8)
    assert model.coef == pytest.approx(coef, abs=1e-8)


def test_kernel_ridge_interpolates_at_tiny_lambda(rng):
    x = rng.normal(size=(15, 2))
    y = np.sin(x[:, 0]) + x[:, 1]
    model = fit_kernel_ridge(x, y, 1e-10, 1.0)
    assert model.predict(x) == pytest.approx(y, abs=1e-5)


# --- SVR / SMO -----------------------------------------------------------

def _brute_force_dual(k, y, c, eps):
    """Best dual objective over the feasible grid {-c, -c/2, 0, c/2, c}^n."""
    levels = np.array([-c, -c / 2, 0.0, c / 2, c])
    best = -np.inf
    for combo in itertools.product(range(5), repeat=len(y)):
        beta = levels[list(combo)]
        if abs(beta.sum()) > 1e-12:
            continue
        best = max(best, svr_dual_objective(k, y, beta, eps))
    return best


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_smo_beats_brute_force_grid(seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(6, 2))
    y = rng.normal(size=6) * 2.0
    c, eps, gamma = 1.0, 0.1, 0.5
    k = rbf_kernel(x, x, gamma)
    beta, bias, viol = smo_svr(k, y, c, eps, tol=1e-4)
    assert viol < 1e-3
    assert np.all(np.abs(beta) <= c + 1e-12)
    assert abs(beta.sum()) < 1e-10
    obj = svr_dual_objective(k, y, beta, eps)
    assert obj >= _brute_force_dual(k, y, c, eps) - 1e-3


def test_smo_constant_targets(rng):
    x = rng.normal(size=(8, 2))
    y = np.full(8, 3.0)
    model = fit_svr(x, y, c=10.0, eps=0.1, gamma=0.5)
    assert model.predict(x) == pytest.approx(y, abs=0.1 + 1e-6)


def test_svr_fits_within_epsilon_tube(rng):
    x = rng.uniform(-2, 2, size=(25, 1))
    y = np.sin(x[:, 0]) * 3.0
    model = fit_svr(x, y, c=100.0, eps=0.05, gamma=1.0, tol=1e-5)
    resid = np.abs(model.predict(x) - y)
    assert np.max(resid) <= 0.05 + 1e-2


def test_svr_epsilon_sparsity(rng):
    # points strictly inside the tube carry zero dual coefficients
    x = rng.uniform(-2, 2, size=(30, 1))
    y = 0.5 * x[:, 0]
    model = fit_svr(x, y, c=10.0, eps=1.0, gamma=0.5)
    resid = np.abs(model.predict(x) - y)
    inside = resid < 1.0 - 1e-6
    assert np.all(np.abs(model.coef[inside]) < 1e-6) or inside.sum() == 0


def test_standardization_from_training_stats(rng):
    x = rng.normal(loc=100.0, scale=50.0, size=(20, 3))
    y = x[:, 0] / 50.0
    model = fit_svr(x, y, c=10.0, eps=0.1, gamma=0.1)
    assert model.feat_mean == pytest.approx(x.mean(axis=0))
    assert model.feat_std == pytest.approx(x.std(axis=0))


# --- cross-validated training --------------------------------------------

SMALL_GRID = {"C": (1.0, 32.0), "epsilon": (0.1,), "gamma": (0.1, 1.0),
              "lambda": (1e-4, 1e-1)}


@pytest.mark.parametrize("kind", ["svr-rbf", "kernel-ridge"])
def test_train_regressor_learns_smooth_function(kind, rng):
    x = rng.uniform(-2, 2, size=(40, 2))
    y = x[:, 0] ** 2 + np.sin(2 * x[:, 1])
    model = train_regressor(x, y, kind=kind, cv_folds=4, grid=SMALL_GRID, seed=0)
    x_test = rng.uniform(-1.5, 1.5, size=(30, 2))
    y_test = x_test[:, 0] ** 2 + np.sin(2 * x_test[:, 1])
    err = np.sqrt(np.mean((model.predict(x_test) - y_test) ** 2))
    assert err < 0.5
    assert model.kind == kind


def test_train_regressor_too_few_samples(rng):
    with pytest.raises(TooFewItems):
        train_regressor(rng.normal(size=(5, 2)), rng.normal(size=5), cv_folds=5)
    with pytest.raises(TooFewItems):
        train_regressor(rng.normal(size=(20, 2)), rng.normal(size=20), kind="nope")


def test_predict_rejects_wrong_feature_length(rng):
    x = rng.normal(size=(12, 3))
    model = fit_kernel_ridge(x, rng.normal(size=12), 0.1, 0.5)
    with pytest.raises(LayoutMismatch):
        model.predict(rng.normal(size=(2, 4)))


def test_train_regressor_deterministic(rng):
    x = rng.normal(size=(24, 2))
    y = rng.normal(size=24)
    m1 = train_regressor(x, y, kind="kernel-ridge", cv_folds=3, grid=SMALL_GRID, seed=7)
    m2 = train_regressor(x, y, kind="kernel-ridge", cv_folds=3, grid=SMALL_GRID, seed=7)
    assert np.array_equal(m1.coef, m2.coef)
    assert m1.hyperparams == m2.hyperparams
