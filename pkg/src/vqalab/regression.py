"""Kernel regressors for the benchmark protocol.

Epsilon-SVR with an RBF kernel solved by SMO (maximal-violating-pair working
set selection on the 2n-variable dual), and kernel ridge as the closed-form
cross-check. Hyperparameters are picked by k-fold cross-validation over a
grid; feature standardization statistics always come from the training data.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SingularKernel, TooFewItems

DEFAULT_C_GRID = tuple(2.0**e for e in range(-3, 11))
DEFAULT_GAMMA_GRID = tuple(2.0**e for e in range(-10, 4))
DEFAULT_EPS_GRID = (0.1, 0.5, 1.0)
DEFAULT_LAMBDA_GRID = tuple(10.0**e for e in range(-6, 3))


def rbf_kernel(a, b, gamma):
    a = np.atleast_2d(a)
    b = np.atleast_2d(b)
    d2 = np.sum(a * a, axis=1)[:, None] + np.sum(b * b, axis=1)[None, :] - 2.0 * a @ b.T
    return np.exp(-gamma * np.maximum(d2, 0.0))


@dataclass
class KernelRegressor:
    kind: str  # "svr-rbf" or "kernel-ridge"
    gamma: float
    coef: np.ndarray  # dual coefficients (beta for SVR, c for ridge)
    bias: float
    x_train: np.ndarray
    feat_mean: np.ndarray
    feat_std: np.ndarray
    hyperparams: dict = field(default_factory=dict)

    def predict(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        if x.shape[1] != self.x_train.shape[1]:
            from .errors import LayoutMismatch

            raise LayoutMismatch(
                f"feature length {x.shape[1]} != trained {self.x_train.shape[1]}"
            )
        xs = (x - self.feat_mean) / self.feat_std
        k = rbf_kernel(xs, self.x_train, self.gamma)
        return k @ self.coef + self.bias


def _standardize(x):
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    std = np.where(std == 0, 1.0, std)
    return (x - mean) / std, mean, std


# --- kernel ridge --------------------------------------------------------

def fit_kernel_ridge(x, y, lam, gamma, standardize=True) -> KernelRegressor:
    """Closed-form solve of (K + lam*I) c = y (no bias term; y is centered)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if standardize:
        xs, mean, std = _standardize(x)
    else:
        xs, mean, std = x, np.zeros(x.shape[1]), np.ones(x.shape[1])
    y_mean = y.mean()
    k = rbf_kernel(xs, xs, gamma)
    try:
        coef = np.linalg.solve(k + lam * np.eye(len(y)), y - y_mean)
    except np.linalg.LinAlgError as exc:
        raise SingularKernel(str(exc)) from exc
    return KernelRegressor(
        kind="kernel-ridge",
        gamma=gamma,
        coef=coef,
        bias=y_mean,
        x_train=xs,
        feat_mean=mean,
        feat_std=std,
        hyperparams={"lambda": lam, "gamma": gamma},
    )


# --- epsilon-SVR by SMO --------------------------------------------------

def svr_dual_objective(k, y, beta, eps):
    """Dual objective maximized by the SVR: -1/2 b'Kb + y'b - eps*sum|b|."""
    return float(-0.5 * beta @ k @ beta + y @ beta - eps * np.sum(np.abs(beta)))


def smo_svr(k, y, c, eps, tol=1e-3, max_iter=100_000):
    """SMO on the 2n-variable epsilon-SVR dual.

    Variables a = [alpha; alpha*], each in [0, C], with sum(alpha - alpha*)
    = 0. Working pairs are the maximal violating pair; the two-variable
    subproblem is solved exactly. Returns (beta, bias, kkt_violation).
    """
    n = len(y)
    z = np.concatenate([np.ones(n), -np.ones(n)])
    p = np.concatenate([eps - y, eps + y])
    a = np.zeros(2 * n)
    grad = p.copy()  # grad = Q a + p; a = 0 initially

    viol = np.inf
    for _ in range(max_iter):
        mzg = -z * grad
        up = ((z > 0) & (a < c)) | ((z < 0) & (a > 0))
        low = ((z > 0) & (a > 0)) | ((z < 0) & (a < c))
        if not up.any() or not low.any():
            viol = 0.0
            break
        i = int(np.argmax(np.where(up, mzg, -np.inf)))
        j = int(np.argmin(np.where(low, mzg, np.inf)))
        viol = mzg[i] - mzg[j]
        if viol < tol:
            break

        # step along u = z_i e_i - z_j e_j keeps z'a = 0; curvature u'Qu
        eta = k[i % n, i % n] + k[j % n, j % n] - 2.0 * k[i % n, j % n]
        g = z[i] * grad[i] - z[j] * grad[j]
        s = -g / eta if eta > 1e-12 else -np.sign(g) * c

        # box limits for a_i + z_i s and a_j - z_j s
        if z[i] > 0:
            lo_i, hi_i = -a[i], c - a[i]
        else:
            lo_i, hi_i = a[i] - c, a[i]
        if z[j] > 0:
            lo_j, hi_j = a[j] - c, a[j]
        else:
            lo_j, hi_j = -a[j], c - a[j]
        s = min(max(s, max(lo_i, lo_j)), min(hi_i, hi_j))
        if s == 0.0:
            break

        a[i] += z[i] * s
        a[j] -= z[j] * s
        # grad += s * Q u; z_t Q[:, t] = z * Ktilde[:, t]
        kdiff = np.tile(k[:, i % n] - k[:, j % n], 2)
        grad += s * z * kdiff

    beta = a[:n] - a[n:]
    # bias from free variables, else the midpoint of the violation band
    mzg = -z * grad
    free = (a > 1e-10) & (a < c - 1e-10)
    if free.any():
        bias = float(np.mean(mzg[free]))
    else:
        up = ((z > 0) & (a < c)) | ((z < 0) & (a > 0))
        low = ((z > 0) & (a > 0)) | ((z < 0) & (a < c))
        hi = np.max(mzg[up]) if up.any() else 0.0
        lo = np.min(mzg[low]) if low.any() else 0.0
        bias = float(0.5 * (hi + lo))
    return beta, bias, float(max(viol, 0.0))


def fit_svr(x, y, c, eps, gamma, tol=1e-3, standardize=True) -> KernelRegressor:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if standardize:
        xs, mean, std = _standardize(x)
    else:
        xs, mean, std = x, np.zeros(x.shape[1]), np.ones(x.shape[1])
    k = rbf_kernel(xs, xs, gamma)
    beta, bias, viol = smo_svr(k, y, c, eps, tol=tol)
    reg = KernelRegressor(
        kind="svr-rbf",
        gamma=gamma,
        coef=beta,
        bias=bias,
        x_train=xs,
        feat_mean=mean,
        feat_std=std,
        hyperparams={"C": c, "epsilon": eps, "gamma": gamma, "kkt_violation": viol},
    )
    return reg


# --- cross-validated training -------------------------------------------

def _cv_folds(n, folds, rng):
    perm = rng.permutation(n)
    return np.array_split(perm, folds)


def train_regressor(
    features,
    targets,
    kind: str = "svr-rbf",
    cv_folds: int = 5,
    grid: dict | None = None,
    seed: int = 0,
) -> KernelRegressor:
    """Grid-search CV by mean fold RMSE, then refit on all training data."""
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(targets, dtype=np.float64)
    if len(y) < 2 * cv_folds:
        raise TooFewItems(f"need >= {2 * cv_folds} samples, got {len(y)}")
    grid = grid or {}
    gammas = grid.get("gamma", DEFAULT_GAMMA_GRID)
    rng = np.random.default_rng(seed)
    folds = _cv_folds(len(y), cv_folds, rng)

    if kind == "kernel-ridge":
        combos = [
            {"lambda": lam, "gamma": g}
            for lam in grid.get("lambda", DEFAULT_LAMBDA_GRID)
            for g in gammas
        ]
        fit = lambda xt, yt, hp: fit_kernel_ridge(xt, yt, hp["lambda"], hp["gamma"])
    elif kind == "svr-rbf":
        combos = [
            {"C": c, "epsilon": e, "gamma": g}
            for c in grid.get("C", DEFAULT_C_GRID)
            for e in grid.get("epsilon", DEFAULT_EPS_GRID)
            for g in gammas
        ]
        fit = lambda xt, yt, hp: fit_svr(xt, yt, hp["C"], hp["epsilon"], hp["gamma"])
    else:
        raise TooFewItems(f"unknown regressor kind {kind!r}")

    best_hp, best_rmse = None, np.inf
    for hp in combos:
        errs = []
        for f in range(cv_folds):
            test_idx = folds[f]
            train_idx = np.concatenate([folds[g] for g in range(cv_folds) if g != f])
            model = fit(x[train_idx], y[train_idx], hp)
            pred = model.predict(x[test_idx])
            errs.append(np.sqrt(np.mean((pred - y[test_idx]) ** 2)))
        rmse = float(np.mean(errs))
        if rmse < best_rmse:
            best_rmse, best_hp = rmse, hp
    return fit(x, y, best_hp)
