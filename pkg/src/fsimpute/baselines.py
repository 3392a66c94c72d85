"""Reference imputers: column mean, k-nearest neighbours, iterative SVD, chained ridge regressions.

Every function takes an encoded matrix ``x_hat`` and a boolean mask
(True = observed), returns a new matrix, and never touches observed cells.
"""
from dataclasses import dataclass

import numpy as np

from .data import check_imputable, column_groups, sort_columns_by_missingness
from .numerics import ShapeError, as_matrix


class NumericalError(ArithmeticError):
    pass


@dataclass
class BaselineConfig:
    knn_k: int = 5
    svd_rank: int = None
    svd_tol: float = 1e-4
    svd_max_iters: int = 100
    mice_sweeps: int = 10
    mice_ridge: float = 1e-3

    def __post_init__(self):
        if self.knn_k < 1:
            raise ValueError("knn_k must be >= 1")
        if self.svd_rank is not None and self.svd_rank < 1:
            raise ValueError("svd_rank must be >= 1")
        if self.mice_sweeps < 1 or self.svd_max_iters < 1:
            raise ValueError("iteration counts must be >= 1")
        if self.mice_ridge < 0:
            raise ValueError("mice_ridge must be non-negative")

    def rank_for(self, d):
        return self.svd_rank if self.svd_rank is not None else max(1, min(10, d - 1))


def _prepare(x_hat, mask, encmap=None):
    x = as_matrix(x_hat, "x_hat").copy()
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != x.shape:
        raise ShapeError(f"mask shape {mask.shape} differs from matrix shape {x.shape}")
    check_imputable(mask, encmap)
    return x, mask


def column_means(x, mask):
    counts = mask.sum(axis=0)
    return np.where(mask, x, 0.0).sum(axis=0) / np.maximum(counts, 1)


def impute_mean(x_hat, mask, encmap=None):
    x, mask = _prepare(x_hat, mask, encmap)
    return np.where(mask, x, column_means(x, mask))


def impute_knn(x_hat, mask, cfg=None, encmap=None):
    """Fill each missing cell with the mean of its k nearest donor rows.

    Distance between two rows is ``sqrt(sum(diff**2) / n_shared)`` over the
    coordinates both rows observe.  Donors must observe the target cell and
    share at least one coordinate.  Ties go to the lower row index.  With
    fewer than k donors all available donors are averaged, and with none
    the column mean is used.
    """
    cfg = cfg or BaselineConfig()
    x, mask = _prepare(x_hat, mask, encmap)
    n, d = x.shape
    if n < cfg.knn_k + 1:
        raise ValueError(f"KNN needs at least k + 1 = {cfg.knn_k + 1} rows, got {n}")
    means = column_means(x, mask)
    xz = np.where(mask, x, 0.0)
    out = x.copy()
    for r in np.flatnonzero(~mask.all(axis=1)):
        shared = mask & mask[r]
        acc = np.zeros(n)
        for j in range(d):
            diff = xz[:, j] - xz[r, j]
            acc += np.where(shared[:, j], diff * diff, 0.0)
        cnt = shared.sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            dist = np.where(cnt > 0, np.sqrt(acc / np.maximum(cnt, 1)), np.inf)
        dist[r] = np.inf
        for j in np.flatnonzero(~mask[r]):
            cand = np.flatnonzero(mask[:, j] & np.isfinite(dist))
            if cand.size == 0:
                out[r, j] = means[j]
                continue
            nearest = cand[np.lexsort((cand, dist[cand]))[:cfg.knn_k]]
            total = 0.0
            for i in nearest:
                total += x[i, j]
            out[r, j] = total / nearest.size
    return out


def truncated_svd(x, rank):
    """Best rank-``rank`` approximation of ``x`` (LAPACK SVD)."""
    try:
        u, s, vt = np.linalg.svd(x, full_matrices=False)
    except np.linalg.LinAlgError as e:
        raise NumericalError(f"SVD failed: {e}") from e
    return (u[:, :rank] * s[:rank]) @ vt[:rank]


def impute_svd(x_hat, mask, cfg=None, encmap=None):
    cfg = cfg or BaselineConfig()
    x, mask = _prepare(x_hat, mask, encmap)
    rank = cfg.rank_for(x.shape[1])
    if rank >= min(x.shape):
        raise ValueError(f"SVD rank {rank} must be below min(N, d) = {min(x.shape)}")
    x = np.where(mask, x, column_means(x, mask))
    if mask.all():
        return x
    missing = ~mask
    for it in range(1, cfg.svd_max_iters + 1):
        approx = truncated_svd(x, rank)
        new = np.where(missing, approx, x)
        denom = float(np.sum(new ** 2))
        change = float(np.sum((new - x) ** 2)) / denom if denom > 0 else 0.0
        x = new
        if change < cfg.svd_tol:
            break
    return x


def ridge_fit(features, target, ridge):
    """Least squares with an unpenalized intercept; returns (intercept, coef)."""
    n, p = features.shape
    a = np.column_stack([np.ones(n), features])
    gram = a.T @ a
    gram[1:, 1:] += ridge * np.eye(p)
    rhs = a.T @ target
    try:
        sol = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError as e:
        raise NumericalError(f"singular normal equations: {e}") from e
    if not np.all(np.isfinite(sol)):
        raise NumericalError("non-finite regression coefficients")
    return sol[0], sol[1:]


def impute_mice(x_hat, mask, cfg=None, encmap=None):
    """Chained ridge regressions, deterministic (predicted means, no draws)."""
    cfg = cfg or BaselineConfig()
    x, mask = _prepare(x_hat, mask, encmap)
    n, d = x.shape
    groups = column_groups(d, encmap)
    x = np.where(mask, x, column_means(x, mask))
    order = sort_columns_by_missingness(mask, encmap)
    for _ in range(cfg.mice_sweeps):
        for k in order:
            a, b = groups[k]
            obs = mask[:, a]
            rest = np.r_[0:a, b:d].astype(np.int64)
            feats = x[:, rest]
            intercept, coef = ridge_fit(feats[obs], x[obs, a:b], cfg.mice_ridge)
            x[~obs, a:b] = intercept + feats[~obs] @ coef
    return x
