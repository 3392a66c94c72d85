"""Imputation error and post-imputation classification metrics."""
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .numerics import ShapeError, as_matrix


class UndefinedMetricError(ValueError):
    pass


class DegenerateLabelError(ValueError):
    pass


def rmse(x_com, x_imp, mask):
    """Root mean squared error over the missing cells (mask == False)."""
    x_com, x_imp = as_matrix(x_com, "x_com"), as_matrix(x_imp, "x_imp")
    mask = np.asarray(mask, dtype=bool)
    if not (x_com.shape == x_imp.shape == mask.shape):
        raise ShapeError(f"shapes differ: truth {x_com.shape}, imputed {x_imp.shape}, mask {mask.shape}")
    n_na = int((~mask).sum())
    if n_na == 0:
        raise UndefinedMetricError("RMSE is undefined when no cells are missing")
    diff = (x_com - x_imp)[~mask]
    return float(np.sqrt(np.sum(diff * diff) / n_na))


def _check_labels(labels):
    y = np.asarray(labels)
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be 0/1")
    if y.min() == y.max():
        raise DegenerateLabelError("both classes must be present")
    return y.astype(np.int64)


@dataclass
class LogisticConfig:
    learning_rate: float = 0.5
    epochs: int = 500
    l2: float = 1e-3


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def fit_logistic(features, labels, cfg=None):
    """L2-regularized logistic regression by full-batch gradient descent.

    Starts from zero weights, so the fit is deterministic.  Returns
    ``[intercept, coef_1, ..., coef_p]``; the intercept is not penalized.
    """
    cfg = cfg or LogisticConfig()
    x = as_matrix(features, "features")
    y = _check_labels(labels)
    if y.shape != (x.shape[0],):
        raise ShapeError(f"{y.shape[0]} labels for {x.shape[0]} rows")
    a = np.column_stack([np.ones(x.shape[0]), x])
    w = np.zeros(a.shape[1])
    penalty = np.full(a.shape[1], cfg.l2)
    penalty[0] = 0.0
    n = x.shape[0]
    for _ in range(cfg.epochs):
        p = _sigmoid(a @ w)
        w -= cfg.learning_rate * (a.T @ (p - y) / n + penalty * w)
    return w


def predict_proba(w, features):
    x = as_matrix(features, "features")
    return _sigmoid(w[0] + x @ w[1:])


def auroc(scores, labels):
    """Mann-Whitney AUROC: P(random positive outscores random negative), ties count 1/2."""
    s = np.asarray(scores, dtype=np.float64)
    y = _check_labels(labels)
    if s.shape != y.shape:
        raise ShapeError(f"{s.size} scores for {y.size} labels")
    ranks = rankdata(s)
    n_pos = int(y.sum())
    n_neg = y.size - n_pos
    u = ranks[y == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def stratified_folds(labels, folds, rng):
    """Test-index arrays for ``folds``-fold stratified CV; ``folds == 1`` gives one 80/20 split."""
    y = _check_labels(labels)
    if folds < 1:
        raise ValueError("folds must be >= 1")
    parts = 5 if folds == 1 else folds
    buckets = [[] for _ in range(parts)]
    for cls in (0, 1):
        idx = np.flatnonzero(y == cls)
        idx = idx[rng.permutation(idx.size)]
        for f, chunk in enumerate(np.array_split(idx, parts)):
            buckets[f].extend(chunk.tolist())
    tests = [np.sort(np.array(b, dtype=np.int64)) for b in buckets]
    return tests[:1] if folds == 1 else tests


def cv_auroc(x_imp, labels, folds, rng, cfg=None):
    """Mean held-out AUROC of :func:`fit_logistic` on an imputed matrix."""
    y = _check_labels(labels)
    n = y.size
    scores = []
    for test in stratified_folds(y, folds, rng):
        train = np.setdiff1d(np.arange(n), test)
        w = fit_logistic(x_imp[train], y[train], cfg)
        scores.append(auroc(predict_proba(w, x_imp[test]), y[test]))
    return float(np.mean(scores))
