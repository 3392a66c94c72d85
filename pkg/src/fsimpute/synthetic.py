"""Synthetic complete datasets with known structure."""
import numpy as np

from .data import CATEGORICAL, CONTINUOUS, Column, MixedDataset, Schema
from .numerics import RngStream


def minmax(x):
    lo, hi = x.min(axis=0), x.max(axis=0)
    return (x - lo) / np.where(hi > lo, hi - lo, 1.0)


def linear_blend(n=1000, d=8, noise=0.05, seed=0):
    """Columns that are noisy linear blends of two latent factors, scaled to [0, 1].

    Any column is then, up to noise, a linear combination of any two
    others.  ``noise`` is the Gaussian standard deviation added before the
    final rescale.
    """
    rng = RngStream(seed).child("linear-blend")
    z = rng.uniform(size=(n, 2))
    w = np.linspace(0.0, 1.0, d)
    x = z[:, [0]] * w + z[:, [1]] * (1.0 - w)
    x = minmax(x) + rng.normal(0.0, noise, size=(n, d))
    return minmax(x)


def low_rank(n=200, d=20, rank=2, seed=0):
    """Exact rank-``rank`` matrix scaled to [0, 1] (an affine map keeps rank <= rank + 1)."""
    rng = RngStream(seed).child("low-rank")
    u = rng.uniform(size=(n, rank))
    v = rng.uniform(size=(rank, d))
    x = u @ v
    return (x - x.min()) / (x.max() - x.min())


def logistic_labeled(n=2000, d=8, seed=0, noise=0.1):
    """Correlated features in [0, 1] and 0/1 labels from a logistic model.

    Features share two latent factors so that missing cells are
    predictable from observed ones.  Returns ``(x, y)``.
    """
    rng = RngStream(seed).child("logistic")
    z = rng.normal(size=(n, 2))
    load = rng.normal(size=(2, d))
    x = minmax(z @ load + rng.normal(0.0, noise * 3, size=(n, d)))
    beta = rng.normal(size=d) * 10.0
    logit = (x - x.mean(axis=0)) @ beta
    y = (rng.uniform(size=n) < 1.0 / (1.0 + np.exp(-logit))).astype(np.int64)
    return x, y


def as_dataset(x, labels=None, categorical=None):
    """Wrap a numeric matrix (and optional 0/1 labels) as a :class:`MixedDataset`.

    ``categorical`` maps column index to a category list; those columns
    must hold integer codes.
    """
    categorical = categorical or {}
    cols, values = [], {}
    for j in range(x.shape[1]):
        name = f"x{j}"
        if j in categorical:
            cols.append(Column(name, CATEGORICAL, tuple(categorical[j])))
            values[name] = x[:, j].astype(np.int64)
        else:
            cols.append(Column(name, CONTINUOUS))
            values[name] = x[:, j]
    label = None
    if labels is not None:
        label = "label"
        cols.append(Column(label, CATEGORICAL, ("0", "1")))
        values[label] = np.asarray(labels, dtype=np.int64)
    return MixedDataset(Schema(tuple(cols), label), values)
