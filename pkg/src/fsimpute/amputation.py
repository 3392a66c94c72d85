"""Simulated missingness (amputation) for complete encoded matrices.

All three mechanisms draw one uniform matrix ``Z`` with a column per raw
feature and blank cell ``(i, j)`` when ``Z[i, j] <= t``, optionally gated:

* MCAR: no gate.
* MAR: an anchor feature ``r`` is drawn, then up to ``mar_dependent_count``
  other features.  Those are only blanked where the anchor is at or below
  its median.  Every other feature, the anchor included, is MCAR.
* MNAR: up to ``mnar_self_count`` features are blanked only where their own
  value is at or below their own median.

A blanked categorical feature loses its whole one-hot span.
"""
from dataclasses import dataclass, field

import numpy as np

from .data import UnimputableColumnError, column_groups, expand_mask
from .numerics import RngStream, as_matrix, lower_median, uniform_matrix

MECHANISMS = ("MCAR", "MAR", "MNAR")
MAX_ATTEMPTS = 100


@dataclass
class AmputationConfig:
    mechanism: str = "MCAR"
    missing_rate: float = 0.2
    rng: RngStream = None
    mar_dependent_count: int = 10
    mnar_self_count: int = 5

    def __post_init__(self):
        self.mechanism = self.mechanism.upper()
        if self.mechanism not in MECHANISMS:
            raise ValueError(f"mechanism must be one of {MECHANISMS}, got {self.mechanism!r}")
        if not 0.0 < self.missing_rate < 1.0:
            raise ValueError(f"missing rate must lie in (0, 1), got {self.missing_rate}")
        if self.mar_dependent_count < 1 or self.mnar_self_count < 1:
            raise ValueError("dependent column counts must be >= 1")
        if self.rng is None:
            self.rng = RngStream(0)


@dataclass
class AmputationResult:
    x_hat: np.ndarray
    mask: np.ndarray
    raw_missing: np.ndarray
    provenance: dict = field(default_factory=dict)


def _raw_values(x, groups):
    # one ordinal value per raw feature: the scaled value, or the category position
    cols = []
    for a, b in groups:
        cols.append(x[:, a] if b - a == 1 else np.argmax(x[:, a:b], axis=1).astype(np.float64))
    return np.column_stack(cols)


def _finish(x, groups, encmap, missing, provenance):
    mask = expand_mask(~missing, encmap) if encmap is not None else ~missing
    x_hat = np.where(mask, x, 0.0)
    return AmputationResult(x_hat, mask, missing, provenance)


def _draw(x, cfg, groups, gate):
    """Draw Z until every feature keeps an observed cell; ``gate`` is N x features bool."""
    n, g = x.shape[0], len(groups)
    for attempt in range(1, MAX_ATTEMPTS + 1):
        z = uniform_matrix(n, g, cfg.rng)
        missing = (z <= cfg.missing_rate) & gate
        if not missing.all(axis=0).any():
            return missing, attempt
    raise UnimputableColumnError(
        f"{cfg.mechanism} amputation at t={cfg.missing_rate} left a feature with no observed cells "
        f"after {MAX_ATTEMPTS} attempts")


def ampute_mcar(x_com, cfg, encmap=None):
    x = as_matrix(x_com, "x_com")
    groups = column_groups(x.shape[1], encmap)
    gate = np.ones((x.shape[0], len(groups)), dtype=bool)
    missing, attempts = _draw(x, cfg, groups, gate)
    prov = {"mechanism": "MCAR", "missing_rate": cfg.missing_rate, "attempts": attempts}
    return _finish(x, groups, encmap, missing, prov)


def ampute_mar(x_com, cfg, encmap=None):
    x = as_matrix(x_com, "x_com")
    groups = column_groups(x.shape[1], encmap)
    g = len(groups)
    if g < 2:
        raise ValueError("MAR amputation needs at least two features")
    raw = _raw_values(x, groups)
    anchor = int(cfg.rng.integers(g))
    k = min(cfg.mar_dependent_count, g - 1)
    others = np.array([j for j in range(g) if j != anchor])
    dependent = np.sort(cfg.rng.choice(others, size=k, replace=False)).astype(int)
    median = lower_median(raw[:, anchor])

    gate = np.ones((x.shape[0], g), dtype=bool)
    gate[:, dependent] = (raw[:, anchor] <= median)[:, None]
    missing, attempts = _draw(x, cfg, groups, gate)
    prov = {
        "mechanism": "MAR",
        "missing_rate": cfg.missing_rate,
        "anchor": anchor,
        "anchor_median": median,
        "gated": dependent.tolist(),
        "attempts": attempts,
    }
    return _finish(x, groups, encmap, missing, prov)


def ampute_mnar(x_com, cfg, encmap=None):
    x = as_matrix(x_com, "x_com")
    groups = column_groups(x.shape[1], encmap)
    g = len(groups)
    raw = _raw_values(x, groups)
    k = min(cfg.mnar_self_count, g)
    chosen = np.sort(cfg.rng.choice(g, size=k, replace=False)).astype(int)
    medians = [lower_median(raw[:, j]) for j in chosen]

    gate = np.ones((x.shape[0], g), dtype=bool)
    for j, m in zip(chosen, medians):
        gate[:, j] = raw[:, j] <= m
    missing, attempts = _draw(x, cfg, groups, gate)
    prov = {
        "mechanism": "MNAR",
        "missing_rate": cfg.missing_rate,
        "gated": chosen.tolist(),
        "medians": medians,
        "attempts": attempts,
    }
    return _finish(x, groups, encmap, missing, prov)


def ampute(x_com, cfg, encmap=None):
    """Dispatch on ``cfg.mechanism``."""
    fn = {"MCAR": ampute_mcar, "MAR": ampute_mar, "MNAR": ampute_mnar}[cfg.mechanism]
    return fn(x_com, cfg, encmap)
