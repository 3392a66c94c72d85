"""Feature-specific adversarial imputation.

Each feature with missing cells gets its own generator, an MLP that
predicts the feature from all other encoded columns, and its own
discriminator, an MLP that reads a full row and predicts whether that
row's cell in the feature was imputed.  Features are visited from fewest
to most missing cells.  A sweep over all features is repeated until the
normalized change between consecutive matrices (:func:`delta`) first
goes up.  The matrix from before that sweep is returned.

Training one feature runs ``rounds`` rounds.  Each round does some
discriminator steps and then some generator steps, so the configured step
totals are kept.  A generator step minimizes

    sum over observed rows of L_G  -  alpha * L_D(imputed rows)

The second term is computed by writing the generator's prediction into the
feature's slot of rows where the feature is missing and backpropagating the
discriminator loss through the discriminator into the generator.
Supervised batches only draw rows where the feature is observed.
"""
from dataclasses import dataclass, field, replace

import numpy as np

from .data import check_imputable, column_groups, sort_columns_by_missingness
from .nn import (
    MlpSpec,
    TrainConfig,
    backward,
    discriminator_loss,
    discriminator_loss_gradient,
    forward,
    forward_trace,
    generator_loss,
    generator_loss_gradient,
    mlp_init,
    sgd_step,
)
from .numerics import RngStream, ShapeError, as_matrix


class DegenerateMatrixError(ArithmeticError):
    pass


@dataclass
class IfganConfig:
    train: TrainConfig = field(default_factory=TrainConfig)
    use_discriminator: bool = True
    max_sweeps: int = 20
    discriminator_first: bool = True
    warm_start: bool = False
    record_batches: bool = False

    def __post_init__(self):
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be >= 1")

    def without_discriminator(self):
        """Same settings with the adversarial term and D training switched off."""
        return replace(self, use_discriminator=False)


@dataclass
class ImputerState:
    x: np.ndarray
    mask: np.ndarray
    groups: list
    binary: np.ndarray
    column_order: list
    generators: dict = field(default_factory=dict)
    discriminators: dict = field(default_factory=dict)
    delta_trace: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    batch_log: list = field(default_factory=list)
    sweep: int = 0


@dataclass
class ImputeResult:
    x: np.ndarray
    delta_trace: list
    diagnostics: list
    sweeps: int
    stopped_early: bool
    batch_log: list = field(default_factory=list)


class BatchSampler:
    """Mini-batches drawn without replacement, reshuffled each epoch."""

    def __init__(self, rows, batch_size, rng):
        self.rows = np.asarray(rows, dtype=np.int64)
        self.size = min(int(batch_size), self.rows.size)
        self.rng = rng
        self._perm = None
        self._pos = 0

    def next(self):
        if self._perm is None or self._pos + self.size > self.rows.size:
            self._perm = self.rows[self.rng.permutation(self.rows.size)]
            self._pos = 0
        batch = self._perm[self._pos:self._pos + self.size]
        self._pos += self.size
        return batch


def _split_budget(total, rounds):
    base, extra = divmod(total, rounds)
    return [base + (1 if r < extra else 0) for r in range(rounds)]


def initial_guess(x_hat, mask, rng):
    """Fill missing slots with U[0, 1) draws; observed cells are copied."""
    x_hat = as_matrix(x_hat, "x_hat")
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != x_hat.shape:
        raise ShapeError(f"mask shape {mask.shape} differs from matrix shape {x_hat.shape}")
    return np.where(mask, x_hat, rng.uniform(size=x_hat.shape))


def delta(x_new, x_old):
    """``sum((x_new - x_old)**2) / sum(x_new**2)`` over all entries."""
    x_new, x_old = as_matrix(x_new, "x_new"), as_matrix(x_old, "x_old")
    if x_new.shape != x_old.shape:
        raise ShapeError(f"shapes differ: {x_new.shape} vs {x_old.shape}")
    denom = float(np.sum(x_new ** 2))
    if denom == 0.0:
        raise DegenerateMatrixError("delta is undefined for an all-zero matrix")
    return float(np.sum((x_new - x_old) ** 2)) / denom


def _hidden_width(cfg, d):
    return cfg.train.hidden_width or max(8, d)


def train_column(state, k, cfg, rng):
    """Fit generator/discriminator for feature ``k`` and fill its missing cells."""
    x, mask = state.x, state.mask
    n, d = x.shape
    a, b = state.groups[k]
    observed = mask[:, a]
    obs_rows = np.flatnonzero(observed)
    mis_rows = np.flatnonzero(~observed)
    if obs_rows.size == 0:
        raise ValueError(f"feature {k} has no observed rows")
    if mis_rows.size == 0:
        return state

    tc = cfg.train
    rest = np.r_[0:a, b:d].astype(np.int64)
    kind = state.binary[a:b]
    width = _hidden_width(cfg, d)

    gen = state.generators.get(k) if cfg.warm_start else None
    if gen is None:
        gen = mlp_init(MlpSpec.default(rest.size, b - a, width), rng.child("G-init"))
    use_d = cfg.use_discriminator and tc.discriminator_steps > 0
    disc = None
    if use_d:
        disc = state.discriminators.get(k) if cfg.warm_start else None
        if disc is None:
            disc = mlp_init(MlpSpec.default(d, 1, width), rng.child("D-init"))
    adversarial = use_d and tc.adversarial_alpha > 0

    g_batches = BatchSampler(obs_rows, tc.batch_size, rng.child("G-batch"))
    d_batches = BatchSampler(np.arange(n), tc.batch_size, rng.child("D-batch")) if use_d else None
    a_batches = BatchSampler(mis_rows, tc.batch_size, rng.child("A-batch")) if adversarial else None
    d_truth = (~observed).astype(np.float64)[:, None]
    log = state.batch_log if cfg.record_batches else None

    def d_step():
        rows = d_batches.next()
        if log is not None:
            log.append(("D", k, rows, d_truth[rows, 0].copy()))
        acts = forward_trace(disc, x[rows])
        g = discriminator_loss_gradient(acts[-1], d_truth[rows])
        gw, gb, _ = backward(disc, acts, g)
        sgd_step(disc, gw, gb, tc.learning_rate, tc.l2_lambda)
        return discriminator_loss(acts[-1], d_truth[rows])

    def g_step():
        rows = g_batches.next()
        if log is not None:
            log.append(("G", k, rows, None))
        acts = forward_trace(gen, x[np.ix_(rows, rest)])
        target = x[rows, a:b]
        gw, gb, _ = backward(gen, acts, generator_loss_gradient(acts[-1], target, kind))
        if adversarial:
            arows = a_batches.next()
            if log is not None:
                log.append(("A", k, arows, None))
            gacts = forward_trace(gen, x[np.ix_(arows, rest)])
            filled = x[arows].copy()
            filled[:, a:b] = gacts[-1]
            dacts = forward_trace(disc, filled)
            _, _, d_in = backward(disc, dacts, discriminator_loss_gradient(dacts[-1], d_truth[arows]))
            aw, ab, _ = backward(gen, gacts, -tc.adversarial_alpha * d_in[:, a:b])
            gw = [g1 + g2 for g1, g2 in zip(gw, aw)]
            gb = [g1 + g2 for g1, g2 in zip(gb, ab)]
        sgd_step(gen, gw, gb, tc.learning_rate, tc.l2_lambda)
        return generator_loss(acts[-1], target, kind)

    g_loss = d_loss = float("nan")
    if use_d:
        rounds = tc.rounds
        for n_d, n_g in zip(_split_budget(tc.discriminator_steps, rounds), _split_budget(tc.generator_steps, rounds)):
            if cfg.discriminator_first:
                for _ in range(n_d):
                    d_loss = d_step()
            for _ in range(n_g):
                g_loss = g_step()
            if not cfg.discriminator_first:
                for _ in range(n_d):
                    d_loss = d_step()
    else:
        for _ in range(tc.generator_steps):
            g_loss = g_step()

    x[mis_rows, a:b] = forward(gen, x[np.ix_(mis_rows, rest)])
    state.generators[k] = gen
    if disc is not None:
        state.discriminators[k] = disc
    state.diagnostics.append({
        "sweep": state.sweep,
        "feature": int(k),
        "n_observed": int(obs_rows.size),
        "n_missing": int(mis_rows.size),
        "generator_loss": g_loss / min(tc.batch_size, obs_rows.size),
        "discriminator_loss": d_loss / min(tc.batch_size, n) if use_d else None,
    })
    return state


def impute(x_hat, mask, cfg=None, rng=None, encmap=None, binary=None):
    """Impute the missing cells of an encoded matrix.

    Parameters
    ----------
    x_hat : (N, d) array
        Encoded matrix; values in missing slots are ignored.
    mask : (N, d) bool array
        True where observed.
    cfg : IfganConfig
    rng : RngStream
    encmap : EncodingMap, optional
        Groups encoded columns into features and marks 0/1 targets.  Without
        it every column is its own continuous feature.
    binary : (d,) bool array, optional
        Overrides the per-column target kinds.

    Returns
    -------
    ImputeResult
    """
    cfg = cfg or IfganConfig()
    rng = rng or RngStream(0)
    x_hat = as_matrix(x_hat, "x_hat")
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != x_hat.shape:
        raise ShapeError(f"mask shape {mask.shape} differs from matrix shape {x_hat.shape}")
    groups = column_groups(x_hat.shape[1], encmap)
    check_imputable(mask, encmap)
    if binary is None:
        binary = encmap.binary_columns if encmap is not None else np.zeros(x_hat.shape[1], dtype=bool)

    constant = set(encmap.constant_groups) if encmap is not None else set()
    order = [k for k in sort_columns_by_missingness(mask, encmap) if k not in constant]
    x = initial_guess(x_hat, mask, rng.child("initial-guess"))
    for k in constant:
        a, b = groups[k]
        x[:, a:b] = np.where(mask[:, a:b], x[:, a:b], 0.0)

    if not order:
        return ImputeResult(x, [], [], 0, False)

    state = ImputerState(x, mask, groups, np.asarray(binary, dtype=bool), order)
    for sweep in range(cfg.max_sweeps):
        state.sweep = sweep
        x_old = state.x.copy()
        for k in order:
            train_column(state, k, cfg, rng.child("sweep", sweep, "feature", k))
        state.delta_trace.append(delta(state.x, x_old))
        if len(state.delta_trace) >= 2 and state.delta_trace[-1] > state.delta_trace[-2]:
            return ImputeResult(x_old, state.delta_trace, state.diagnostics, sweep + 1, True, state.batch_log)
    return ImputeResult(state.x, state.delta_trace, state.diagnostics, cfg.max_sweeps, False, state.batch_log)
