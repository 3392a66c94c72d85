"""Small multilayer perceptrons trained with plain SGD.

Weights are stored as ``(fan_out, fan_in)`` matrices so a layer computes
``h @ W.T + b`` on row-major batches.  Hidden layers use ``tanh``; the
output is either a sigmoid (clamped to ``[1e-7, 1 - 1e-7]``) or the
identity.

Losses are sums over batch elements plus ``lam * sum(W**2)`` over weight
matrices (biases are not regularized):

* generator: binary cross-entropy for 0/1 targets, squared error otherwise
* discriminator: squared error between predicted and true missingness
"""
from dataclasses import dataclass, field

import numpy as np

from .numerics import ShapeError, as_matrix

EPS = 1e-7
SIGMOID = "sigmoid"
IDENTITY = "identity"


class DomainError(ValueError):
    """A loss was evaluated outside its domain."""


@dataclass(frozen=True)
class MlpSpec:
    input_dim: int
    hidden_layers: tuple
    output_dim: int
    output_activation: str = SIGMOID

    def __post_init__(self):
        object.__setattr__(self, "hidden_layers", tuple(int(h) for h in self.hidden_layers))
        dims = (self.input_dim, *self.hidden_layers, self.output_dim)
        if any(d < 1 for d in dims):
            raise ValueError(f"all layer sizes must be >= 1, got {dims}")
        if self.output_activation not in (SIGMOID, IDENTITY):
            raise ValueError(f"unknown output activation {self.output_activation!r}")

    @property
    def dims(self):
        return (self.input_dim, *self.hidden_layers, self.output_dim)

    @classmethod
    def default(cls, input_dim, output_dim, width=None):
        """Two tanh hidden layers of width ``max(8, input_dim)`` and a sigmoid output."""
        w = width or max(8, input_dim)
        return cls(input_dim, (w, w), output_dim, SIGMOID)


@dataclass
class Mlp:
    spec: MlpSpec
    weights: list
    biases: list

    def copy(self):
        return Mlp(self.spec, [w.copy() for w in self.weights], [b.copy() for b in self.biases])

    @property
    def n_params(self):
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def l2(self):
        return float(sum(np.sum(w * w) for w in self.weights))


@dataclass
class TrainConfig:
    """SGD hyperparameters for one feature's generator/discriminator pair.

    ``max_inner_rounds`` is the number of alternation rounds; the step
    budgets are spread evenly over the rounds.  ``None`` means one round
    per discriminator step.
    """

    learning_rate: float = 0.001
    batch_size: int = 200
    l2_lambda: float = 0.5
    adversarial_alpha: float = 0.01
    generator_steps: int = 500
    discriminator_steps: int = 100
    max_inner_rounds: int = None
    hidden_width: int = None

    def __post_init__(self):
        if self.learning_rate <= 0 or self.batch_size < 1:
            raise ValueError("learning rate and batch size must be positive")
        if self.l2_lambda < 0 or self.adversarial_alpha < 0:
            raise ValueError("l2_lambda and adversarial_alpha must be non-negative")
        if self.generator_steps < 1 or self.discriminator_steps < 0:
            raise ValueError("generator_steps must be >= 1 and discriminator_steps >= 0")
        if self.max_inner_rounds is not None and self.max_inner_rounds < 1:
            raise ValueError("max_inner_rounds must be >= 1")

    @property
    def rounds(self):
        return self.max_inner_rounds or max(self.discriminator_steps, 1)


def mlp_init(spec, rng):
    """Glorot-uniform weights, zero biases."""
    weights, biases = [], []
    dims = spec.dims
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append((rng.uniform(size=(fan_out, fan_in)) * 2.0 - 1.0) * bound)
        biases.append(np.zeros(fan_out))
    return Mlp(spec, weights, biases)


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return np.clip(out, EPS, 1.0 - EPS)


def forward_trace(net, batch):
    """Forward pass keeping every layer's output for backpropagation."""
    h = as_matrix(batch, "batch")
    if h.shape[1] != net.spec.input_dim:
        raise ShapeError(f"batch has {h.shape[1]} columns, network expects {net.spec.input_dim}")
    acts = [h]
    last = len(net.weights) - 1
    for k, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = h @ w.T + b
        if k < last:
            h = np.tanh(z)
        else:
            h = _sigmoid(z) if net.spec.output_activation == SIGMOID else z
        acts.append(h)
    return acts


def forward(net, batch):
    return forward_trace(net, batch)[-1]


def backward(net, acts, grad_out):
    """Gradients of a loss w.r.t. weights, biases and the input batch.

    ``grad_out`` is the loss gradient at the network output (after the
    output activation).  Regularization is not included here.
    """
    out = acts[-1]
    if net.spec.output_activation == SIGMOID:
        delta = grad_out * out * (1.0 - out)
    else:
        delta = np.asarray(grad_out, dtype=np.float64)
    gw, gb = [None] * len(net.weights), [None] * len(net.weights)
    for k in range(len(net.weights) - 1, -1, -1):
        gw[k] = delta.T @ acts[k]
        gb[k] = delta.sum(axis=0)
        delta = delta @ net.weights[k]
        if k > 0:
            delta = delta * (1.0 - acts[k] ** 2)
    return gw, gb, delta


def sgd_step(net, gw, gb, lr, lam):
    for w, b, dw, db in zip(net.weights, net.biases, gw, gb):
        w -= lr * (dw + 2.0 * lam * w)
        b -= lr * db
    return net


def backward_and_step(net, batch, loss_gradient_at_output, cfg, acts=None):
    """One in-place SGD step; returns ``net``.

    The update includes the ``2 * lam * W`` regularizer gradient on weights.
    Pass ``acts`` from :func:`forward_trace` to skip recomputing the forward pass.
    """
    if acts is None:
        acts = forward_trace(net, batch)
    gw, gb, _ = backward(net, acts, np.asarray(loss_gradient_at_output, dtype=np.float64))
    return sgd_step(net, gw, gb, cfg.learning_rate, cfg.l2_lambda)


def _binary_flags(kind, shape):
    if isinstance(kind, str):
        if kind not in ("binary", "continuous"):
            raise ValueError(f"loss kind must be 'binary' or 'continuous', got {kind!r}")
        return np.full(shape[1], kind == "binary")
    flags = np.asarray(kind, dtype=bool)
    if flags.shape != (shape[1],):
        raise ShapeError(f"per-column loss kinds have shape {flags.shape}, expected ({shape[1]},)")
    return flags


def _check_pair(pred, target):
    pred, target = as_matrix(pred, "pred"), as_matrix(target, "target")
    if pred.shape != target.shape:
        raise ShapeError(f"prediction shape {pred.shape} differs from target shape {target.shape}")
    return pred, target


def generator_elementwise(pred, target, kind):
    """Per-element generator loss (cross-entropy or squared error)."""
    pred, target = _check_pair(pred, target)
    binary = _binary_flags(kind, pred.shape)
    out = (pred - target) ** 2
    if binary.any():
        p, x = pred[:, binary], target[:, binary]
        if ((p <= 0.0) | (p >= 1.0)).any():
            raise DomainError("binary cross-entropy needs predictions strictly inside (0, 1)")
        out[:, binary] = -x * np.log(p) - (1.0 - x) * np.log(1.0 - p)
    return out


def generator_loss_gradient(pred, target, kind):
    """Derivative of the summed generator loss w.r.t. ``pred``."""
    pred, target = _check_pair(pred, target)
    binary = _binary_flags(kind, pred.shape)
    g = 2.0 * (pred - target)
    if binary.any():
        p, x = pred[:, binary], target[:, binary]
        g[:, binary] = -x / p + (1.0 - x) / (1.0 - p)
    return g


def generator_loss(pred, target, kind, net=None, lam=0.0):
    """Summed element loss plus ``lam * ||W||^2`` (weights of ``net`` only)."""
    loss = float(generator_elementwise(pred, target, kind).sum())
    if net is not None and lam:
        loss += lam * net.l2()
    return loss


def discriminator_loss(pred, mask_truth, net=None, lam=0.0):
    """Squared error between predicted and true missingness, plus L2."""
    pred, truth = _check_pair(pred, mask_truth)
    loss = float(np.sum((pred - truth) ** 2))
    if net is not None and lam:
        loss += lam * net.l2()
    return loss


def discriminator_loss_gradient(pred, mask_truth):
    pred, truth = _check_pair(pred, mask_truth)
    return 2.0 * (pred - truth)


def _loss_and_grads(net, batch, target, kind, lam):
    acts = forward_trace(net, batch)
    pred = acts[-1]
    if kind == "discriminator":
        loss = discriminator_loss(pred, target, net, lam)
        g = discriminator_loss_gradient(pred, target)
    else:
        loss = generator_loss(pred, target, kind, net, lam)
        g = generator_loss_gradient(pred, target, kind)
    gw, gb, _ = backward(net, acts, g)
    gw = [dw + 2.0 * lam * w for dw, w in zip(gw, net.weights)]
    return loss, gw, gb


def gradient_check(net, batch, target, kind="continuous", lam=0.0, h=1e-5):
    """Largest relative error between analytic and central-difference gradients.

    ``kind`` is ``"binary"``, ``"continuous"``, a per-column flag array, or
    ``"discriminator"``.  Relative error is
    ``|ga - gn| / max(1e-8, |ga| + |gn|)``, maximized over all parameters.
    """
    if net.n_params > 500:
        raise ValueError(f"gradient check is for small networks (<= 500 parameters), got {net.n_params}")
    _, gw, gb = _loss_and_grads(net, batch, target, kind, lam)

    def loss_at():
        pred = forward(net, batch)
        if kind == "discriminator":
            return discriminator_loss(pred, target, net, lam)
        return generator_loss(pred, target, kind, net, lam)

    worst = 0.0
    for params, grads in ((net.weights, gw), (net.biases, gb)):
        for p, g in zip(params, grads):
            for idx in np.ndindex(p.shape):
                old = p[idx]
                p[idx] = old + h
                up = loss_at()
                p[idx] = old - h
                down = loss_at()
                p[idx] = old
                num = (up - down) / (2.0 * h)
                err = abs(g[idx] - num) / max(1e-8, abs(g[idx]) + abs(num))
                worst = max(worst, err)
    return worst
