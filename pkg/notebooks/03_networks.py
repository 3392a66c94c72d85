"""
Small networks trained by hand
==============================

Generators and discriminators are plain multilayer perceptrons with tanh
hidden layers and a sigmoid output.  Gradients come from explicit
backpropagation, which we check here against central finite differences,
then use for a few steps of SGD.
"""
import numpy as np

from fsimpute import RngStream
from fsimpute.nn import (MlpSpec, TrainConfig, backward_and_step, forward, forward_trace,
                         generator_loss, generator_loss_gradient, gradient_check, mlp_init)

rng = RngStream(3)
net = mlp_init(MlpSpec.default(4, 1, 6), rng.child("init"))
x = rng.uniform(size=(16, 4))
y = (x[:, [0]] + x[:, [1]]) / 2

for kind in ("continuous", "binary"):
    target = y if kind == "continuous" else (y > 0.5).astype(float)
    print(kind, "max relative gradient error", gradient_check(net, x, target, kind, 0.5))

cfg = TrainConfig(learning_rate=0.05, l2_lambda=0.0)
for step in range(201):
    acts = forward_trace(net, x)
    if step % 50 == 0:
        print("step", step, "loss", round(generator_loss(acts[-1], y, "continuous"), 5))
    backward_and_step(net, x, generator_loss_gradient(acts[-1], y, "continuous"), cfg, acts)
print("prediction vs target:", np.c_[forward(net, x)[:3], y[:3]].round(3).tolist())
