"""In-place optimizers over lists of numpy parameter arrays."""

import numpy as np

from ..errors import InvalidConfig, NumericError


class SGD:
    kind = "sgd"

    def __init__(self, params, learning_rate):
        if learning_rate <= 0:
            raise InvalidConfig("learning_rate must be positive")
        self.params = list(params)
        self.learning_rate = float(learning_rate)

    def step(self, grads):
        for p, g in zip(self.params, grads, strict=True):
            p -= self.learning_rate * g


class Adam:
    kind = "adam"

    def __init__(self, params, learning_rate, beta1=0.9, beta2=0.999, eps=1e-8):
        if learning_rate <= 0:
            raise InvalidConfig("learning_rate must be positive")
        self.params = list(params)
        self.learning_rate = float(learning_rate)
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p) for p in self.params]
        self.v = [np.zeros_like(p) for p in self.params]

    def step(self, grads):
        grads = list(grads)
        if len(grads) != len(self.params):
            raise InvalidConfig(f"expected {len(self.params)} gradients, got {len(grads)}")
        for g in grads:
            if not np.all(np.isfinite(g)):
                raise NumericError("non-finite gradient")
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.learning_rate * (m / c1) / (np.sqrt(v / c2) + self.eps)


def make_optimizer(kind, params, learning_rate):
    if kind == "adam":
        return Adam(params, learning_rate)
    if kind == "sgd":
        return SGD(params, learning_rate)
    raise InvalidConfig(f"unknown optimizer {kind!r}")
