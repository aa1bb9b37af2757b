"""Dense layers and activations with hand-written backward passes."""

from __future__ import annotations

import numpy as np

from ..errors import NumericError, ShapeError

ACTIVATIONS = ("identity", "relu", "tanh", "sigmoid", "softmax")


def check_finite(x, what="tensor"):
    if not np.all(np.isfinite(x)):
        raise NumericError(f"non-finite values in {what}")
    return x


def sigmoid(z):
    # split by sign so exp never overflows
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def log_sigmoid(z):
    return -np.logaddexp(0.0, -z)


def softmax(z, axis=-1):
    z = np.asarray(z, dtype=np.float64)
    shifted = z - np.max(z, axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=axis, keepdims=True)


def softmax_backward(y, grad_y, axis=-1):
    """Vector-Jacobian product of softmax given its output ``y``."""
    dot = np.sum(grad_y * y, axis=axis, keepdims=True)
    return y * (grad_y - dot)


def activate(name, z):
    if name == "identity":
        return z
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "tanh":
        return np.tanh(z)
    if name == "sigmoid":
        return sigmoid(z)
    if name == "softmax":
        return softmax(z)
    raise ShapeError(f"unknown activation {name!r}")


def activate_backward(name, z, y, grad_y):
    if name == "identity":
        return grad_y
    if name == "relu":
        return grad_y * (z > 0)
    if name == "tanh":
        return grad_y * (1.0 - y * y)
    if name == "sigmoid":
        return grad_y * y * (1.0 - y)
    if name == "softmax":
        return softmax_backward(y, grad_y)
    raise ShapeError(f"unknown activation {name!r}")


def glorot(rng, fan_out, fan_in):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_out, fan_in))


class DenseLayer:
    """``activation(W x + b)`` with ``W`` stored as (out, in).

    ``forward`` accepts a single vector or a batch of row vectors and caches
    what ``backward`` needs.
    """

    def __init__(self, weight, bias=None, activation="identity"):
        weight = np.array(weight, dtype=np.float64)
        if weight.ndim != 2:
            raise ShapeError("weight must be 2-D (out x in)")
        if bias is None:
            bias = np.zeros(weight.shape[0])
        bias = np.array(bias, dtype=np.float64)
        if bias.shape != (weight.shape[0],):
            raise ShapeError(f"bias shape {bias.shape} does not match weight {weight.shape}")
        if activation not in ACTIVATIONS:
            raise ShapeError(f"unknown activation {activation!r}")
        self.weight = weight
        self.bias = bias
        self.activation = activation
        self._cache = None

    @classmethod
    def init(cls, in_dim, out_dim, activation, rng, zero=False):
        if zero:
            w = np.zeros((out_dim, in_dim))
        else:
            w = glorot(rng, out_dim, in_dim)
        return cls(w, np.zeros(out_dim), activation)

    @property
    def in_dim(self):
        return self.weight.shape[1]

    @property
    def out_dim(self):
        return self.weight.shape[0]

    def params(self):
        return [self.weight, self.bias]

    def forward(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.in_dim or x.ndim > 2:
            raise ShapeError(f"input shape {x.shape} does not match layer in_dim {self.in_dim}")
        z = x @ self.weight.T + self.bias
        y = activate(self.activation, z)
        self._cache = (x, z, y)
        return y

    __call__ = forward

    def backward(self, grad_y):
        """Return ``(grad_W, grad_b, grad_x)`` for the last forward call."""
        if self._cache is None:
            raise ShapeError("backward called before forward")
        x, z, y = self._cache
        grad_y = np.asarray(grad_y, dtype=np.float64)
        if grad_y.shape != y.shape:
            raise ShapeError(f"upstream grad shape {grad_y.shape} != output shape {y.shape}")
        gz = activate_backward(self.activation, z, y, grad_y)
        if x.ndim == 1:
            grad_w = np.outer(gz, x)
            grad_b = gz.copy()
        else:
            grad_w = gz.T @ x
            grad_b = gz.sum(axis=0)
        grad_x = gz @ self.weight
        return grad_w, grad_b, grad_x


def dense_forward(layer: DenseLayer, x):
    return layer.forward(x)


def dense_backward(layer: DenseLayer, x, upstream_grad):
    layer.forward(x)
    return layer.backward(upstream_grad)


class MLP:
    """Stack of dense layers; all but the last use ``hidden_activation``."""

    def __init__(self, layers):
        self.layers = list(layers)

    @classmethod
    def init(cls, sizes, hidden_activation, out_activation, rng):
        layers = []
        for i in range(len(sizes) - 1):
            act = out_activation if i == len(sizes) - 2 else hidden_activation
            layers.append(DenseLayer.init(sizes[i], sizes[i + 1], act, rng))
        return cls(layers)

    def params(self):
        return [p for layer in self.layers for p in layer.params()]

    def forward(self, x):
        for layer in self.layers:
            x = layer.forward(x)
        return x

    __call__ = forward

    def backward(self, grad_y):
        grads = []
        for layer in reversed(self.layers):
            gw, gb, grad_y = layer.backward(grad_y)
            grads.append((gw, gb))
        flat = []
        for gw, gb in reversed(grads):
            flat.extend((gw, gb))
        return flat, grad_y
