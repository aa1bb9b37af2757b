"""Small float64 numeric kit: dense layers, optimizers, seeds, checks."""

from . import kernels
from .checkpoint import load as load_checkpoint
from .checkpoint import save as save_checkpoint
from .gradcheck import flatten, grad_check, numeric_grad, unflatten_into
from .layers import (
    MLP,
    DenseLayer,
    activate,
    check_finite,
    dense_backward,
    dense_forward,
    log_sigmoid,
    sigmoid,
    softmax,
    softmax_backward,
)
from .optim import SGD, Adam, make_optimizer
from .rng import derive_seed, make_rng

__all__ = [
    "MLP",
    "SGD",
    "Adam",
    "DenseLayer",
    "activate",
    "check_finite",
    "dense_backward",
    "dense_forward",
    "derive_seed",
    "flatten",
    "grad_check",
    "kernels",
    "load_checkpoint",
    "log_sigmoid",
    "make_optimizer",
    "make_rng",
    "numeric_grad",
    "save_checkpoint",
    "sigmoid",
    "softmax",
    "softmax_backward",
    "unflatten_into",
]
