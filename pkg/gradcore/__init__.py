"""Dense tensors with reverse-mode differentiation and the network primitives."""

from gradcore.conv import conv3d, conv3d_transposed
from gradcore.functional import leaky_relu, relu, sigmoid, softplus, tanh
from gradcore.init import init_normal, init_orthogonal
from gradcore.losses import bce_with_logits, binary_cross_entropy
from gradcore.norm import RunningStats, batch_norm, conditional_batch_norm
from gradcore.optim import Adam, Parameter, adam_step, zero_grad
from gradcore.spectral import power_iteration, spectral_normalize
from gradcore.tensor import (
    ComputationTape,
    Function,
    Tensor,
    as_tensor,
    backward,
    get_default_dtype,
    grad,
    is_grad_enabled,
    no_grad,
    set_default_dtype,
    set_grad_enabled,
)

__all__ = [
    "Adam",
    "ComputationTape",
    "Function",
    "Parameter",
    "RunningStats",
    "Tensor",
    "adam_step",
    "as_tensor",
    "backward",
    "batch_norm",
    "bce_with_logits",
    "binary_cross_entropy",
    "conditional_batch_norm",
    "conv3d",
    "conv3d_transposed",
    "get_default_dtype",
    "grad",
    "init_normal",
    "init_orthogonal",
    "is_grad_enabled",
    "leaky_relu",
    "no_grad",
    "power_iteration",
    "relu",
    "set_default_dtype",
    "set_grad_enabled",
    "sigmoid",
    "softplus",
    "spectral_normalize",
    "tanh",
    "zero_grad",
]
