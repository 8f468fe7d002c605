"""Adversarial losses."""

from __future__ import annotations

import numpy as np

from exceptions import ContractError
from gradcore import functional as F
from gradcore.tensor import ArrayLike, Tensor, as_tensor

PROBABILITY_FLOOR = 1e-12


def _targets_like(logits: Tensor, targets: ArrayLike) -> Tensor:
    t = as_tensor(targets)
    if t.ndim == 0:
        return Tensor(np.full(logits.shape, float(t.data), dtype=logits.dtype))
    if t.shape != logits.shape:
        raise ContractError(f"targets {t.shape} do not match logits {logits.shape}")
    return t


def bce_with_logits(logits: ArrayLike, targets: ArrayLike) -> Tensor:
    """Mean of softplus(x) - t * x.

    Softplus uses ``logaddexp``, which stays finite far beyond |x| = 1e4.
    A scalar target is broadcast to the logits shape.
    """
    x = as_tensor(logits)
    t = _targets_like(x, targets)
    return F.mean(F.sub(F.softplus(x), F.mul(t, x)))


def binary_cross_entropy(probabilities: ArrayLike, targets: ArrayLike) -> Tensor:
    """Plain cross-entropy on probabilities, used by the sigmoid-terminated baseline."""
    p = F.clamp(as_tensor(probabilities), PROBABILITY_FLOOR, 1.0 - PROBABILITY_FLOOR)
    t = _targets_like(p, targets)
    loss = F.add(F.mul(t, F.log(p)), F.mul(F.sub(1.0, t), F.log(F.sub(1.0, p))))
    return F.neg(F.mean(loss))
