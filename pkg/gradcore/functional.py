"""Differentiable primitives.

Each primitive is a :class:`~gradcore.tensor.Function` whose backward rule is
written with other primitives, so every rule here can be recorded and
differentiated a second time.
"""

from __future__ import annotations

from typing import Optional, Sequence, Union

import numpy as np
from scipy.special import expit

from exceptions import ContractError
from gradcore.tensor import ArrayLike, Context, Function, Tensor, as_tensor

Axis = Optional[Union[int, tuple[int, ...]]]


def _sum_to_shape(array: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Reduce a broadcast result back onto ``shape``."""
    if array.shape == shape:
        return array
    lead = array.ndim - len(shape)
    if lead > 0:
        array = array.sum(axis=tuple(range(lead)))
    axes = tuple(i for i, extent in enumerate(shape) if extent == 1 and array.shape[i] != 1)
    if axes:
        array = array.sum(axis=axes, keepdims=True)
    return array.reshape(shape)


def _normalize_axes(axis: Axis, ndim: int) -> tuple[int, ...]:
    if axis is None:
        return tuple(range(ndim))
    if isinstance(axis, int):
        axis = (axis,)
    return tuple(sorted(a % ndim for a in axis))


# Shape plumbing


class SumTo(Function):
    @staticmethod
    def forward(ctx: Context, x: np.ndarray, shape: tuple[int, ...] = ()) -> np.ndarray:
        return _sum_to_shape(x, shape)

    @staticmethod
    def backward(ctx: Context, g: Tensor) -> tuple[Optional[Tensor], ...]:
        return (broadcast_to(g, ctx.inputs[0].shape),)


class BroadcastTo(Function):
    @staticmethod
    def forward(ctx: Context, x: np.ndarray, shape: tuple[int, ...] = ()) -> np.ndarray:
        return np.broadcast_to(x, shape).copy()

    @staticmethod
    def backward(ctx: Context, g: Tensor) -> tuple[Optional[Tensor], ...]:
        return (sum_to(g, ctx.inputs[0].shape),)


class Reshape(Function):
    @staticmethod
    def forward(ctx: Context, x: np.ndarray, shape: tuple[int, ...] = ()) -> np.ndarray:
        return x.reshape(shape)

    @staticmethod
    def backward(ctx: Context, g: Tensor) -> tuple[Optional[Tensor], ...]:
        return (reshape(g, ctx.inputs[0].shape),)


class Permute(Function):
    @staticmethod
    def forward(ctx: Context, x: np.ndarray, axes: tuple[int, ...] = ()) -> np.ndarray:
        return np.ascontiguousarray(np.transpose(x, axes))

    @staticmethod
    def backward(ctx: Context, g: Tensor) -> tuple[Optional[Tensor], ...]:
        inverse = tuple(int(i) for i in np.argsort(ctx.kwargs["axes"]))
        return (permute(g, inverse),)


class Sum(Function):
    @staticmethod
    def forward(ctx: Context, x: np.ndarray, axis: Axis = None, keepdims: bool = False) -> np.ndarray:
        return np.asarray(x.sum(axis=axis, keepdims=keepdims))

    @staticmethod
    def backward(ctx: Context, g: Tensor) -> tuple[Optional[Tensor], ...]:
        x = ctx.inputs[0]
        if not ctx.kwargs.get("keepdims", False):
            kept = list(x.shape)
            for a in _normalize_axes(ctx.kwargs.get("axis"), x.ndim):
                kept[a] = 1
            g = reshape(g, tuple(kept))
        return (broadcast_to(g, x.shape),)


# Arithmetic


class Add(Function):
    @staticmethod
    def forward(ctx: Context, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return a + b

    @staticmethod
    def backward(ctx: Context, g: Tensor) -> tuple[Optional[Tensor], ...]:
        a, b = ctx.inputs
        return sum_to(g, a.shape), sum_to(g, b.shape)


class Sub(Function):
    @staticmethod
    def forward(ctx: Context, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return a - b

    @staticmethod
    def backward(ctx: Context, g: Tensor) -> tuple[Optional[Tensor], ...]:
        a, b = ctx.inputs
        return sum_to(g, a.shape), sum_to(neg(g), b.shape)


class Mul(Function):
    @staticmethod
    def forward(ctx: Context, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return a * b

    @staticmethod
    def backward(ctx: Context, g: Tensor) -> tuple[Optional[Tensor], ...]:
        a, b = ctx.inputs
        grad_a = sum_to(mul(g, b), a.shape) if a.requires_grad else None
        grad_b = sum_to(mul(g, a), b.shape) if b.requires_grad else None
        return grad_a, grad_b


class Div(Function):
    @staticmethod
    def forward(ctx: Context, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return a / b

    @staticmethod
    def backward(ctx: Context, g: Tensor) -> tuple[Optional[Tensor], ...]:
        a, b = ctx.inputs
        grad_a = sum_to(div(g, b), a.shape) if a.requires_grad else None
        grad_b = None
        if b.requires_grad:
            grad_b = sum_to(neg(div(mul(g, a), mul(b, b))), b.shape)
        return grad_a, grad_b


class Neg(Function):
    @staticmethod
    def forward(ctx: Context, x: np.ndarray) -> np.ndarray:
        return -x

    @staticmethod
    def backward(ctx: Context, g: Tensor) -> tuple[Optional[Tensor], ...]:
        return (neg(g),)


class PowScalar(Function):
    @staticmethod
    def forward(ctx: Context, x: np.ndarray, exponent: float = 1.0) -> np.ndarray:
        return np.power(x, exponent)

    @staticmethod
    def backward(ctx: Context, g: Tensor) -> tuple[Optional[Tensor], ...]:
        (x,) = ctx.inputs
        p = ctx.kwargs["exponent"]
        if p == 1.0:
            return (g,)
        return (mul(g, mul(power(x, p - 1.0), p)),)


class Exp(Function):
    @staticmethod
    def forward(ctx: Context, x: np.ndarray) -> np.ndarray:
        return np.exp(x)

    @staticmethod
    def backward(ctx: Context, g: Tensor) -> tuple[Optional[Tensor], ...]:
        return (mul(g, ctx.output),)


class Log(Function):
    @staticmethod
    def forward(ctx: Context, x: np.ndarray) -> np.ndarray:
        return np.log(x)

    @staticmethod
    def backward(ctx: Context, g: Tensor) -> tuple[Optional[Tensor], ...]:
        return (div(g, ctx.inputs[0]),)


class MatMul(Function):
    @staticmethod
    def forward(ctx: Context, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return a @ b

    @staticmethod
    def backward(ctx: Context, g: Tensor) -> tuple[Optional[Tensor], ...]:
        a, b = ctx.inputs
        grad_a = matmul(g, permute(b, (1, 0))) if a.requires_grad else None
        grad_b = matmul(permute(a, (1, 0)), g) if b.requires_grad else None
        return grad_a, grad_b


class Clamp(Function):
    @staticmethod
    def forward(
        ctx: Context, x: np.ndarray, low: Optional[float] = None, high: Optional[float] = None
    ) -> np.ndarray:
        return np.clip(x, low, high)

    @staticmethod
    def backward(ctx: Context, g: Tensor) -> tuple[Optional[Tensor], ...]:
        x = ctx.inputs[0].data
        inside = np.ones_like(x)
        if ctx.kwargs.get("low") is not None:
            inside = inside * (x >= ctx.kwargs["low"])
        if ctx.kwargs.get("high") is not None:
            inside = inside * (x <= ctx.kwargs["high"])
        return (mul(g, Tensor(inside)),)


# Activations


class Tanh(Function):
    @staticmethod
    def forward(ctx: Context, x: np.ndarray) -> np.ndarray:
        return np.tanh(x)

    @staticmethod
    def backward(ctx: Context, g: Tensor) -> tuple[Optional[Tensor], ...]:
        out = ctx.output
        return (mul(g, sub(1.0, mul(out, out))),)


class Sigmoid(Function):
    @staticmethod
    def forward(ctx: Context, x: np.ndarray) -> np.ndarray:
        return expit(x)

    @staticmethod
    def backward(ctx: Context, g: Tensor) -> tuple[Optional[Tensor], ...]:
        out = ctx.output
        return (mul(g, mul(out, sub(1.0, out))),)


class Softplus(Function):
    @staticmethod
    def forward(ctx: Context, x: np.ndarray) -> np.ndarray:
        # log(1 + e^x) without overflow for large |x|
        return np.logaddexp(0.0, x)

    @staticmethod
    def backward(ctx: Context, g: Tensor) -> tuple[Optional[Tensor], ...]:
        return (mul(g, sigmoid(ctx.inputs[0])),)


# Resampling over the three trailing spatial axes


class Upsample(Function):
    @staticmethod
    def forward(ctx: Context, x: np.ndarray, factors: tuple[int, int, int] = (1, 1, 1)) -> np.ndarray:
        out = x
        for offset, factor in enumerate(factors):
            if factor > 1:
                out = np.repeat(out, factor, axis=x.ndim - 3 + offset)
        return out

    @staticmethod
    def backward(ctx: Context, g: Tensor) -> tuple[Optional[Tensor], ...]:
        return (sum_pool(g, ctx.kwargs["factors"]),)


class SumPool(Function):
    @staticmethod
    def forward(ctx: Context, x: np.ndarray, factors: tuple[int, int, int] = (1, 1, 1)) -> np.ndarray:
        lead = x.shape[:-3]
        fx, fy, fz = factors
        X, Y, Z = x.shape[-3:]
        blocks = x.reshape(*lead, X // fx, fx, Y // fy, fy, Z // fz, fz)
        n = len(lead)
        return blocks.sum(axis=(n + 1, n + 3, n + 5))

    @staticmethod
    def backward(ctx: Context, g: Tensor) -> tuple[Optional[Tensor], ...]:
        return (upsample(g, ctx.kwargs["factors"]),)


# Public API


def add(a: ArrayLike, b: ArrayLike) -> Tensor:
    return Add.apply(a, b)


def sub(a: ArrayLike, b: ArrayLike) -> Tensor:
    return Sub.apply(a, b)


def mul(a: ArrayLike, b: ArrayLike) -> Tensor:
    return Mul.apply(a, b)


def div(a: ArrayLike, b: ArrayLike) -> Tensor:
    return Div.apply(a, b)


def neg(x: ArrayLike) -> Tensor:
    return Neg.apply(x)


def power(x: ArrayLike, exponent: float) -> Tensor:
    return PowScalar.apply(x, exponent=float(exponent))


def sqrt(x: ArrayLike) -> Tensor:
    return power(x, 0.5)


def exp(x: ArrayLike) -> Tensor:
    return Exp.apply(x)


def log(x: ArrayLike) -> Tensor:
    return Log.apply(x)


def matmul(a: ArrayLike, b: ArrayLike) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 2 or b.ndim != 2:
        raise ContractError(f"matmul expects 2D operands, got {a.shape} and {b.shape}")
    return MatMul.apply(a, b)


def clamp(x: ArrayLike, low: Optional[float] = None, high: Optional[float] = None) -> Tensor:
    return Clamp.apply(x, low=low, high=high)


def sum(x: ArrayLike, axis: Axis = None, keepdims: bool = False) -> Tensor:  # noqa: A001
    return Sum.apply(x, axis=axis, keepdims=keepdims)


def mean(x: ArrayLike, axis: Axis = None, keepdims: bool = False) -> Tensor:
    x = as_tensor(x)
    count = int(np.prod([x.shape[a] for a in _normalize_axes(axis, x.ndim)]))
    return div(sum(x, axis=axis, keepdims=keepdims), float(max(count, 1)))


def reshape(x: ArrayLike, shape: Sequence[int]) -> Tensor:
    return Reshape.apply(x, shape=tuple(int(s) for s in shape))


def permute(x: ArrayLike, axes: Sequence[int]) -> Tensor:
    return Permute.apply(x, axes=tuple(int(a) for a in axes))


def broadcast_to(x: ArrayLike, shape: Sequence[int]) -> Tensor:
    x = as_tensor(x)
    shape = tuple(int(s) for s in shape)
    if x.shape == shape:
        return x
    return BroadcastTo.apply(x, shape=shape)


def sum_to(x: ArrayLike, shape: Sequence[int]) -> Tensor:
    x = as_tensor(x)
    shape = tuple(int(s) for s in shape)
    if x.shape == shape:
        return x
    return SumTo.apply(x, shape=shape)


def upsample(x: ArrayLike, factors: Sequence[int]) -> Tensor:
    """Nearest-neighbour upsampling of the three trailing axes."""
    factors = tuple(int(f) for f in factors)
    if factors == (1, 1, 1):
        return as_tensor(x)
    return Upsample.apply(x, factors=factors)


def sum_pool(x: ArrayLike, factors: Sequence[int]) -> Tensor:
    factors = tuple(int(f) for f in factors)
    x = as_tensor(x)
    if factors == (1, 1, 1):
        return x
    if any(extent % f for extent, f in zip(x.shape[-3:], factors)):
        raise ContractError(f"pooling factors {factors} do not divide {x.shape[-3:]}")
    return SumPool.apply(x, factors=factors)


def avg_pool(x: ArrayLike, factors: Sequence[int]) -> Tensor:
    """Average pooling of the three trailing axes with window = stride = factors."""
    factors = tuple(int(f) for f in factors)
    if factors == (1, 1, 1):
        return as_tensor(x)
    return div(sum_pool(x, factors), float(np.prod(factors)))


def relu(x: ArrayLike) -> Tensor:
    x = as_tensor(x)
    return mul(x, Tensor((x.data > 0).astype(x.dtype)))


def leaky_relu(x: ArrayLike, slope: float = 0.2) -> Tensor:
    x = as_tensor(x)
    return mul(x, Tensor(np.where(x.data >= 0, 1.0, slope).astype(x.dtype)))


def tanh(x: ArrayLike) -> Tensor:
    return Tanh.apply(x)


def sigmoid(x: ArrayLike) -> Tensor:
    return Sigmoid.apply(x)


def softplus(x: ArrayLike) -> Tensor:
    return Softplus.apply(x)


def flatten_batch(x: Tensor) -> Tensor:
    """Collapse every axis but the first."""
    return reshape(x, (x.shape[0], -1))


def norm(x: Tensor, axis: Axis = None, eps: float = 0.0) -> Tensor:
    """Euclidean norm over ``axis``; ``eps`` is added under the square root."""
    return sqrt(add(sum(mul(x, x), axis=axis), eps))
