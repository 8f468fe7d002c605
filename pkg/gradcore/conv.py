"""Strided 3D cross-correlation and its transpose.

All three kernels (forward, input gradient, weight gradient) loop over the
kernel offsets and contract channels with ``np.tensordot``. The loop order is
fixed, so results do not depend on the BLAS thread count beyond what
``tensordot`` itself guarantees.

Layout is ``[N, C, X, Y, Z]`` with Z fastest. Convolution weights are
``[C_out, C_in, kx, ky, kz]``; transposed-convolution weights are
``[C_in, C_out, kx, ky, kz]`` so that the same array serves both directions.
"""

from __future__ import annotations

from itertools import product
from typing import Optional, Sequence, Union

import numpy as np

from exceptions import ConfigurationError
from gradcore import functional as F
from gradcore.tensor import ArrayLike, Context, Function, Tensor, as_tensor

Triple = tuple[int, int, int]
IntOrTriple = Union[int, Sequence[int]]


def as_triple(value: IntOrTriple, name: str = "value") -> Triple:
    if isinstance(value, (int, np.integer)):
        return (int(value),) * 3
    triple = tuple(int(v) for v in value)
    if len(triple) != 3:
        raise ConfigurationError(f"{name} must have 3 components, got {len(triple)}")
    return triple  # type: ignore[return-value]


def conv_output_extent(extent: int, kernel: int, stride: int, pad: int) -> int:
    return (extent + 2 * pad - kernel) // stride + 1


def transposed_output_extent(extent: int, kernel: int, stride: int, pad: int) -> int:
    return (extent - 1) * stride - 2 * pad + kernel


def _window(offset: int, stride: int, count: int) -> slice:
    return slice(offset, offset + stride * (count - 1) + 1, stride)


def _conv_forward(x: np.ndarray, w: np.ndarray, stride: Triple, pad: Triple) -> np.ndarray:
    n = x.shape[0]
    kernel = w.shape[2:]
    out_spatial = [conv_output_extent(e, k, s, p) for e, k, s, p in zip(x.shape[2:], kernel, stride, pad)]
    xp = np.pad(x, ((0, 0), (0, 0)) + tuple((p, p) for p in pad)) if any(pad) else x
    out = np.zeros((w.shape[0], n, *out_spatial), dtype=np.result_type(x, w))
    for i, j, k in product(*(range(e) for e in kernel)):
        patch = xp[
            :,
            :,
            _window(i, stride[0], out_spatial[0]),
            _window(j, stride[1], out_spatial[1]),
            _window(k, stride[2], out_spatial[2]),
        ]
        out += np.tensordot(w[:, :, i, j, k], patch, axes=([1], [1]))
    return np.ascontiguousarray(np.moveaxis(out, 0, 1))


def _conv_input_grad(
    g: np.ndarray, w: np.ndarray, stride: Triple, pad: Triple, spatial: Sequence[int]
) -> np.ndarray:
    """Adjoint of :func:`_conv_forward` with respect to its input."""
    n = g.shape[0]
    kernel = w.shape[2:]
    out_spatial = g.shape[2:]
    padded = [e + 2 * p for e, p in zip(spatial, pad)]
    # Window positions that can fall beyond the padded extent when the
    # transposed output was cropped are accumulated into a slightly larger
    # buffer and cut away afterwards.
    full = [max(pe, s * (o - 1) + k) for pe, s, o, k in zip(padded, stride, out_spatial, kernel)]
    xp = np.zeros((w.shape[1], n, *full), dtype=np.result_type(g, w))
    for i, j, k in product(*(range(e) for e in kernel)):
        contribution = np.tensordot(w[:, :, i, j, k], g, axes=([0], [1]))
        xp[
            :,
            :,
            _window(i, stride[0], out_spatial[0]),
            _window(j, stride[1], out_spatial[1]),
            _window(k, stride[2], out_spatial[2]),
        ] += contribution
    cropped = xp[
        :,
        :,
        pad[0] : pad[0] + spatial[0],
        pad[1] : pad[1] + spatial[1],
        pad[2] : pad[2] + spatial[2],
    ]
    return np.ascontiguousarray(np.moveaxis(cropped, 0, 1))


def _conv_weight_grad(
    x: np.ndarray, g: np.ndarray, stride: Triple, pad: Triple, kernel: Sequence[int]
) -> np.ndarray:
    out_spatial = g.shape[2:]
    xp = np.pad(x, ((0, 0), (0, 0)) + tuple((p, p) for p in pad)) if any(pad) else x
    gw = np.zeros((g.shape[1], x.shape[1], *kernel), dtype=np.result_type(x, g))
    for i, j, k in product(*(range(e) for e in kernel)):
        patch = xp[
            :,
            :,
            _window(i, stride[0], out_spatial[0]),
            _window(j, stride[1], out_spatial[1]),
            _window(k, stride[2], out_spatial[2]),
        ]
        gw[:, :, i, j, k] = np.tensordot(g, patch, axes=([0, 2, 3, 4], [0, 2, 3, 4]))
    return gw


class Conv3dFn(Function):
    @staticmethod
    def forward(
        ctx: Context, x: np.ndarray, w: np.ndarray, stride: Triple = (1, 1, 1), padding: Triple = (0, 0, 0)
    ) -> np.ndarray:
        return _conv_forward(x, w, stride, padding)

    @staticmethod
    def backward(ctx: Context, g: Tensor) -> tuple[Optional[Tensor], ...]:
        x, w = ctx.inputs
        stride, padding = ctx.kwargs["stride"], ctx.kwargs["padding"]
        grad_x = grad_w = None
        if x.requires_grad:
            grad_x = ConvTranspose3dFn.apply(g, w, stride=stride, padding=padding, spatial=x.shape[2:])
        if w.requires_grad:
            grad_w = ConvWeightGradFn.apply(x, g, stride=stride, padding=padding, kernel=w.shape[2:])
        return grad_x, grad_w


class ConvTranspose3dFn(Function):
    @staticmethod
    def forward(
        ctx: Context,
        y: np.ndarray,
        w: np.ndarray,
        stride: Triple = (1, 1, 1),
        padding: Triple = (0, 0, 0),
        spatial: Sequence[int] = (),
    ) -> np.ndarray:
        return _conv_input_grad(y, w, stride, padding, spatial)

    @staticmethod
    def backward(ctx: Context, g: Tensor) -> tuple[Optional[Tensor], ...]:
        y, w = ctx.inputs
        stride, padding = ctx.kwargs["stride"], ctx.kwargs["padding"]
        grad_y = grad_w = None
        if y.requires_grad:
            grad_y = Conv3dFn.apply(g, w, stride=stride, padding=padding)
        if w.requires_grad:
            grad_w = ConvWeightGradFn.apply(g, y, stride=stride, padding=padding, kernel=w.shape[2:])
        return grad_y, grad_w


class ConvWeightGradFn(Function):
    """Weight gradient of a convolution, bilinear in (input, output gradient)."""

    @staticmethod
    def forward(
        ctx: Context,
        x: np.ndarray,
        g: np.ndarray,
        stride: Triple = (1, 1, 1),
        padding: Triple = (0, 0, 0),
        kernel: Sequence[int] = (),
    ) -> np.ndarray:
        return _conv_weight_grad(x, g, stride, padding, kernel)

    @staticmethod
    def backward(ctx: Context, h: Tensor) -> tuple[Optional[Tensor], ...]:
        x, g = ctx.inputs
        stride, padding = ctx.kwargs["stride"], ctx.kwargs["padding"]
        grad_x = grad_g = None
        if x.requires_grad:
            grad_x = ConvTranspose3dFn.apply(g, h, stride=stride, padding=padding, spatial=x.shape[2:])
        if g.requires_grad:
            grad_g = Conv3dFn.apply(x, h, stride=stride, padding=padding)
        return grad_x, grad_g


def _batched(x: Tensor) -> tuple[Tensor, bool]:
    if x.ndim == 4:
        return F.reshape(x, (1, *x.shape)), True
    if x.ndim != 5:
        raise ConfigurationError(f"expected a [N, C, X, Y, Z] or [C, X, Y, Z] input, got {x.shape}")
    return x, False


def _add_bias(out: Tensor, bias: Optional[ArrayLike]) -> Tensor:
    if bias is None:
        return out
    bias = as_tensor(bias)
    return F.add(out, F.reshape(bias, (1, bias.shape[0], 1, 1, 1)))


def _check_geometry(kernel: Sequence[int], stride: Triple, padding: Triple) -> None:
    if any(k < 1 for k in kernel):
        raise ConfigurationError(f"kernel extents must be >= 1, got {tuple(kernel)}")
    if any(s < 1 for s in stride):
        raise ConfigurationError(f"stride components must be >= 1, got {stride}")
    if any(p < 0 for p in padding):
        raise ConfigurationError(f"padding must be non-negative, got {padding}")


def conv3d(
    input: ArrayLike,
    weight: ArrayLike,
    bias: Optional[ArrayLike] = None,
    stride: IntOrTriple = 1,
    padding: IntOrTriple = 0,
) -> Tensor:
    """Direct 3D cross-correlation.

    Args:
        input: Tensor of shape [N, C_in, X, Y, Z] (or [C_in, X, Y, Z])
        weight: Tensor of shape [C_out, C_in, kx, ky, kz]
        bias: Optional tensor of shape [C_out]
        stride: Per-axis stride
        padding: Per-axis zero padding

    Returns:
        Tensor of shape [N, C_out, X', Y', Z'] with X' = (X + 2p - k) // s + 1

    Raises:
        ConfigurationError: On channel mismatch or a non-positive output extent
    """
    x, squeeze = _batched(as_tensor(input))
    w = as_tensor(weight)
    stride_t, pad_t = as_triple(stride, "stride"), as_triple(padding, "padding")
    _check_geometry(w.shape[2:], stride_t, pad_t)
    if w.ndim != 5 or w.shape[1] != x.shape[1]:
        raise ConfigurationError(
            f"weight {w.shape} does not match input channels {x.shape[1]}"
        )
    out_spatial = [
        conv_output_extent(e, k, s, p) for e, k, s, p in zip(x.shape[2:], w.shape[2:], stride_t, pad_t)
    ]
    if any(e < 1 for e in out_spatial):
        raise ConfigurationError(
            f"convolution output extent {tuple(out_spatial)} is not positive for input {x.shape}"
        )
    out = _add_bias(Conv3dFn.apply(x, w, stride=stride_t, padding=pad_t), bias)
    return F.reshape(out, out.shape[1:]) if squeeze else out


def conv3d_transposed(
    input: ArrayLike,
    weight: ArrayLike,
    bias: Optional[ArrayLike] = None,
    stride: IntOrTriple = 1,
    padding: IntOrTriple = 0,
    output_spatial: Optional[Sequence[int]] = None,
) -> Tensor:
    """Transposed 3D convolution (the adjoint of :func:`conv3d`).

    Args:
        input: Tensor of shape [N, C_in, X, Y, Z] (or [C_in, X, Y, Z])
        weight: Tensor of shape [C_in, C_out, kx, ky, kz]
        bias: Optional tensor of shape [C_out]
        stride: Per-axis stride
        padding: Per-axis padding removed from the output
        output_spatial: Explicit output extents; defaults to (in - 1) * s - 2p + k

    Returns:
        Tensor of shape [N, C_out, X', Y', Z']

    Raises:
        ConfigurationError: On channel mismatch or a non-positive output extent
    """
    y, squeeze = _batched(as_tensor(input))
    w = as_tensor(weight)
    stride_t, pad_t = as_triple(stride, "stride"), as_triple(padding, "padding")
    _check_geometry(w.shape[2:], stride_t, pad_t)
    if w.ndim != 5 or w.shape[0] != y.shape[1]:
        raise ConfigurationError(
            f"transposed weight {w.shape} does not match input channels {y.shape[1]}"
        )
    if output_spatial is None:
        output_spatial = [
            transposed_output_extent(e, k, s, p)
            for e, k, s, p in zip(y.shape[2:], w.shape[2:], stride_t, pad_t)
        ]
    spatial = tuple(int(e) for e in output_spatial)
    if any(e < 1 for e in spatial):
        raise ConfigurationError(
            f"transposed convolution output extent {spatial} is not positive for input {y.shape}"
        )
    out = ConvTranspose3dFn.apply(y, w, stride=stride_t, padding=pad_t, spatial=spatial)
    out = _add_bias(out, bias)
    return F.reshape(out, out.shape[1:]) if squeeze else out
