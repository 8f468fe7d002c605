"""Forward-value checks of the convolution, normalization and loss primitives."""

from itertools import product

import numpy as np
import pytest

from gradcore import functional as F
from gradcore.conv import conv3d, conv3d_transposed
from gradcore.losses import bce_with_logits
from gradcore.norm import DEFAULT_EPSILON, batch_norm, conditional_batch_norm
from gradcore.tensor import Tensor, backward


def _naive_conv3d(x, w, stride, pad):
    """Seven nested loops over output channel, output cell, input channel and tap."""
    c_out, c_in, kx, ky, kz = w.shape
    xp = np.pad(x, ((0, 0),) + tuple((p, p) for p in pad))
    extents = [(e + 2 * p - k) // s + 1 for e, k, s, p in zip(x.shape[1:], w.shape[2:], stride, pad)]
    out = np.zeros((c_out, *extents))
    for o in range(c_out):
        for ox in range(extents[0]):
            for oy in range(extents[1]):
                for oz in range(extents[2]):
                    total = 0.0
                    for c in range(c_in):
                        for i, j, k in product(range(kx), range(ky), range(kz)):
                            total += (
                                w[o, c, i, j, k]
                                * xp[c, ox * stride[0] + i, oy * stride[1] + j, oz * stride[2] + k]
                            )
                    out[o, ox, oy, oz] = total
    return out


class TestConvolutionValues:
    """Test conv3d and its transpose against direct formulas."""

    def test_counting_kernel(self):
        """Test an all-ones 2x2x2 kernel over ones counts eight taps per cell."""
        x = np.ones((1, 4, 4, 4))
        w = np.ones((1, 1, 2, 2, 2))

        out = conv3d(x, w)

        assert out.shape == (1, 3, 3, 3)
        np.testing.assert_array_equal(out.data, 8.0)

    def test_matches_nested_loops(self, rng):
        """Test stride (2, 2, 1) and padding (1, 1, 1) against the loop oracle."""
        x = rng.standard_normal((2, 5, 5, 3))
        w = rng.standard_normal((3, 2, 3, 3, 3))

        out = conv3d(x, w, stride=(2, 2, 1), padding=(1, 1, 1))

        expected = _naive_conv3d(x, w, (2, 2, 1), (1, 1, 1))
        assert out.shape == (3, 3, 3, 3)
        np.testing.assert_allclose(out.data, expected, rtol=0, atol=1e-12)

    def test_zero_input_gives_bias(self, rng):
        """Test a zero input leaves only the per-channel bias."""
        w = rng.standard_normal((2, 3, 3, 3, 2))
        bias = np.array([0.5, -1.5])

        out = conv3d(np.zeros((2, 3, 4, 4, 3)), w, bias=bias, padding=1)

        np.testing.assert_array_equal(out.data[:, 0], 0.5)
        np.testing.assert_array_equal(out.data[:, 1], -1.5)

    def test_transposed_doubles_extent(self, rng):
        """Test kernel 4, stride 2 and padding 1 grow 4 cells to 8."""
        y = rng.standard_normal((1, 3, 4, 4, 4))
        w = rng.standard_normal((3, 2, 4, 4, 4))

        out = conv3d_transposed(y, w, stride=2, padding=1)

        assert out.shape == (1, 2, 8, 8, 8)

    @pytest.mark.parametrize("seed", range(10))
    def test_transpose_is_adjoint(self, seed):
        """Test <conv3d(x), y> equals <x, conv3d_transposed(y)> for random geometry."""
        rng = np.random.default_rng(seed)
        kernel = tuple(int(k) for k in rng.integers(1, 4, size=3))
        stride = tuple(int(s) for s in rng.integers(1, 3, size=3))
        padding = tuple(int(rng.integers(0, k)) for k in kernel)
        n, c_in, c_out = (int(v) for v in rng.integers(1, 4, size=3))
        spatial = tuple(int(e) for e in rng.integers(3, 7, size=3))
        x = rng.standard_normal((n, c_in, *spatial))
        w = rng.standard_normal((c_out, c_in, *kernel))
        y = rng.standard_normal(conv3d(x, w, stride=stride, padding=padding).shape)

        forward = float(np.sum(conv3d(x, w, stride=stride, padding=padding).data * y))
        adjoint = conv3d_transposed(y, w, stride=stride, padding=padding, output_spatial=spatial)

        assert adjoint.shape == x.shape
        assert abs(forward - float(np.sum(x * adjoint.data))) <= 1e-10 * max(1.0, abs(forward))


class TestNormalizationValues:
    """Test train-mode batch normalization outputs."""

    def test_constant_input_is_zero(self):
        """Test a constant batch standardizes to zero."""
        x = np.full((4, 2, 3, 3, 2), 7.0)

        out = batch_norm(x, np.ones(2), np.zeros(2))

        np.testing.assert_allclose(out.data, 0.0, atol=1e-12)

    def test_zero_scale_gives_shift(self, rng):
        """Test gamma = 0 and beta = 5 yield 5 everywhere."""
        x = rng.standard_normal((3, 2, 2, 2, 2))

        out = batch_norm(x, np.zeros(2), np.full(2, 5.0))

        np.testing.assert_allclose(out.data, 5.0, rtol=0, atol=1e-12)

    def test_per_channel_moments(self, rng):
        """Test outputs against per-channel mean and biased variance."""
        x = rng.standard_normal((4, 3, 3, 2, 2)) * np.array([1.0, 10.0, 0.1]).reshape(1, 3, 1, 1, 1)
        gamma = np.array([2.0, 0.5, 1.0])
        beta = np.array([1.0, -1.0, 0.0])

        out = batch_norm(x, gamma, beta)

        mean = x.mean(axis=(0, 2, 3, 4), keepdims=True)
        var = x.var(axis=(0, 2, 3, 4), keepdims=True)
        expected = (x - mean) / np.sqrt(var + DEFAULT_EPSILON) * gamma.reshape(1, 3, 1, 1, 1)
        expected += beta.reshape(1, 3, 1, 1, 1)
        np.testing.assert_allclose(out.data, expected, rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose(out.data.mean(axis=(0, 2, 3, 4)), beta, atol=1e-12)

    def test_conditional_zero_projection_is_plain(self, rng):
        """Test zero projections reduce to batch norm with unit scale and zero shift."""
        x = rng.standard_normal((4, 3, 2, 2, 2))
        z = rng.standard_normal((4, 5))
        zero = np.zeros((5, 3))

        out = conditional_batch_norm(x, z, zero, zero)

        plain = batch_norm(x, np.ones(3), np.zeros(3))
        np.testing.assert_allclose(out.data, plain.data, rtol=0, atol=1e-12)

    def test_conditional_zero_latent_is_plain(self, rng):
        """Test a zero latent ignores the projections."""
        x = rng.standard_normal((4, 3, 2, 2, 2))
        w_gamma, w_beta = rng.standard_normal((5, 3)), rng.standard_normal((5, 3))

        out = conditional_batch_norm(x, np.zeros((4, 5)), w_gamma, w_beta)

        plain = batch_norm(x, np.ones(3), np.zeros(3))
        np.testing.assert_allclose(out.data, plain.data, rtol=0, atol=1e-12)


class TestExtremeLogits:
    """Test saturating functions at |x| up to 1e4."""

    LOGITS = np.linspace(-1e4, 1e4, 101)

    @pytest.mark.parametrize("target", [0.0, 1.0])
    def test_bce_with_logits_finite(self, target):
        """Test loss and gradient stay finite."""
        logits = Tensor(self.LOGITS.copy(), requires_grad=True)

        loss = bce_with_logits(logits, target)
        backward(loss)

        assert np.isfinite(loss.data)
        assert np.all(np.isfinite(logits.grad))

    def test_sigmoid_finite(self):
        """Test sigmoid saturates to 0 and 1 without overflow."""
        out = F.sigmoid(self.LOGITS).data

        assert np.all(np.isfinite(out))
        assert out[0] == 0.0
        assert out[-1] == 1.0
        assert np.all((out >= 0.0) & (out <= 1.0))
