"""Unit tests for the growth schedule and the preset ladder."""

import pytest

from exceptions import ConfigurationError
from models.presets import PRESETS, preset_names, resolve_preset
from models.schedule import stride_schedule, upsampling_factors
from schemas.config import TrainConfig


class TestStrideSchedule:
    """Test per-axis strides, kernels and padding."""

    def test_early_stop_anisotropic(self):
        """Test (4, 4, 4) -> (128, 128, 16): z stops growing after two layers."""
        steps = stride_schedule((4, 4, 4), (128, 128, 16))

        assert [s.stride for s in steps] == [(2, 2, 2)] * 2 + [(2, 2, 1)] * 3
        assert steps[-1].kernel == (4, 4, 1)
        assert steps[-1].padding == (1, 1, 0)
        assert steps[0].padding == (1, 1, 1)
        assert upsampling_factors(steps) == (32, 32, 4)

    def test_uniform_growth(self):
        """Test (8, 8, 1) -> (128, 128, 16) in four isotropic layers."""
        steps = stride_schedule((8, 8, 1), (128, 128, 16), policy="uniform")

        assert len(steps) == 4
        assert all(s.stride == (2, 2, 2) and s.kernel == (4, 4, 4) for s in steps)

    def test_identity_schedule_is_empty(self):
        """Test a latent already at the target needs no layers."""
        assert stride_schedule((4, 4, 4), (4, 4, 4)) == []

    def test_residual_kernel_follows_active_axes(self):
        """Test stride-1 kernels are 3 only on growing axes."""
        step = stride_schedule((4, 4, 4), (16, 16, 8))[-1]

        assert step.active_axes == (True, True, False)
        assert step.residual_kernel() == (3, 3, 1)

    def test_larger_kernel_base(self):
        """Test kernel_base 6 pads by 2."""
        steps = stride_schedule((2, 2, 2), (4, 4, 2), kernel_base=6)

        assert len(steps) == 1
        assert steps[0].kernel == (6, 6, 1)
        assert steps[0].padding == (2, 2, 0)

    @pytest.mark.parametrize(
        "latent,target,policy",
        [
            ((4, 4, 4), (96, 128, 16), "early-stop"),
            ((4, 4, 4), (128, 128, 16), "uniform"),
            ((4, 4, 4), (2, 4, 4), "early-stop"),
            ((3, 4, 4), (8, 8, 8), "early-stop"),
            ((4, 4), (8, 8), "early-stop"),
            ((4, 4, 4), (8, 8, 8), "spiral"),
        ],
        ids=["non-power-of-two", "uneven-uniform", "shrinking", "not-a-multiple", "two-axes", "policy"],
    )
    def test_invalid_schedules(self, latent, target, policy):
        """Test configurations without a valid schedule."""
        with pytest.raises(ConfigurationError):
            stride_schedule(latent, target, policy)


class TestPresets:
    """Test the named rungs of the ladder."""

    def test_all_names_present(self):
        """Test the ladder includes every documented rung."""
        expected = {f"arch{i}" for i in range(9)} | {f"wgan{i}" for i in range(6)}
        expected |= {"arch3b", "arch3g", "arch4d", "arch4m", "custom"}

        assert set(preset_names()) == expected
        assert preset_names() == sorted(PRESETS)

    def test_baseline_is_dcgan(self):
        """Test arch0 keeps every switch off and ends in a sigmoid."""
        config = resolve_preset("arch0")

        assert not config.residual_blocks and not config.spectral_norm and not config.r1
        assert config.sigmoid_output
        assert config.betas == (0.5, 0.999)

    def test_rungs_are_cumulative(self):
        """Test each rung keeps the switches of the previous one."""
        arch4, arch5, arch7 = (resolve_preset(n) for n in ("arch4", "arch5", "arch7"))

        assert arch4.r1 and arch4.spectral_norm and arch4.residual_blocks and arch4.leaky_g
        assert arch5.d_steps_per_g == 2 and arch5.lr_g == pytest.approx(5e-5) and arch5.r1
        assert arch7.orthogonal_init and arch7.double_blocks
        assert resolve_preset("arch8").latent_skip

    def test_spectral_variants(self):
        """Test the branch rungs that move spectral normalization around."""
        assert not resolve_preset("arch3b").spectral_in_generator
        g_only = resolve_preset("arch3g")
        assert g_only.spectral_in_generator and not g_only.spectral_in_discriminator
        assert resolve_preset("arch4d").r1 and not resolve_preset("arch4d").spectral_norm

    def test_wgan_rungs(self):
        """Test the critic ladder uses the gradient penalty loss."""
        for name in ("wgan0", "wgan3", "wgan5"):
            config = resolve_preset(name)
            assert config.loss_mode == "wgan_gp"
            assert not config.sigmoid_output

    def test_overrides_replace_values(self):
        """Test keyword overrides win over the preset."""
        config = resolve_preset("arch4", base_channels=8, r1=False)

        assert config.base_channels == 8
        assert not config.r1

    def test_unknown_preset(self):
        """Test unknown names list the known ones."""
        with pytest.raises(ConfigurationError, match="arch0"):
            resolve_preset("arch99")

    def test_train_config_follows_architecture(self):
        """Test rates, betas and regularization flow into the training knobs."""
        train = TrainConfig.from_architecture(resolve_preset("arch5"), batch_size=4)

        assert train.d_steps_per_g == 2
        assert (train.beta1, train.beta2) == (0.0, 0.99)
        assert train.r1_enabled
        assert train.logits_loss
        assert train.batch_size == 4
