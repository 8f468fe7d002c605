"""Adversarial training: update steps, penalties, and the run loop."""

import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Union

import numpy as np

from exceptions import NonFiniteGradientError, NumericalAbortError
from geovalid.superposition import superposition_fractions
from geovalid.swd import swd_score
from gradcore import functional as F
from gradcore.losses import bce_with_logits, binary_cross_entropy
from gradcore.optim import Adam
from gradcore.tensor import Tensor, backward, get_default_dtype, grad, no_grad
from models.base import Module
from models.discriminator import build_discriminator
from models.generator import build_generator
from repositories.checkpoint_repository import Checkpoint
from repositories.run_repository import RunRepository
from schemas.config import ResolvedRunConfig, TrainConfig
from schemas.metrics import MetricsRecord
from schemas.volume import TIME
from services.dataset_service import DatasetService, SampleSource, stack_samples
from utils.logger import get_logger

logger = get_logger(__name__)

GP_EPSILON = 1e-12
VALIDATION_LATENT_STREAM = 7


def _tensor(values: np.ndarray, requires_grad: bool = False) -> Tensor:
    return Tensor(np.asarray(values, dtype=get_default_dtype()), requires_grad=requires_grad)


def adversarial_loss(scores: Tensor, target: float, config: TrainConfig) -> Tensor:
    """Cross-entropy of discriminator outputs against a constant label."""
    if config.logits_loss:
        return bce_with_logits(scores, target)
    return binary_cross_entropy(scores, target)


def _check_finite(value: float, name: str) -> None:
    if not math.isfinite(value):
        raise NumericalAbortError(f"non-finite {name}", {name: value})


def r1_penalty(discriminator: Module, real_batch: Union[np.ndarray, Tensor], weight: float = 10.0) -> Tensor:
    """(weight / 2) * mean over items of the squared input-gradient norm at real samples.

    Running statistics are left untouched; the result is differentiable with
    respect to the discriminator parameters.

    Raises:
        DoubleBackwardError: A layer on the path cannot be differentiated twice
    """
    data = real_batch.data if isinstance(real_batch, Tensor) else real_batch
    x = _tensor(data, requires_grad=True)
    with discriminator.frozen_stats():
        scores = discriminator(x)
    (gradient,) = grad(F.sum(scores), [x], create_graph=True)
    axes = tuple(range(1, gradient.ndim))
    squared = F.sum(F.mul(gradient, gradient), axis=axes)
    return F.mul(F.mean(squared), weight / 2.0)


def gradient_penalty(
    discriminator: Module,
    real_batch: Union[np.ndarray, Tensor],
    fake_batch: Union[np.ndarray, Tensor],
    rng: Optional[np.random.Generator] = None,
    epsilon: Optional[np.ndarray] = None,
) -> Tensor:
    """Mean of (||grad D(x_hat)|| - 1)^2 at random interpolates of real and fake items.

    Args:
        discriminator: Critic
        real_batch: Real items [N, C, X, Y, Z]
        fake_batch: Generated items of the same shape
        rng: Draws one mixing weight per item when ``epsilon`` is omitted
        epsilon: Explicit mixing weights of shape [N]

    Returns:
        Scalar penalty (without the gp weight)
    """
    real = real_batch.data if isinstance(real_batch, Tensor) else np.asarray(real_batch)
    fake = fake_batch.data if isinstance(fake_batch, Tensor) else np.asarray(fake_batch)
    if epsilon is None:
        epsilon = (rng or np.random.default_rng()).uniform(size=real.shape[0])
    weights = np.asarray(epsilon).reshape((-1,) + (1,) * (real.ndim - 1))
    x_hat = _tensor(weights * real + (1.0 - weights) * fake, requires_grad=True)
    with discriminator.frozen_stats():
        scores = discriminator(x_hat)
    (gradient,) = grad(F.sum(scores), [x_hat], create_graph=True)
    norms = F.norm(gradient, axis=tuple(range(1, gradient.ndim)), eps=GP_EPSILON)
    deviation = F.sub(norms, 1.0)
    return F.mean(F.mul(deviation, deviation))


def d_step(
    generator: Module,
    discriminator: Module,
    real_batch: np.ndarray,
    latents: np.ndarray,
    config: TrainConfig,
    optimizer: Adam,
    step_index: int = 1,
    rng: Optional[np.random.Generator] = None,
) -> float:
    """One discriminator update with the generator frozen.

    The returned loss is the full objective of this step, evaluated before the
    update; the lazy R1 term is included on steps whose index is a multiple
    of ``r1_interval``, scaled by that interval.

    Raises:
        NumericalAbortError: Non-finite loss
        NonFiniteGradientError: Non-finite gradient
    """
    generator.requires_grad_(False)
    discriminator.requires_grad_(True)
    try:
        with no_grad(), generator.frozen_stats():
            fake = generator(_tensor(latents))
        real = _tensor(real_batch)
        real_scores = discriminator(real)
        fake_scores = discriminator(_tensor(fake.data))

        if config.loss_mode == "wgan_gp":
            loss = F.sub(F.mean(fake_scores), F.mean(real_scores))
            if config.gp_weight > 0:
                penalty = gradient_penalty(discriminator, real_batch, fake.data, rng=rng)
                loss = F.add(loss, F.mul(penalty, config.gp_weight))
        else:
            loss = F.add(
                adversarial_loss(real_scores, 1.0, config),
                adversarial_loss(fake_scores, 0.0, config),
            )

        if config.r1_enabled and config.r1_weight > 0 and step_index % config.r1_interval == 0:
            penalty = r1_penalty(discriminator, real_batch, config.r1_weight)
            loss = F.add(loss, F.mul(penalty, float(config.r1_interval)))

        value = loss.item()
        _check_finite(value, "d_loss")
        optimizer.zero_grad()
        backward(loss)
        optimizer.step()
    finally:
        generator.requires_grad_(True)
    return value


def g_step(
    generator: Module,
    discriminator: Module,
    latents: np.ndarray,
    config: TrainConfig,
    optimizer: Adam,
) -> float:
    """One generator update with the discriminator frozen.

    Raises:
        NumericalAbortError: Non-finite loss
        NonFiniteGradientError: Non-finite gradient
    """
    discriminator.requires_grad_(False)
    generator.requires_grad_(True)
    try:
        fake = generator(_tensor(latents))
        with discriminator.frozen_stats():
            scores = discriminator(fake)
        if config.loss_mode == "wgan_gp":
            loss = F.neg(F.mean(scores))
        else:
            loss = adversarial_loss(scores, 1.0, config)
        value = loss.item()
        _check_finite(value, "g_loss")
        optimizer.zero_grad()
        backward(loss)
        optimizer.step()
    finally:
        discriminator.requires_grad_(True)
    return value


def evaluate_losses(
    generator: Module,
    discriminator: Module,
    real_batch: np.ndarray,
    latents: np.ndarray,
    config: TrainConfig,
) -> tuple[float, float]:
    """Adversarial (g_loss, d_loss) without any update or penalty."""
    with no_grad(), generator.frozen_stats(), discriminator.frozen_stats():
        fake = generator(_tensor(latents))
        real_scores = discriminator(_tensor(real_batch))
        fake_scores = discriminator(fake)
        if config.loss_mode == "wgan_gp":
            d_loss = F.sub(F.mean(fake_scores), F.mean(real_scores)).item()
            g_loss = -F.mean(fake_scores).item()
        else:
            d_loss = (
                adversarial_loss(real_scores, 1.0, config).item()
                + adversarial_loss(fake_scores, 0.0, config).item()
            )
            g_loss = adversarial_loss(fake_scores, 1.0, config).item()
    return g_loss, d_loss


def generate_batch(generator: Module, latents: np.ndarray, batch_size: int = 16) -> np.ndarray:
    """Eval-mode generation in chunks; the generator's mode is restored afterwards."""
    was_training = generator.training
    generator.eval()
    try:
        outputs = []
        with no_grad():
            for start in range(0, len(latents), batch_size):
                outputs.append(generator(_tensor(latents[start : start + batch_size])).data)
    finally:
        generator.train(was_training)
    return np.concatenate(outputs) if outputs else np.zeros((0,))


def parameter_norm(module: Module) -> float:
    return float(math.sqrt(sum(float(np.sum(p.data.astype(np.float64) ** 2)) for p in module.parameters())))


@dataclass
class TrainingState:
    """Everything the loop mutates; checkpoints serialize exactly this."""

    generator: Module
    discriminator: Module
    optimizer_g: Adam
    optimizer_d: Adam
    rng: np.random.Generator
    iteration: int = 0
    d_steps: int = 0
    elapsed_s: float = 0.0

    def to_checkpoint(self, config: Optional[ResolvedRunConfig] = None) -> Checkpoint:
        arrays = {**self.generator.state_dict("G"), **self.discriminator.state_dict("D")}
        metadata: dict[str, Any] = {
            "d_steps": self.d_steps,
            "elapsed_s": self.elapsed_s,
            "iteration": self.iteration,
            "rng_state": self.rng.bit_generator.state,
        }
        if config is not None:
            metadata["config"] = config.model_dump(mode="json")
        return Checkpoint(arrays=arrays, metadata=metadata)

    def restore(self, checkpoint: Checkpoint) -> None:
        self.generator.load_state_dict(checkpoint.arrays, "G")
        self.discriminator.load_state_dict(checkpoint.arrays, "D")
        meta = checkpoint.metadata
        self.iteration = int(meta["iteration"])
        self.d_steps = int(meta["d_steps"])
        self.elapsed_s = float(meta.get("elapsed_s", 0.0))
        self.rng.bit_generator.state = meta["rng_state"]


@dataclass
class TrainResult:
    run_dir: Path
    iterations: int
    records: list[MetricsRecord] = field(default_factory=list)


def _snapshot(state: TrainingState, g_loss: float, d_loss: float) -> dict[str, Any]:
    return {
        "iteration": state.iteration,
        "d_steps": state.d_steps,
        "g_loss": g_loss,
        "d_loss": d_loss,
        "parameter_norm_g": parameter_norm(state.generator),
        "parameter_norm_d": parameter_norm(state.discriminator),
    }


def train(
    state: TrainingState,
    data_source: SampleSource,
    val_batch: np.ndarray,
    config: TrainConfig,
    run: RunRepository,
    channels: tuple[str, ...] = (),
    resolved: Optional[ResolvedRunConfig] = None,
) -> TrainResult:
    """Run the training loop until ``config.total_g_iterations``.

    Each generator iteration runs ``d_steps_per_g`` discriminator steps then
    one generator step. A metrics row is written at iteration 0 (when any
    iteration is planned), every ``validation_interval`` iterations and at the
    final one; checkpoints at iteration 0, every ``checkpoint_interval`` and
    at the end. Validation never draws from the training RNG, so a resumed
    run continues the same stream.

    Args:
        state: Networks, optimizers and RNG; resumes from ``state.iteration``
        data_source: Training batches
        val_batch: Fixed validation samples [M, C, X, Y, Z]
        config: Training configuration
        run: Run directory
        channels: Channel names of the samples (enables f_s with a time channel)
        resolved: Full configuration stored in checkpoints

    Returns:
        TrainResult with the records written by this call

    Raises:
        NumericalAbortError: Non-finite loss or gradient; already written
            metrics and checkpoints stay valid
    """
    generator, discriminator = state.generator, state.discriminator
    total = config.total_g_iterations
    time_channel = channels.index(TIME) if TIME in channels else None
    val_latents = np.random.default_rng([config.seed, VALIDATION_LATENT_STREAM]).standard_normal(
        generator.latent_shape(config.validation_batch)  # type: ignore[attr-defined]
    )
    latent_shape = generator.latent_shape(config.batch_size)  # type: ignore[attr-defined]
    records: list[MetricsRecord] = []
    started = time.perf_counter() - state.elapsed_s

    def record(g_loss: float, d_loss: float) -> None:
        generated = generate_batch(generator, val_latents)
        d_w = swd_score(generated, val_batch, config.swd).score
        f_s = None
        if time_channel is not None:
            f_s = float(np.mean(superposition_fractions(generated, time_channel)))
        entry = MetricsRecord(state.iteration, g_loss, d_loss, d_w, f_s, time.perf_counter() - started)
        run.append_metrics(entry)
        records.append(entry)
        logger.info(
            "metrics_recorded",
            iteration=entry.iteration,
            g_loss=g_loss,
            d_loss=d_loss,
            d_w=d_w,
            f_s=f_s,
        )

    def checkpoint() -> None:
        state.elapsed_s = time.perf_counter() - started
        run.save_checkpoint(state.to_checkpoint(resolved))

    if state.iteration == 0:
        run.init_metrics()
        if total > 0:
            real = data_source.batch(config.batch_size, state.rng)
            g_loss, d_loss = evaluate_losses(
                generator, discriminator, real, state.rng.standard_normal(latent_shape), config
            )
            record(g_loss, d_loss)
        checkpoint()

    logger.info("training_started", start=state.iteration, total=total, d_steps_per_g=config.d_steps_per_g)
    g_loss = d_loss = float("nan")
    while state.iteration < total:
        try:
            for _ in range(config.d_steps_per_g):
                state.d_steps += 1
                real = data_source.batch(config.batch_size, state.rng)
                latents = state.rng.standard_normal(latent_shape)
                d_loss = d_step(
                    generator,
                    discriminator,
                    real,
                    latents,
                    config,
                    state.optimizer_d,
                    step_index=state.d_steps,
                    rng=state.rng,
                )
            g_loss = g_step(
                generator, discriminator, state.rng.standard_normal(latent_shape), config, state.optimizer_g
            )
        except (NumericalAbortError, NonFiniteGradientError) as e:
            snapshot = _snapshot(state, g_loss, d_loss)
            snapshot["reason"] = str(e)
            run.write_json("abort.json", snapshot)
            logger.error("numerical_abort", **snapshot)
            message = f"training aborted at iteration {state.iteration + 1}: {e}"
            raise NumericalAbortError(message, snapshot) from e

        state.iteration += 1
        if state.iteration % config.validation_interval == 0 or state.iteration == total:
            record(g_loss, d_loss)
        if state.iteration % config.checkpoint_interval == 0 or state.iteration == total:
            checkpoint()

    logger.info("training_completed", iterations=state.iteration, run_dir=str(run.root))
    return TrainResult(run.root, state.iteration, records)


class TrainingService:
    """Builds networks, data and run directory from a resolved configuration."""

    def __init__(self, config: ResolvedRunConfig, run_dir: Union[str, Path]) -> None:
        """Initialize training service.

        Args:
            config: Resolved run configuration
            run_dir: Output directory of the run
        """
        self.config = config
        self.run = RunRepository(run_dir)
        self.dataset = DatasetService(config.data)

    def build_state(self) -> TrainingState:
        arch, train_config = self.config.architecture, self.config.train
        seed = train_config.seed
        generator = build_generator(arch, rng=np.random.default_rng([seed, 1]))
        discriminator = build_discriminator(arch, rng=np.random.default_rng([seed, 2]))
        betas = (train_config.beta1, train_config.beta2)
        return TrainingState(
            generator=generator,
            discriminator=discriminator,
            optimizer_g=Adam(generator.parameters(), train_config.lr_g, betas),
            optimizer_d=Adam(discriminator.parameters(), train_config.lr_d, betas),
            rng=np.random.default_rng(seed),
        )

    def validation_batch(self, val_ids: list[int]) -> np.ndarray:
        samples = self.dataset.reference_samples(val_ids, seed=self.config.split.seed)
        return stack_samples(samples[: self.config.train.validation_batch])

    def train(self, resume: bool = False) -> TrainResult:
        """Train (or resume) the configured run.

        Args:
            resume: Continue from the latest checkpoint of the run directory

        Returns:
            TrainResult of this call
        """
        self.run.ensure_root()
        state = self.build_state()
        if resume and self.run.checkpoint_iterations():
            last = self.run.checkpoint_iterations()[-1]
            state.restore(self.run.load_checkpoint(last))
            self.run.truncate_metrics(last)
            logger.info("training_resumed", iteration=last)
        else:
            self.run.write_config(self.config)

        plan = self.dataset.split(self.config.split)
        source = SampleSource(self.dataset, plan.train_ids)
        val_batch = self.validation_batch(plan.val_ids)
        logger.info(
            "run_prepared",
            run_dir=str(self.run.root),
            preset=self.config.preset,
            parameters_g=state.generator.parameter_count(),
            parameters_d=state.discriminator.parameter_count(),
        )
        return train(
            state,
            source,
            val_batch,
            self.config.train,
            self.run,
            channels=tuple(self.config.data.channels),
            resolved=self.config,
        )
