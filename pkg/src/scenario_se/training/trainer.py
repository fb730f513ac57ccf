"""Adversarial training with the scenario-aware discriminator.

Each step first updates the discriminator side (D_BAK, D_SIG, D_OVL and the
frequency splitter) on ``Loss_D`` with the generator fixed, then the
generator on ``Loss_G + gamma * Loss_D`` with the discriminator side fixed.
Losses are computed per utterance and averaged over the batch.
"""

from __future__ import annotations

__all__: list[str] = [
    "Optimizers",
    "StepResult",
    "TrainingResult",
    "build_optimizers",
    "run_training",
    "train_step",
]

import copy
from dataclasses import dataclass
from statistics import fmean, pstdev
from typing import TYPE_CHECKING, Any

import numpy as np
import torch
from loguru import logger
from tqdm import tqdm

from scenario_se import losses
from scenario_se.band_split import DivisionPoint, dfkd_division_point, soft_bands
from scenario_se.data.loading import batch_iterator
from scenario_se.data.manifest import Split
from scenario_se.errors import (
    CheckpointError,
    ConfigurationError,
    InvalidInputError,
    NonFiniteLossError,
)
from scenario_se.losses import LossBreakdown, SnrContext
from scenario_se.mos_oracle import score_utterance
from scenario_se.nets import DTYPE, backward, build_models
from scenario_se.signal_core import SAMPLE_RATE
from scenario_se.training.checkpoint import (
    Checkpoint,
    load_checkpoint,
    save_checkpoint,
)
from scenario_se.training.config import DiscriminatorMode, config_hash, dump_config
from scenario_se.training.log import TrainingLog
from scenario_se.training.pretrain import pretrain_discriminators
from scenario_se.training.schedule import supervision_active
from scenario_se.utils import bin_to_hz

if TYPE_CHECKING:  # pragma: no cover
    from collections.abc import Sequence
    from pathlib import Path

    from scenario_se.data.loading import Batch, Example
    from scenario_se.data.manifest import Manifest
    from scenario_se.nets import ModelSet
    from scenario_se.training.config import TrainConfig

LOG_NAME = "train_log.jsonl"
CHECKPOINT_DIR = "checkpoints"


@dataclass
class Optimizers:
    """Adam optimizers of the two sides of the game."""

    discriminator: torch.optim.Adam
    generator: torch.optim.Adam

    def named(self) -> dict[str, torch.optim.Optimizer]:
        """Optimizers by checkpoint name."""
        return {"discriminator": self.discriminator, "generator": self.generator}


def build_optimizers(models: ModelSet, config: TrainConfig) -> Optimizers:
    """Adam with default moments at the configured learning rate."""
    return Optimizers(
        discriminator=torch.optim.Adam(
            models.discriminator_side(),
            lr=config.learning_rate,
        ),
        generator=torch.optim.Adam(
            models.generator.parameters(),
            lr=config.learning_rate,
        ),
    )


@dataclass(frozen=True)
class StepResult:
    """The step's loss breakdown and its division points."""

    breakdown: LossBreakdown
    utterance_ids: list[str]
    m_hat_bins: list[int]
    m_label_bins: list[int]
    m_hat_fractions: list[float]
    m_label_fractions: list[float]


@dataclass
class _UtteranceLosses:
    loss_m: torch.Tensor
    loss_bak: torch.Tensor
    loss_sig: torch.Tensor
    loss_ovl: torch.Tensor
    loss_d: torch.Tensor
    predictions: list[torch.Tensor]
    fraction: torch.Tensor | None


def _alpha(example: Example, config: TrainConfig, snr_max_db: float) -> float:
    if config.fixed_alpha is not None:
        return config.fixed_alpha
    snr = snr_max_db if example.snr_db is None else example.snr_db
    return losses.alpha(SnrContext(snr_db=snr, snr_max_db=snr_max_db))


def _label(example: Example, config: TrainConfig) -> DivisionPoint:
    return dfkd_division_point(
        example.clean_mag,
        config.search_lo_hz,
        config.search_hi_hz,
        smoothing_width=config.smoothing_width,
    )


def _discriminator_losses(  # noqa: PLR0913
    models: ModelSet,
    example: Example,
    enhanced: torch.Tensor,
    label: DivisionPoint,
    config: TrainConfig,
    epoch: int,
    alpha: float,
) -> _UtteranceLosses:
    """Loss_D of one utterance; targets are scored on the detached enhancement."""
    enhanced_np = enhanced.detach().numpy()
    zero = torch.zeros((), dtype=DTYPE)
    if config.discriminator_mode is DiscriminatorMode.FULLBAND:
        target = score_utterance(example.clean_mag, enhanced_np, label)
        ovl = models.d_ovl(enhanced)
        loss_ovl = losses.loss_ovl(ovl, torch.tensor(target.ovl, dtype=DTYPE))
        return _UtteranceLosses(zero, zero, zero, loss_ovl, loss_ovl, [ovl], None)

    noisy = torch.from_numpy(example.noisy_mag).to(DTYPE)
    fraction = models.splitter(noisy, enhanced)
    supervised = supervision_active(epoch, config.k_supervised)
    bins = enhanced.shape[-1]
    split_at = label
    if not supervised:
        split_at = DivisionPoint.from_fraction(float(fraction.detach()), bins)
    target = score_utterance(example.clean_mag, enhanced_np, split_at)

    bands = soft_bands(enhanced, fraction, config.temperature(epoch))
    bak = models.d_bak(bands.high)
    sig = models.d_sig(bands.low)
    ovl = models.d_ovl(enhanced)
    loss_m = losses.loss_m(fraction, torch.tensor(label.fraction, dtype=DTYPE))
    loss_bak = losses.loss_bak(bak, torch.tensor(target.bak, dtype=DTYPE))
    loss_sig = losses.loss_sig(sig, torch.tensor(target.sig, dtype=DTYPE))
    loss_ovl = losses.loss_ovl(ovl, torch.tensor(target.ovl, dtype=DTYPE))
    loss_d = losses.loss_discriminator(
        loss_m=loss_m,
        loss_bak=loss_bak,
        loss_sig=loss_sig,
        loss_ovl=loss_ovl,
        alpha=alpha,
        include_m=supervised,
        direction=config.bak_weight_direction,
    )
    return _UtteranceLosses(
        loss_m,
        loss_bak,
        loss_sig,
        loss_ovl,
        loss_d,
        [bak, sig, ovl],
        fraction,
    )


def _require_finite(uid: str, record: dict[str, float]) -> None:
    if not all(np.isfinite(v) for v in record.values()):
        raise NonFiniteLossError([uid], record)


_DISCRIMINATOR_SIDE = ("splitter", "d_bak", "d_sig", "d_ovl")

type _SideState = tuple[dict[str, dict[str, Any]], dict[str, Any]]


def _discriminator_state(models: ModelSet, optimizers: Optimizers) -> _SideState:
    named = models.named_models()
    return copy.deepcopy(
        (
            {name: named[name].state_dict() for name in _DISCRIMINATOR_SIDE},
            optimizers.discriminator.state_dict(),
        ),
    )


def _restore_discriminator_state(
    models: ModelSet,
    optimizers: Optimizers,
    state: _SideState,
) -> None:
    model_states, optimizer_state = state
    named = models.named_models()
    for name in _DISCRIMINATOR_SIDE:
        named[name].load_state_dict(model_states[name])
    optimizers.discriminator.load_state_dict(optimizer_state)


def train_step(  # noqa: PLR0913
    batch: Batch,
    models: ModelSet,
    config: TrainConfig,
    epoch: int,
    optimizers: Optimizers,
    snr_max_db: float,
) -> StepResult:
    """One discriminator-side and one generator-side Adam step.

    Args:
        batch: Utterances of the step.
        models: Models updated in place.
        config: Training configuration.
        epoch: 1-based epoch (selects supervision and temperature).
        optimizers: Optimizers of both sides.
        snr_max_db: Reference SNR of the SNR weight.

    Returns:
        Batch-averaged losses and the division points of every utterance.

    Raises:
        InvalidInputError: If the batch is empty.
        NonFiniteLossError: If any utterance yields a non-finite loss; every
            model and optimizer is left as it was before the step.
    """
    if not batch:
        msg = "empty batch"
        raise InvalidInputError(msg)
    n = len(batch)
    labels = [_label(example, config) for example in batch]
    alphas = [_alpha(example, config, snr_max_db) for example in batch]
    supervised = (
        config.discriminator_mode is DiscriminatorMode.SAD
        and supervision_active(epoch, config.k_supervised)
    )

    # discriminator side, generator fixed
    optimizers.discriminator.zero_grad()
    d_parts: list[_UtteranceLosses] = []
    for example, label, alpha in zip(batch, labels, alphas, strict=True):
        with torch.no_grad():
            enhanced = models.generator(torch.from_numpy(example.noisy_mag).to(DTYPE))
        parts = _discriminator_losses(
            models,
            example,
            enhanced,
            label,
            config,
            epoch,
            alpha,
        )
        _require_finite(
            example.utterance_id,
            {
                "loss_m": float(parts.loss_m.detach()),
                "loss_bak": float(parts.loss_bak.detach()),
                "loss_sig": float(parts.loss_sig.detach()),
                "loss_ovl": float(parts.loss_ovl.detach()),
                "loss_d": float(parts.loss_d.detach()),
            },
        )
        d_parts.append(parts)
    loss_d = torch.stack([p.loss_d for p in d_parts]).mean()
    loss_d.backward()
    rollback = _discriminator_state(models, optimizers)
    optimizers.discriminator.step()

    # generator side, discriminator side fixed
    optimizers.generator.zero_grad()
    totals: list[torch.Tensor] = []
    generator_losses: list[float] = []
    try:
        for example, label, alpha in zip(batch, labels, alphas, strict=True):
            noisy = torch.from_numpy(example.noisy_mag).to(DTYPE)
            clean = torch.from_numpy(example.clean_mag).to(DTYPE)
            enhanced = models.generator(noisy)
            parts = _discriminator_losses(
                models,
                example,
                enhanced,
                label,
                config,
                epoch,
                alpha,
            )
            loss_g = losses.loss_generator(
                enhanced,
                clean,
                parts.predictions,
                config.lambda_adv,
            )
            total = losses.loss_total(loss_g, parts.loss_d, config.gamma)
            _require_finite(
                example.utterance_id,
                {
                    "loss_g": float(loss_g.detach()),
                    "loss_total": float(total.detach()),
                },
            )
            generator_losses.append(float(loss_g.detach()))
            totals.append(total)
    except NonFiniteLossError:
        _restore_discriminator_state(models, optimizers, rollback)
        raise
    loss_total = torch.stack(totals).mean()
    grads = backward(loss_total, models.generator)
    for name, parameter in models.generator.named_parameters():
        parameter.grad = grads[name].detach()
    optimizers.generator.step()

    bins = config.bins
    m_hat = [
        float(p.fraction.detach()) if p.fraction is not None else label.fraction
        for p, label in zip(d_parts, labels, strict=True)
    ]
    breakdown = LossBreakdown(
        loss_m=fmean(float(p.loss_m.detach()) for p in d_parts),
        loss_bak=fmean(float(p.loss_bak.detach()) for p in d_parts),
        loss_sig=fmean(float(p.loss_sig.detach()) for p in d_parts),
        loss_ovl=fmean(float(p.loss_ovl.detach()) for p in d_parts),
        loss_d=float(loss_d.detach()),
        loss_g=sum(generator_losses) / n,
        loss_total=float(loss_total.detach()),
        alpha=sum(alphas) / n,
        supervised_m=supervised,
    )
    return StepResult(
        breakdown=breakdown,
        utterance_ids=[example.utterance_id for example in batch],
        m_hat_bins=[DivisionPoint.from_fraction(f, bins).bin for f in m_hat],
        m_label_bins=[label.bin for label in labels],
        m_hat_fractions=m_hat,
        m_label_fractions=[label.fraction for label in labels],
    )


@dataclass(frozen=True)
class TrainingResult:
    """Where a training run left its artifacts."""

    checkpoint_path: Path
    log_path: Path
    checkpoint: Checkpoint


def _snr_max(manifest: Manifest, config: TrainConfig) -> float:
    snr_max = manifest.snr_max_db if config.snr_max_db is None else config.snr_max_db
    if not snr_max > 0:
        msg = f"maximum training SNR must be positive, got {snr_max} dB; set snr_max_db"
        raise ConfigurationError(msg)
    return snr_max


def _epoch_record(
    epoch: int,
    steps: Sequence[StepResult],
    config: TrainConfig,
) -> dict[str, float | int | bool]:
    m_hat_hz = [
        bin_to_hz(b, config.fft_size, SAMPLE_RATE)
        for step in steps
        for b in step.m_hat_bins
    ]
    errors = [
        abs(h - m)
        for step in steps
        for h, m in zip(step.m_hat_fractions, step.m_label_fractions, strict=True)
    ]
    return {
        "epoch": epoch,
        "supervised_m": steps[0].breakdown.supervised_m,
        "temperature": config.temperature(epoch),
        "m_hat_mean_hz": fmean(m_hat_hz),
        "m_hat_std_hz": pstdev(m_hat_hz),
        "m_abs_error_fraction": fmean(errors),
    }


def run_training(
    manifest: Manifest,
    config: TrainConfig,
    out_dir: Path,
    *,
    pretrained: Checkpoint | None = None,
    resume: Path | None = None,
) -> TrainingResult:
    """Pretrain (unless disabled or supplied), then train for every epoch.

    A checkpoint is written after each epoch to
    ``out_dir/checkpoints/epoch<NNN>.ckpt`` and the log to
    ``out_dir/train_log.jsonl``.

    Args:
        manifest: Validated corpus; its training split is used.
        config: Training configuration.
        out_dir: Output directory.
        pretrained: Pretrained discriminators to start from.
        resume: Checkpoint of an interrupted run with the same configuration.

    Returns:
        The final checkpoint and the artifact paths.

    Raises:
        InvalidInputError: If the training split is empty.
        CheckpointError: If `resume` was written under another configuration.
        NonFiniteLossError: Propagated from `train_step`.
    """
    entries = manifest.select(Split.TRAIN)
    if not entries:
        msg = "training split is empty"
        raise InvalidInputError(msg)
    torch.use_deterministic_algorithms(True)
    snr_max = _snr_max(manifest, config)
    digest = config_hash(config)
    log_path = out_dir / LOG_NAME
    models = build_models(config.bins, config.seed, config.generator)
    optimizers = build_optimizers(models, config)
    rng = np.random.default_rng(config.seed)
    start_epoch = 1
    step = 0
    checkpoint_path = out_dir / CHECKPOINT_DIR / "epoch000.ckpt"
    ckpt = Checkpoint.capture(
        models,
        optimizers.named(),
        epoch=0,
        config_hash=digest,
        rng=rng,
    )

    if resume is not None:
        ckpt = load_checkpoint(resume)
        if ckpt.config_hash != digest:
            msg = f"{resume} was written with config {ckpt.config_hash}, not {digest}"
            raise CheckpointError(msg)
        ckpt.restore_models(models)
        ckpt.restore_optimizers(optimizers.named())
        rng = ckpt.restore_rng()
        start_epoch = ckpt.epoch + 1
        step = int(ckpt.metadata.get("step", 0))
        checkpoint_path = resume
        log = TrainingLog.truncated(
            log_path,
            lambda r: r["kind"] == "pretrain" or r["epoch"] <= ckpt.epoch,
        )
        logger.info("Resuming {} after epoch {}", resume, ckpt.epoch)
    else:
        log_path.unlink(missing_ok=True)
        log = TrainingLog(log_path)
        if pretrained is not None:
            pretrained.restore_models(models)
        elif config.pretrain:
            pretrain_discriminators(manifest, config, models=models, log=log)

    with log:
        for epoch in range(start_epoch, config.epochs + 1):
            temperature = config.temperature(epoch)
            batches = batch_iterator(
                entries,
                config.batch_size,
                rng,
                config.stft_config,
            )
            results: list[StepResult] = []
            for batch in tqdm(batches, desc=f"epoch {epoch}", unit="batch"):
                try:
                    result = train_step(
                        batch,
                        models,
                        config,
                        epoch,
                        optimizers,
                        snr_max,
                    )
                except NonFiniteLossError as e:
                    logger.error("Non-finite loss in epoch {}: {}", epoch, e)
                    raise
                step += 1
                results.append(result)
                logger.debug("step {}: {}", step, result.breakdown)
                log.write(
                    "step",
                    epoch=epoch,
                    step=step,
                    utterance_ids=result.utterance_ids,
                    temperature=temperature,
                    m_hat_bins=result.m_hat_bins,
                    m_hat_hz=[
                        bin_to_hz(b, config.fft_size, SAMPLE_RATE)
                        for b in result.m_hat_bins
                    ],
                    m_label_bins=result.m_label_bins,
                    **result.breakdown.to_record(),
                )
            record = _epoch_record(epoch, results, config)
            log.write("epoch", **record)
            logger.info(
                "Epoch {}/{}: m_hat {:.0f} +/- {:.0f} Hz, |m_hat - m| {:.3f}",
                epoch,
                config.epochs,
                record["m_hat_mean_hz"],
                record["m_hat_std_hz"],
                record["m_abs_error_fraction"],
            )
            ckpt = Checkpoint.capture(
                models,
                optimizers.named(),
                epoch=epoch,
                config_hash=digest,
                rng=rng,
                metadata={
                    "config": dump_config(config),
                    "phase": "train",
                    "snr_max_db": snr_max,
                    "step": step,
                },
            )
            checkpoint_path = out_dir / CHECKPOINT_DIR / f"epoch{epoch:03d}.ckpt"
            save_checkpoint(checkpoint_path, ckpt)
            logger.info("Wrote {}", checkpoint_path)
    return TrainingResult(
        checkpoint_path=checkpoint_path,
        log_path=log_path,
        checkpoint=ckpt,
    )
