"""Discriminator pretraining on oracle-split MOS-proxy targets."""

from __future__ import annotations

__all__: list[str] = [
    "PretrainSample",
    "build_pretrain_samples",
    "pretrain_discriminators",
]

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
import torch
from loguru import logger
from tqdm import tqdm

from scenario_se.band_split import dfkd_division_point, hard_split
from scenario_se.data.manifest import Split
from scenario_se.errors import InvalidInputError
from scenario_se.mos_oracle import score_utterance
from scenario_se.nets import DTYPE, build_models
from scenario_se.signal_core import Waveform, magnitude, mix_at_snr, stft
from scenario_se.training.checkpoint import Checkpoint
from scenario_se.training.config import DiscriminatorMode, config_hash, dump_config
from scenario_se.wav import read_wav

if TYPE_CHECKING:  # pragma: no cover
    from collections.abc import Sequence

    from torch import nn

    from scenario_se.band_split import DivisionPoint
    from scenario_se.data.manifest import Manifest, ManifestEntry
    from scenario_se.mos_oracle import MosScores
    from scenario_se.nets import ModelSet
    from scenario_se.signal_core import FloatArray
    from scenario_se.training.config import TrainConfig
    from scenario_se.training.log import TrainingLog


@dataclass(frozen=True)
class PretrainSample:
    """A degraded variant, its oracle split and its proxy targets."""

    utterance_id: str
    degraded_mag: FloatArray
    point: DivisionPoint
    targets: MosScores[float]


def _variants(
    clean: Waveform,
    noisy: Waveform,
    levels_db: Sequence[float],
) -> list[Waveform]:
    noise = Waveform(noisy.samples - clean.samples, clean.sample_rate)
    variants: list[Waveform] = []
    for level in levels_db:
        if math.isinf(level) or noise.energy == 0:
            variants.append(clean)
        else:
            variants.append(mix_at_snr(clean, noise, level))
    return variants


def build_pretrain_samples(
    entries: Sequence[ManifestEntry],
    config: TrainConfig,
) -> list[PretrainSample]:
    """Degrade every clean utterance with its own noise at each configured level.

    A level of ``inf`` (or an entry without noise) yields the clean utterance.
    """
    cfg = config.stft_config
    samples: list[PretrainSample] = []
    for entry in tqdm(entries, desc="pretrain targets", unit="utt"):
        clean = read_wav(entry.clean_path)
        noisy = read_wav(entry.noisy_path)
        clean_mag = magnitude(stft(clean, cfg))
        point = dfkd_division_point(
            clean_mag,
            config.search_lo_hz,
            config.search_hi_hz,
            sample_rate=clean.sample_rate,
            smoothing_width=config.smoothing_width,
        )
        for variant in _variants(clean, noisy, config.pretrain_snr_levels_db):
            degraded_mag = magnitude(stft(variant, cfg))
            samples.append(
                PretrainSample(
                    utterance_id=entry.utterance_id,
                    degraded_mag=degraded_mag,
                    point=point,
                    targets=score_utterance(clean_mag, degraded_mag, point),
                ),
            )
    return samples


def _holdout(
    samples: Sequence[PretrainSample],
    fraction: float,
    seed: int,
) -> tuple[list[PretrainSample], list[PretrainSample]]:
    """Split by utterance so no utterance is in both parts."""
    ids = sorted({s.utterance_id for s in samples})
    if len(ids) < 2:  # noqa: PLR2004
        return list(samples), list(samples)
    order = np.random.default_rng(seed).permutation(len(ids))
    n_val = min(max(1, round(fraction * len(ids))), len(ids) - 1)
    held_out = {ids[int(i)] for i in order[:n_val]}
    train = [s for s in samples if s.utterance_id not in held_out]
    val = [s for s in samples if s.utterance_id in held_out]
    return train, val


def _inputs(sample: PretrainSample, role: str) -> tuple[torch.Tensor, float]:
    mag = torch.from_numpy(sample.degraded_mag).to(DTYPE)
    if role == "d_ovl":
        return mag, sample.targets.ovl
    bands = hard_split(mag, sample.point)
    if role == "d_bak":
        return bands.high, sample.targets.bak
    return bands.low, sample.targets.sig


def _mse(model: nn.Module, samples: Sequence[PretrainSample], role: str) -> float:
    with torch.no_grad():
        errors = []
        for sample in samples:
            band, target = _inputs(sample, role)
            errors.append(float((model(band) - target) ** 2))
    return float(np.mean(errors))


def _fit(  # noqa: PLR0913
    model: nn.Module,
    role: str,
    train: Sequence[PretrainSample],
    val: Sequence[PretrainSample],
    config: TrainConfig,
    log: TrainingLog | None,
) -> float:
    optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
    rng = np.random.default_rng(config.seed)
    val_mse = _mse(model, val, role)
    for epoch in range(1, config.pretrain_epochs + 1):
        order = rng.permutation(len(train))
        losses: list[float] = []
        for start in range(0, len(order), config.batch_size):
            batch = [train[int(i)] for i in order[start : start + config.batch_size]]
            optimizer.zero_grad()
            loss = torch.zeros((), dtype=DTYPE)
            for sample in batch:
                band, target = _inputs(sample, role)
                loss = loss + (model(band) - target) ** 2
            loss = loss / len(batch)
            loss.backward()
            optimizer.step()
            losses.append(float(loss.detach()))
        val_mse = _mse(model, val, role)
        train_mse = float(np.mean(losses))
        logger.debug(
            "{} epoch {}: train {:.4f} val {:.4f}",
            role,
            epoch,
            train_mse,
            val_mse,
        )
        if log is not None:
            log.write(
                "pretrain",
                discriminator=role,
                epoch=epoch,
                train_mse=train_mse,
                val_mse=val_mse,
            )
    return val_mse


def pretrain_discriminators(
    manifest: Manifest,
    config: TrainConfig,
    *,
    models: ModelSet | None = None,
    log: TrainingLog | None = None,
) -> Checkpoint:
    """Regress the discriminators on proxy targets of degraded clean speech.

    D_BAK learns the BAK proxy of the high band, D_SIG the SIG proxy of the
    low band and D_OVL the OVL proxy of the full band, each band taken at the
    clean utterance's oracle division point. In full-band mode only D_OVL is
    trained. The final validation MSE of each discriminator is stored in the
    checkpoint metadata under ``pretrain_val_mse``.

    Args:
        manifest: Corpus with clean references; its training split is used
            (or every entry when the split is empty).
        config: Training configuration.
        models: Models to train in place; built from `config` when omitted.
        log: Receives one ``pretrain`` record per discriminator and epoch.

    Returns:
        A checkpoint at epoch 0.

    Raises:
        InvalidInputError: If the corpus is empty.
    """
    entries = manifest.select(Split.TRAIN) or list(manifest)
    if not entries:
        msg = "cannot pretrain on an empty corpus"
        raise InvalidInputError(msg)
    if models is None:
        models = build_models(config.bins, config.seed, config.generator)

    samples = build_pretrain_samples(entries, config)
    train, val = _holdout(samples, config.validation_fraction, config.seed)
    logger.info(
        "Pretraining discriminators on {} variants ({} held out)",
        len(train),
        len(val),
    )
    roles = {"d_ovl": models.d_ovl}
    if config.discriminator_mode is DiscriminatorMode.SAD:
        roles = {"d_bak": models.d_bak, "d_sig": models.d_sig, "d_ovl": models.d_ovl}
    val_mse = {
        role: _fit(model, role, train, val, config, log)
        for role, model in roles.items()
    }
    for role, mse in val_mse.items():
        logger.info("Pretrained {}: validation MSE {:.4f}", role, mse)
    return Checkpoint.capture(
        models,
        epoch=0,
        config_hash=config_hash(config),
        metadata={
            "config": dump_config(config),
            "phase": "pretrain",
            "pretrain_val_mse": val_mse,
        },
    )
