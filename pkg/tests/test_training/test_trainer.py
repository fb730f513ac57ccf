"""Tests for `scenario_se.training.trainer`."""

from __future__ import annotations

import copy
import dataclasses
import math
from typing import TYPE_CHECKING

import pytest
import torch

from scenario_se import losses
from scenario_se.data.loading import load_example
from scenario_se.data.manifest import Manifest, Split
from scenario_se.errors import CheckpointError, InvalidInputError, NonFiniteLossError
from scenario_se.nets import DTYPE, build_models
from scenario_se.training.checkpoint import load_checkpoint
from scenario_se.training.config import DiscriminatorMode
from scenario_se.training.log import read_log
from scenario_se.training.trainer import build_optimizers, run_training, train_step

if TYPE_CHECKING:  # pragma: no cover
    from pathlib import Path

    from scenario_se.data.loading import Batch
    from scenario_se.nets import ModelSet
    from scenario_se.training.config import TrainConfig
    from scenario_se.training.trainer import TrainingResult
    from tests.conftest import Golden


def _batch(corpus: Manifest, config: TrainConfig, n: int = 2) -> Batch:
    return [load_example(entry, config.stft_config) for entry in list(corpus)[:n]]


def _snapshot(model: torch.nn.Module) -> dict[str, torch.Tensor]:
    return {name: p.detach().clone() for name, p in model.named_parameters()}


def _changed(model: torch.nn.Module, before: dict[str, torch.Tensor]) -> bool:
    return any(not torch.equal(p, before[name]) for name, p in model.named_parameters())


def _step(
    corpus: Manifest,
    config: TrainConfig,
    epoch: int,
    n: int = 2,
) -> tuple[ModelSet, dict[str, dict[str, torch.Tensor]], losses.LossBreakdown]:
    models = build_models(config.bins, config.seed)
    before = {name: _snapshot(m) for name, m in models.named_models().items()}
    result = train_step(
        _batch(corpus, config, n),
        models,
        config,
        epoch,
        build_optimizers(models, config),
        corpus.snr_max_db,
    )
    return models, before, result.breakdown


def test_gamma_zero_matches_plain_regression(
    tiny_corpus: Manifest,
    tiny_config: TrainConfig,
) -> None:
    """Test that without coupling the generator takes a plain L1 Adam step."""
    config = tiny_config.replace(gamma=0.0, lambda_adv=0.0)
    batch = _batch(tiny_corpus, config)
    models = build_models(config.bins, config.seed)
    baseline = copy.deepcopy(models.generator)
    optimizer = torch.optim.Adam(baseline.parameters(), lr=config.learning_rate)

    optimizers = build_optimizers(models, config)
    train_step(batch, models, config, 1, optimizers, tiny_corpus.snr_max_db)

    optimizer.zero_grad()
    per_utterance = [
        losses.loss_generator(
            baseline(torch.from_numpy(example.noisy_mag).to(DTYPE)),
            torch.from_numpy(example.clean_mag).to(DTYPE),
            [],
            lambda_adv=0.0,
        )
        for example in batch
    ]
    torch.stack(per_utterance).mean().backward()
    optimizer.step()
    for trained, reference in zip(
        models.generator.parameters(),
        baseline.parameters(),
        strict=True,
    ):
        assert torch.max(torch.abs(trained - reference)) < 1e-12


@pytest.mark.parametrize(("epoch", "supervised"), [(10, True), (11, False)])
def test_supervision_boundary(
    tiny_corpus: Manifest,
    tiny_config: TrainConfig,
    epoch: int,
    supervised: bool,  # noqa: FBT001
) -> None:
    """Test that the division-point loss counts up to epoch k inclusive."""
    config = tiny_config.replace(epochs=15, k_supervised=10)
    _, _, b = _step(tiny_corpus, config, epoch, n=1)
    assert b.supervised_m is supervised
    assert b.loss_m >= 0
    balanced = b.loss_ovl + b.alpha * b.loss_bak + (1 - b.alpha) * b.loss_sig
    expected = balanced + b.loss_m if supervised else balanced
    assert b.loss_d == pytest.approx(expected, abs=1e-9)


def test_every_model_is_updated(
    tiny_corpus: Manifest,
    tiny_config: TrainConfig,
) -> None:
    """Test that a supervised step moves all five networks."""
    models, before, breakdown = _step(tiny_corpus, tiny_config, 1)
    assert breakdown.is_finite()
    for name, model in models.named_models().items():
        assert _changed(model, before[name]), name


def test_splitter_learns_without_labels(
    tiny_corpus: Manifest,
    tiny_config: TrainConfig,
) -> None:
    """Test that the splitter is trained through the soft split alone."""
    config = tiny_config.replace(epochs=15, k_supervised=0)
    models, before, breakdown = _step(tiny_corpus, config, 1)
    assert not breakdown.supervised_m
    assert _changed(models.splitter, before["splitter"])


def test_fullband_step(tiny_corpus: Manifest, tiny_config: TrainConfig) -> None:
    """Test that the full-band baseline leaves the band networks untouched."""
    config = tiny_config.replace(discriminator_mode=DiscriminatorMode.FULLBAND)
    models, before, breakdown = _step(tiny_corpus, config, 1)
    assert not breakdown.supervised_m
    assert breakdown.loss_bak == breakdown.loss_sig == breakdown.loss_m == 0
    assert breakdown.loss_d == pytest.approx(breakdown.loss_ovl)
    for name in ("splitter", "d_bak", "d_sig"):
        assert not _changed(models.named_models()[name], before[name])
    assert _changed(models.d_ovl, before["d_ovl"])
    assert _changed(models.generator, before["generator"])


def test_alpha_from_snr(tiny_corpus: Manifest, tiny_config: TrainConfig) -> None:
    """Test the SNR weight of a single utterance."""
    (example,) = _batch(tiny_corpus, tiny_config, 1)
    _, _, breakdown = _step(tiny_corpus, tiny_config, 1, n=1)
    assert example.snr_db is not None
    snr_max = tiny_corpus.snr_max_db
    clamped = min(max(example.snr_db, 0.0), snr_max)
    assert breakdown.alpha == pytest.approx(clamped / snr_max)


def test_fixed_alpha(tiny_corpus: Manifest, tiny_config: TrainConfig) -> None:
    """Test that a fixed weight replaces the SNR weight."""
    _, _, breakdown = _step(tiny_corpus, tiny_config.replace(fixed_alpha=0.5), 1)
    assert breakdown.alpha == 0.5


def test_step_division_points(tiny_corpus: Manifest, tiny_config: TrainConfig) -> None:
    """Test that the step reports a point per utterance."""
    models = build_models(tiny_config.bins, tiny_config.seed)
    batch = _batch(tiny_corpus, tiny_config, 3)
    result = train_step(
        batch,
        models,
        tiny_config,
        1,
        build_optimizers(models, tiny_config),
        tiny_corpus.snr_max_db,
    )
    assert result.utterance_ids == [example.utterance_id for example in batch]
    assert len(result.m_hat_bins) == len(result.m_label_bins) == 3
    assert all(0 < f < 1 for f in result.m_hat_fractions)
    assert all(1 <= b < tiny_config.bins for b in result.m_label_bins)


def test_empty_batch(tiny_config: TrainConfig) -> None:
    """Test rejection of a step without utterances."""
    models = build_models(tiny_config.bins, tiny_config.seed)
    optimizers = build_optimizers(models, tiny_config)
    with pytest.raises(InvalidInputError):
        train_step([], models, tiny_config, 1, optimizers, 20.0)


def test_non_finite_loss(
    tiny_corpus: Manifest,
    tiny_config: TrainConfig,
    monkeypatch: pytest.MonkeyPatch,
) -> None:
    """Test that a NaN loss names the utterance and updates nothing."""
    monkeypatch.setattr(losses, "loss_ovl", lambda pred, _target: pred * math.nan)
    models = build_models(tiny_config.bins, tiny_config.seed)
    before = {name: _snapshot(m) for name, m in models.named_models().items()}
    batch = _batch(tiny_corpus, tiny_config, 1)
    with pytest.raises(NonFiniteLossError) as info:
        train_step(
            batch,
            models,
            tiny_config,
            1,
            build_optimizers(models, tiny_config),
            tiny_corpus.snr_max_db,
        )
    assert info.value.utterance_ids == [batch[0].utterance_id]
    assert math.isnan(info.value.record["loss_ovl"])
    for name, model in models.named_models().items():
        assert not _changed(model, before[name])


def test_one_step_losses_are_recorded(
    tiny_corpus: Manifest,
    tiny_config: TrainConfig,
    golden: Golden,
) -> None:
    """Test one seeded supervised step reproduces its recorded losses."""
    _, _, breakdown = _step(tiny_corpus, tiny_config, epoch=1)
    record = breakdown.to_record()
    expected = golden("one_step_losses", record)
    assert record.pop("supervised_m") is expected.pop("supervised_m") is True
    assert record == pytest.approx(expected, rel=1e-9, abs=1e-12)


def test_non_finite_generator_loss_rolls_back(
    tiny_corpus: Manifest,
    tiny_config: TrainConfig,
    monkeypatch: pytest.MonkeyPatch,
) -> None:
    """Test that a NaN generator loss also undoes the discriminator step."""
    monkeypatch.setattr(
        losses,
        "loss_generator",
        lambda enhanced, *_args: enhanced.sum() * math.nan,
    )
    models = build_models(tiny_config.bins, tiny_config.seed)
    optimizers = build_optimizers(models, tiny_config)
    before = {name: _snapshot(m) for name, m in models.named_models().items()}
    batch = _batch(tiny_corpus, tiny_config, 2)
    with pytest.raises(NonFiniteLossError) as info:
        train_step(batch, models, tiny_config, 1, optimizers, tiny_corpus.snr_max_db)
    assert info.value.utterance_ids == [batch[0].utterance_id]
    assert math.isnan(info.value.record["loss_g"])
    for name, model in models.named_models().items():
        assert not _changed(model, before[name])
    assert optimizers.discriminator.state_dict()["state"] == {}


def test_run_artifacts(tiny_run: TrainingResult) -> None:
    """Test the log records and checkpoints of a complete run."""
    records = read_log(tiny_run.log_path)
    pretrain = [r for r in records if r["kind"] == "pretrain"]
    steps = [r for r in records if r["kind"] == "step"]
    epochs = [r for r in records if r["kind"] == "epoch"]
    assert [r["discriminator"] for r in pretrain] == ["d_bak", "d_sig", "d_ovl"]
    assert [r["supervised_m"] for r in epochs] == [True, False]
    assert [r["step"] for r in steps] == list(range(1, len(steps) + 1))
    assert all(r["supervised_m"] is (r["epoch"] == 1) for r in steps)
    assert tiny_run.checkpoint.epoch == 2
    assert tiny_run.checkpoint.metadata["step"] == len(steps)
    assert tiny_run.checkpoint_path.name == "epoch002.ckpt"
    assert (tiny_run.checkpoint_path.parent / "epoch001.ckpt").is_file()
    assert epochs[1]["temperature"] == pytest.approx(1e-4)


def test_run_is_deterministic(
    tiny_run: TrainingResult,
    tiny_corpus: Manifest,
    tiny_config: TrainConfig,
    tmp_path: Path,
) -> None:
    """Test that a rerun reproduces the log and checkpoint byte for byte."""
    again = run_training(tiny_corpus, tiny_config, tmp_path)
    assert again.log_path.read_bytes() == tiny_run.log_path.read_bytes()
    assert again.checkpoint_path.read_bytes() == tiny_run.checkpoint_path.read_bytes()


def test_resume_matches_uninterrupted(
    tiny_run: TrainingResult,
    tiny_corpus: Manifest,
    tiny_config: TrainConfig,
    tmp_path: Path,
) -> None:
    """Test that resuming after epoch 1 reproduces epoch 2."""
    first = tiny_run.checkpoint_path.parent / "epoch001.ckpt"
    resumed = run_training(tiny_corpus, tiny_config, tmp_path, resume=first)
    assert resumed.checkpoint_path.read_bytes() == tiny_run.checkpoint_path.read_bytes()
    expected = [
        r
        for r in read_log(tiny_run.log_path)
        if r["kind"] != "pretrain" and r["epoch"] == 2
    ]
    assert read_log(resumed.log_path) == expected


def test_resume_truncates_log(
    tiny_run: TrainingResult,
    tiny_corpus: Manifest,
    tiny_config: TrainConfig,
    tmp_path: Path,
) -> None:
    """Test that records after the resumed epoch are replaced, not duplicated."""
    log_path = tmp_path / tiny_run.log_path.name
    log_path.write_bytes(tiny_run.log_path.read_bytes())
    first = tiny_run.checkpoint_path.parent / "epoch001.ckpt"
    run_training(tiny_corpus, tiny_config, tmp_path, resume=first)
    assert log_path.read_bytes() == tiny_run.log_path.read_bytes()


def test_resume_other_config(
    tiny_run: TrainingResult,
    tiny_corpus: Manifest,
    tiny_config: TrainConfig,
    tmp_path: Path,
) -> None:
    """Test that a checkpoint of another configuration is refused."""
    with pytest.raises(CheckpointError):
        run_training(
            tiny_corpus,
            tiny_config.replace(seed=8),
            tmp_path,
            resume=tiny_run.checkpoint_path,
        )


def test_without_pretraining(
    tiny_corpus: Manifest,
    tiny_config: TrainConfig,
    tmp_path: Path,
) -> None:
    """Test that disabled pretraining writes no pretrain records."""
    config = tiny_config.replace(pretrain=False, epochs=1)
    result = run_training(tiny_corpus, config, tmp_path)
    kinds = {r["kind"] for r in read_log(result.log_path)}
    assert kinds == {"step", "epoch"}
    assert load_checkpoint(result.checkpoint_path).epoch == 1


def test_fullband_run(
    tiny_corpus: Manifest,
    tiny_config: TrainConfig,
    tmp_path: Path,
) -> None:
    """Test that the full-band baseline reports the oracle division point."""
    config = tiny_config.replace(
        discriminator_mode=DiscriminatorMode.FULLBAND,
        pretrain=False,
        epochs=1,
    )
    result = run_training(tiny_corpus, config, tmp_path)
    (epoch,) = [r for r in read_log(result.log_path) if r["kind"] == "epoch"]
    assert epoch["m_abs_error_fraction"] == 0
    assert epoch["supervised_m"] is False


def test_empty_training_split(
    tiny_corpus: Manifest,
    tiny_config: TrainConfig,
    tmp_path: Path,
) -> None:
    """Test that a corpus without training utterances is refused."""
    held_out = Manifest(
        entries=tuple(dataclasses.replace(e, split=Split.VAL) for e in tiny_corpus),
        snr_max_db=tiny_corpus.snr_max_db,
    )
    with pytest.raises(InvalidInputError):
        run_training(held_out, tiny_config, tmp_path)


def test_schedule_in_log(
    tiny_corpus: Manifest,
    tiny_config: TrainConfig,
    tmp_path: Path,
) -> None:
    """Test that labels supervise exactly the first ten of twelve epochs."""
    config = tiny_config.replace(epochs=12, k_supervised=10, pretrain=False)
    result = run_training(tiny_corpus, config, tmp_path)
    records = read_log(result.log_path)
    epochs = [r for r in records if r["kind"] == "epoch"]
    assert [r["supervised_m"] for r in epochs] == [e <= 10 for e in range(1, 13)]
    assert all(r["supervised_m"] is (r["epoch"] <= 10) for r in records)
