"""Discriminator pretraining, the weak-supervision schedule and adversarial training."""

from __future__ import annotations

__all__: list[str] = [
    "Checkpoint",
    "TrainConfig",
    "pretrain_discriminators",
    "run_training",
    "supervision_active",
    "train_step",
]

from scenario_se.training.checkpoint import Checkpoint
from scenario_se.training.config import TrainConfig
from scenario_se.training.pretrain import pretrain_discriminators
from scenario_se.training.schedule import supervision_active
from scenario_se.training.trainer import run_training, train_step
