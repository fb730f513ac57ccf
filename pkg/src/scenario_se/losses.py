"""Division-point, band-score, discriminator, generator and total losses.

Scalar ``||a - b||_2`` terms are squared errors. Every function accepts plain
floats (for audits and logs) as well as tensors (for training).
"""

from __future__ import annotations

__all__: list[str] = [
    "GENERATOR_TARGET_SCORE",
    "BakWeightDirection",
    "LossBreakdown",
    "SnrContext",
    "alpha",
    "loss_bak",
    "loss_discriminator",
    "loss_generator",
    "loss_m",
    "loss_ovl",
    "loss_sig",
    "loss_total",
    "squared_error",
]

import math
from dataclasses import asdict, dataclass
from enum import StrEnum
from typing import TYPE_CHECKING

import torch

from scenario_se.errors import InvalidInputError

if TYPE_CHECKING:  # pragma: no cover
    from collections.abc import Iterable

GENERATOR_TARGET_SCORE = 5.0
DEFAULT_LAMBDA_ADV = 0.05

type Scalar = float | torch.Tensor


class BakWeightDirection(StrEnum):
    """Which band loss the SNR weight multiplies.

    ``FORMULA``: ``alpha * Loss_BAK + (1 - alpha) * Loss_SIG``.
    ``PROSE``: ``(1 - alpha) * Loss_BAK + alpha * Loss_SIG``, so BAK dominates
    at low SNR.
    """

    FORMULA = "formula"
    PROSE = "prose"


@dataclass(frozen=True)
class SnrContext:
    """Utterance SNR and the maximum SNR of the training set."""

    snr_db: float
    snr_max_db: float

    def __post_init__(self) -> None:
        """Check the reference SNR."""
        if not self.snr_max_db > 0:
            msg = f"snr_max_db must be positive, got {self.snr_max_db}"
            raise InvalidInputError(msg)

    @property
    def clamped_snr_db(self) -> float:
        """The SNR clamped into ``[0, snr_max_db]``."""
        return min(max(self.snr_db, 0.0), self.snr_max_db)


@dataclass(frozen=True)
class LossBreakdown:
    """Every loss of one training step, batch-averaged."""

    loss_m: float
    loss_bak: float
    loss_sig: float
    loss_ovl: float
    loss_d: float
    loss_g: float
    loss_total: float
    alpha: float
    supervised_m: bool

    def is_finite(self) -> bool:
        """Whether every loss is finite."""
        return all(
            math.isfinite(v)
            for v in (
                self.loss_m,
                self.loss_bak,
                self.loss_sig,
                self.loss_ovl,
                self.loss_d,
                self.loss_g,
                self.loss_total,
            )
        )

    def to_record(self) -> dict[str, float | bool]:
        """Flat record for the training log."""
        return asdict(self)


def squared_error[T: (float, torch.Tensor)](a: T, b: T) -> T:
    """``(a - b) ** 2``."""
    return (a - b) ** 2


def loss_m[T: (float, torch.Tensor)](m_hat: T, m_label: T) -> T:
    """Division-point loss on normalized fractions."""
    return squared_error(m_label, m_hat)


def loss_bak[T: (float, torch.Tensor)](pred: T, target: T) -> T:
    """High-band (background) score regression loss."""
    return squared_error(pred, target)


def loss_sig[T: (float, torch.Tensor)](pred: T, target: T) -> T:
    """Low-band (signal) score regression loss."""
    return squared_error(pred, target)


def loss_ovl[T: (float, torch.Tensor)](pred: T, target: T) -> T:
    """Full-band (overall) score regression loss."""
    return squared_error(pred, target)


def alpha(ctx: SnrContext) -> float:
    """SNR weight ``clamp(snr / snr_max, 0, 1)``."""
    return ctx.clamped_snr_db / ctx.snr_max_db


def loss_discriminator[T: (float, torch.Tensor)](  # noqa: PLR0913
    *,
    loss_m: T,
    loss_bak: T,
    loss_sig: T,
    loss_ovl: T,
    alpha: float,
    include_m: bool,
    direction: BakWeightDirection = BakWeightDirection.FORMULA,
) -> T:
    """SNR-balanced discriminator loss.

    ``[include_m] * loss_m + loss_ovl + a * loss_bak + (1 - a) * loss_sig`` with
    ``a = alpha`` for `BakWeightDirection.FORMULA` and ``a = 1 - alpha`` for
    `BakWeightDirection.PROSE`.
    """
    bak_weight = alpha if direction is BakWeightDirection.FORMULA else 1 - alpha
    total = loss_ovl + bak_weight * loss_bak + (1 - bak_weight) * loss_sig
    return loss_m + total if include_m else total


def loss_generator(
    enhanced_mag: torch.Tensor,
    clean_mag: torch.Tensor,
    predictions: Iterable[torch.Tensor],
    lambda_adv: float = DEFAULT_LAMBDA_ADV,
) -> torch.Tensor:
    """Mean L1 magnitude loss plus the adversarial push to the best score.

    ``mean(|Y_hat - Y|) + lambda_adv * sum((pred - 5) ** 2)``.

    Raises:
        InvalidInputError: If the magnitudes differ in shape.
    """
    if enhanced_mag.shape != clean_mag.shape:
        msg = f"shape mismatch: {tuple(enhanced_mag.shape)} != {tuple(clean_mag.shape)}"
        raise InvalidInputError(msg)
    l1 = torch.mean(torch.abs(enhanced_mag - clean_mag))
    adversarial = sum(
        (
            squared_error(p, torch.full_like(p, GENERATOR_TARGET_SCORE)).mean()
            for p in predictions
        ),
        start=torch.zeros((), dtype=l1.dtype),
    )
    return l1 + lambda_adv * adversarial


def loss_total[T: (float, torch.Tensor)](loss_g: T, loss_d: T, gamma: float) -> T:
    """``loss_g + gamma * loss_d``.

    Raises:
        InvalidInputError: If `gamma` is negative.
    """
    if gamma < 0:
        msg = f"gamma must be non-negative, got {gamma}"
        raise InvalidInputError(msg)
    return loss_g + gamma * loss_d
