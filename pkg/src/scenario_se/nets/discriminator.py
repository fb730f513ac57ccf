"""Metric discriminator regressing MOS-scale scores of a band."""

from __future__ import annotations

__all__: list[str] = [
    "MetricDiscriminator",
]

import torch
from torch import nn

from scenario_se.errors import InvalidInputError
from scenario_se.mos_oracle import MOS_MAX, MOS_MIN
from scenario_se.nets.blocks import ConvBlock, PredictBlock, compress


class MetricDiscriminator(nn.Module):
    """Score a magnitude band of any width on the ``[1, 5]`` MOS scale."""

    def __init__(self, channels: tuple[int, int] = (8, 16)) -> None:
        """Create the discriminator."""
        super().__init__()
        first, second = channels
        self.blocks = nn.Sequential(ConvBlock(1, first), ConvBlock(first, second))
        self.predict = PredictBlock(second)

    def forward(self, band_mag: torch.Tensor) -> torch.Tensor:
        """Return ``[B]`` scores for ``[B, T, F]`` bands (or a scalar for 2-D).

        Raises:
            InvalidInputError: If the band has no bins or no frames.
        """
        if band_mag.shape[-1] == 0 or band_mag.shape[-2] == 0:
            msg = f"cannot score an empty band of shape {tuple(band_mag.shape)}"
            raise InvalidInputError(msg)
        single = band_mag.dim() == 2  # noqa: PLR2004
        x = compress(band_mag).unsqueeze(-3)
        if single:
            x = x.unsqueeze(0)
        logit = self.predict(self.blocks(x))
        score = MOS_MIN + (MOS_MAX - MOS_MIN) * torch.sigmoid(logit)
        return score[0] if single else score
