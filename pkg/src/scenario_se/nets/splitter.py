"""Scenario-aware frequency splitter."""

from __future__ import annotations

__all__: list[str] = [
    "FrequencySplitter",
]

import torch
from torch import nn

from scenario_se.errors import InvalidInputError
from scenario_se.nets.blocks import ConvBlock, PredictBlock, compress


class FrequencySplitter(nn.Module):
    """Predict the division point, as a fraction of all bins, from X and Y-hat.

    The noisy and enhanced magnitudes are stacked as two channels, passed
    through three frequency-strided ConvBlocks and a PredictBlock, and
    squashed into ``(0, 1)``.
    """

    def __init__(self, channels: tuple[int, int, int] = (4, 8, 16)) -> None:
        """Create the splitter."""
        super().__init__()
        first, second, third = channels
        self.blocks = nn.Sequential(
            ConvBlock(2, first),
            ConvBlock(first, second),
            ConvBlock(second, third),
        )
        self.predict = PredictBlock(third)

    def forward(
        self,
        noisy_mag: torch.Tensor,
        enhanced_mag: torch.Tensor,
    ) -> torch.Tensor:
        """Return ``[B]`` fractions for ``[B, T, F]`` inputs (or a scalar for 2-D).

        Raises:
            InvalidInputError: If the two inputs differ in shape.
        """
        if noisy_mag.shape != enhanced_mag.shape:
            msg = (
                f"shape mismatch: {tuple(noisy_mag.shape)} "
                f"!= {tuple(enhanced_mag.shape)}"
            )
            raise InvalidInputError(msg)
        single = noisy_mag.dim() == 2  # noqa: PLR2004
        x = torch.stack([compress(noisy_mag), compress(enhanced_mag)], dim=-3)
        if single:
            x = x.unsqueeze(0)
        fraction = torch.sigmoid(self.predict(self.blocks(x)))
        return fraction[0] if single else fraction
