"""Building blocks shared by the splitter and the discriminators."""

from __future__ import annotations

__all__: list[str] = [
    "LEAKY_SLOPE",
    "ChannelNorm",
    "ConvBlock",
    "PredictBlock",
    "compress",
]

import torch
from torch import nn

LEAKY_SLOPE = 0.2


def compress(mag: torch.Tensor) -> torch.Tensor:
    """Log-compress magnitudes into network input features."""
    return torch.log1p(mag)


class ChannelNorm(nn.Module):
    """Layer normalization over the channel axis of ``[B, C, T, F]`` maps."""

    def __init__(self, channels: int) -> None:
        """Create the affine normalization for `channels` channels."""
        super().__init__()
        self.norm = nn.LayerNorm(channels)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        """Normalize every time-frequency position independently."""
        return self.norm(x.permute(0, 2, 3, 1)).permute(0, 3, 1, 2)


class ConvBlock(nn.Module):
    """3x3 convolution, channel normalization and leaky rectifier.

    With padding 1 the output keeps the frame count and has
    ``(bins - 1) // freq_stride + 1`` bins.
    """

    def __init__(
        self,
        in_channels: int,
        out_channels: int,
        freq_stride: int = 2,
    ) -> None:
        """Create the block."""
        super().__init__()
        self.conv = nn.Conv2d(
            in_channels,
            out_channels,
            kernel_size=3,
            stride=(1, freq_stride),
            padding=1,
        )
        self.norm = ChannelNorm(out_channels)
        self.act = nn.LeakyReLU(LEAKY_SLOPE)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        """Apply the block to ``[B, C, T, F]`` maps."""
        return self.act(self.norm(self.conv(x)))


class PredictBlock(nn.Module):
    """Global average pooling and a two-layer head emitting one logit.

    Pooling over time and frequency makes the output independent of the input
    frame and bin counts.
    """

    def __init__(self, in_channels: int, hidden: int = 16) -> None:
        """Create the head."""
        super().__init__()
        self.hidden = nn.Linear(in_channels, hidden)
        self.act = nn.LeakyReLU(LEAKY_SLOPE)
        self.out = nn.Linear(hidden, 1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        """Map ``[B, C, T, F]`` maps to ``[B]`` logits."""
        pooled = x.mean(dim=(2, 3))
        return self.out(self.act(self.hidden(pooled))).squeeze(-1)
