"""Mask-based magnitude generator."""

from __future__ import annotations

__all__: list[str] = [
    "MaskGenerator",
]

import torch
from torch import nn

from scenario_se.nets import BaseGenerator, register_generator
from scenario_se.nets.blocks import ConvBlock, compress


@register_generator("mask")
class MaskGenerator(BaseGenerator):
    """Two time-frequency ConvBlocks and a per-bin affine mask head."""

    def __init__(self, bins: int, channels: tuple[int, int] = (4, 8)) -> None:
        """Create a generator for spectra with `bins` frequency bins."""
        super().__init__(bins)
        first, second = channels
        self.blocks = nn.Sequential(
            ConvBlock(1, first, freq_stride=1),
            ConvBlock(first, second, freq_stride=1),
        )
        self.head_weight = nn.Parameter(torch.empty(second, bins))
        self.head_bias = nn.Parameter(torch.zeros(bins))
        nn.init.normal_(self.head_weight, std=1 / second**0.5)

    def mask(self, noisy_mag: torch.Tensor) -> torch.Tensor:
        """Mask in ``(0, 1)`` for ``[B, T, F]`` noisy magnitudes."""
        features = self.blocks(compress(noisy_mag).unsqueeze(1))
        logits = torch.einsum("bctf,cf->btf", features, self.head_weight)
        return torch.sigmoid(logits + self.head_bias)
