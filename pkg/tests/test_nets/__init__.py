"""Tests for the `nets` package."""

from __future__ import annotations

__all__: list[str] = ["gradcheck_parameters"]

from typing import TYPE_CHECKING

import torch
from torch.func import functional_call

if TYPE_CHECKING:  # pragma: no cover
    from collections.abc import Callable

    from torch import nn


def gradcheck_parameters(
    model: nn.Module,
    forward: Callable[[Callable[..., torch.Tensor]], torch.Tensor],
) -> bool:
    """Compare parameter gradients against central finite differences.

    `forward` receives a callable that runs `model` with the perturbed
    parameters and returns the output to differentiate.
    """
    names = [name for name, _ in model.named_parameters()]
    values = tuple(p.detach().clone().requires_grad_() for p in model.parameters())

    def run(*params: torch.Tensor) -> torch.Tensor:
        state = dict(zip(names, params, strict=True))
        return forward(lambda *args: functional_call(model, state, args))

    return torch.autograd.gradcheck(run, values, eps=1e-6, atol=1e-6, rtol=1e-4)
