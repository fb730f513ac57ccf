"""Differentiable models: generator, frequency splitter and discriminators."""

from __future__ import annotations

__all__: list[str] = [
    "DTYPE",
    "GENERATORS",
    "BaseGenerator",
    "ModelSet",
    "backward",
    "build_models",
    "parameter_count",
    "register_generator",
    "seeded",
]

from abc import ABC, abstractmethod
from contextlib import contextmanager
from dataclasses import dataclass
from typing import TYPE_CHECKING

import torch
from torch import nn

from scenario_se.errors import (
    ConfigurationError,
    ContractViolationError,
    InvalidInputError,
)

if TYPE_CHECKING:  # pragma: no cover
    from collections.abc import Callable, Iterator

    from scenario_se.nets.discriminator import MetricDiscriminator
    from scenario_se.nets.splitter import FrequencySplitter

DTYPE = torch.float64

GENERATORS: dict[str, type[BaseGenerator]] = {}


class BaseGenerator(nn.Module, ABC):
    """Magnitude-domain generator mapping noisy to enhanced magnitudes."""

    def __init__(self, bins: int) -> None:
        """Bind the generator to a spectrum size."""
        super().__init__()
        self.bins = bins

    @abstractmethod
    def mask(self, noisy_mag: torch.Tensor) -> torch.Tensor:
        """Return a ``(0, 1)`` mask for ``[B, T, F]`` noisy magnitudes."""

    def forward(self, noisy_mag: torch.Tensor) -> torch.Tensor:
        """Enhance ``[B, T, F]`` (or ``[T, F]``) magnitudes by masking.

        Raises:
            InvalidInputError: If the bin count does not match the generator.
        """
        if noisy_mag.shape[-1] != self.bins:
            msg = f"generator expects {self.bins} bins, got {noisy_mag.shape[-1]}"
            raise InvalidInputError(msg)
        single = noisy_mag.dim() == 2  # noqa: PLR2004
        x = noisy_mag.unsqueeze(0) if single else noisy_mag
        enhanced = self.mask(x) * x
        return enhanced[0] if single else enhanced


def register_generator[G: type[BaseGenerator]](name: str) -> Callable[[G], G]:
    """Register a generator class under `name`."""

    def decorator(cls: G) -> G:
        GENERATORS[name] = cls
        return cls

    return decorator


@contextmanager
def seeded(seed: int) -> Iterator[None]:
    """Seed torch's global generator without leaking the state."""
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        yield


def parameter_count(model: nn.Module) -> int:
    """Number of trainable scalars."""
    return sum(p.numel() for p in model.parameters() if p.requires_grad)


def backward(loss: torch.Tensor, model: nn.Module) -> dict[str, torch.Tensor]:
    """Gradient of a scalar loss for every named parameter of `model`.

    Parameters the loss does not depend on get zero gradients.

    Raises:
        ContractViolationError: If the loss carries no recorded computation.
    """
    if loss.grad_fn is None or not loss.requires_grad:
        msg = "loss has no recorded forward computation"
        raise ContractViolationError(msg)
    named = list(model.named_parameters())
    grads = torch.autograd.grad(
        loss,
        [p for _, p in named],
        allow_unused=True,
        retain_graph=True,
    )
    return {
        name: torch.zeros_like(p) if g is None else g
        for (name, p), g in zip(named, grads, strict=True)
    }


@dataclass
class ModelSet:
    """The generator and the scenario-aware discriminator's four networks."""

    generator: BaseGenerator
    splitter: FrequencySplitter
    d_bak: MetricDiscriminator
    d_sig: MetricDiscriminator
    d_ovl: MetricDiscriminator

    def named_models(self) -> dict[str, nn.Module]:
        """Models by checkpoint name, in a fixed order."""
        return {
            "generator": self.generator,
            "splitter": self.splitter,
            "d_bak": self.d_bak,
            "d_sig": self.d_sig,
            "d_ovl": self.d_ovl,
        }

    def discriminator_side(self) -> list[nn.Parameter]:
        """Parameters updated by the discriminator step."""
        return [
            p
            for model in (self.d_bak, self.d_sig, self.d_ovl, self.splitter)
            for p in model.parameters()
        ]


def build_models(bins: int, seed: int, generator: str = "mask") -> ModelSet:
    """Build every model with a seeded, reproducible initialization.

    Raises:
        ConfigurationError: If `generator` is not registered.
    """
    from scenario_se.nets.discriminator import MetricDiscriminator  # noqa: PLC0415
    from scenario_se.nets.splitter import FrequencySplitter  # noqa: PLC0415

    try:
        generator_cls = GENERATORS[generator]
    except KeyError as e:
        msg = f"unknown generator {generator!r}, known: {sorted(GENERATORS)}"
        raise ConfigurationError(msg) from e

    with seeded(seed):
        g = generator_cls(bins)
    with seeded(seed + 1):
        f = FrequencySplitter()
    with seeded(seed + 2):
        d_bak = MetricDiscriminator()
    with seeded(seed + 3):
        d_sig = MetricDiscriminator()
    with seeded(seed + 4):
        d_ovl = MetricDiscriminator()
    models = ModelSet(generator=g, splitter=f, d_bak=d_bak, d_sig=d_sig, d_ovl=d_ovl)
    for model in models.named_models().values():
        model.to(DTYPE)
    return models


# Registers the built-in generators.
from scenario_se.nets import generator as _generator  # noqa: E402, F401
