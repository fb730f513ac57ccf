"""Exceptions raised by scenario-se."""

from __future__ import annotations

__all__: list[str] = [
    "CheckpointError",
    "ConfigurationError",
    "ContractViolationError",
    "InvalidInputError",
    "ManifestError",
    "NonFiniteLossError",
    "ScenarioSEError",
    "WavFormatError",
]

from typing import TYPE_CHECKING

if TYPE_CHECKING:  # pragma: no cover
    from collections.abc import Mapping, Sequence


class ScenarioSEError(Exception):
    """Base class for every error raised by this package."""


class InvalidInputError(ScenarioSEError, ValueError):
    """An argument violates an operation's precondition."""


class ConfigurationError(ScenarioSEError, ValueError):
    """A configuration value is unknown, ill-typed or inconsistent."""


class ContractViolationError(ScenarioSEError, RuntimeError):
    """An operation was used outside of its contract."""


class CheckpointError(ScenarioSEError):
    """A checkpoint file is corrupt or does not match the configuration."""


class WavFormatError(InvalidInputError):
    """A WAV file cannot be used as mono 16 kHz audio."""


class ManifestError(ScenarioSEError):
    """One or more manifest entries failed validation."""

    def __init__(self, problems: Sequence[tuple[str, str]]) -> None:
        """Collect per-entry problems.

        Args:
            problems: Pairs of ``(utterance_id, reason)``.
        """
        self.problems = list(problems)
        lines = "; ".join(f"{uid}: {reason}" for uid, reason in self.problems)
        super().__init__(f"{len(self.problems)} invalid manifest entries: {lines}")


class NonFiniteLossError(ScenarioSEError, FloatingPointError):
    """A training step produced a non-finite loss."""

    def __init__(
        self,
        utterance_ids: Sequence[str],
        record: Mapping[str, float],
    ) -> None:
        """Keep the diagnostic record of the offending step.

        Args:
            utterance_ids: Utterances in the offending batch.
            record: Loss values computed before the failure.
        """
        self.utterance_ids = list(utterance_ids)
        self.record = dict(record)
        super().__init__(
            f"non-finite loss for utterances {self.utterance_ids}: {self.record}",
        )
