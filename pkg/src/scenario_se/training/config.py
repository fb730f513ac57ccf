"""Training configuration and its flat ``key = value`` file format.

Every `TrainConfig` field has a key of the same name. Values are parsed by the
field's type: booleans as ``true``/``false``, optional values as ``none``
(or ``auto`` for `TrainConfig.snr_max_db`), tuples and the temperature
schedule as comma-separated lists. Lines starting with ``#`` are comments.
"""

from __future__ import annotations

__all__: list[str] = [
    "Ablation",
    "DiscriminatorMode",
    "TemperatureSchedule",
    "TrainConfig",
    "apply_ablation",
    "config_hash",
    "dump_config",
    "load_config",
    "parse_config",
]

import dataclasses
import math
import types
from dataclasses import dataclass, field
from enum import StrEnum
from typing import TYPE_CHECKING, Any, get_args, get_type_hints

from scenario_se.errors import ConfigurationError
from scenario_se.losses import BakWeightDirection
from scenario_se.signal_core import StftConfig
from scenario_se.utils import stable_hash

if TYPE_CHECKING:  # pragma: no cover
    from collections.abc import Mapping
    from pathlib import Path


class DiscriminatorMode(StrEnum):
    """Discriminator arrangement."""

    SAD = "sad"
    """Splitter plus band-specific BAK/SIG/OVL discriminators."""
    FULLBAND = "fullband"
    """A single full-band OVL discriminator without split or SNR weighting."""


class Ablation(StrEnum):
    """Named configuration presets for ablation runs."""

    NONE = "none"
    NO_WEAK_SUPERVISION = "no_weak_supervision"
    NO_PRETRAIN = "no_pretrain"
    NO_SNR_WEIGHT = "no_snr_weight"
    FULLBAND = "fullband"


class ScheduleRule(StrEnum):
    """Interpolation between the start and end temperature."""

    GEOMETRIC = "geometric"
    LINEAR = "linear"


@dataclass(frozen=True)
class TemperatureSchedule:
    """Per-epoch soft-split temperature, from `start` at epoch 1 to `end`."""

    start: float = 0.05
    end: float = 1e-4
    rule: ScheduleRule = ScheduleRule.GEOMETRIC

    def __post_init__(self) -> None:
        """Check ``start >= end > 0``."""
        if not self.start >= self.end > 0:
            msg = (
                "temperature schedule needs start >= end > 0, "
                f"got {self.start}, {self.end}"
            )
            raise ConfigurationError(msg)

    def at(self, epoch: int, epochs: int) -> float:
        """Temperature of `epoch` (1-based) in a run of `epochs` epochs."""
        if epochs <= 1:
            return self.end
        t = (min(max(epoch, 1), epochs) - 1) / (epochs - 1)
        if self.rule is ScheduleRule.GEOMETRIC:
            return self.start * (self.end / self.start) ** t
        return self.start + (self.end - self.start) * t

    @classmethod
    def parse(cls, text: str) -> TemperatureSchedule:
        """Parse ``start,end,rule``."""
        try:
            start, end, rule = (part.strip() for part in text.split(","))
            return cls(float(start), float(end), ScheduleRule(rule))
        except ValueError as e:
            msg = f"invalid temperature schedule {text!r}: {e}"
            raise ConfigurationError(msg) from e

    def __str__(self) -> str:
        """Canonical ``start,end,rule`` form."""
        return f"{self.start!r},{self.end!r},{self.rule}"


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters of pretraining and adversarial training."""

    epochs: int = 15
    k_supervised: int = 10
    batch_size: int = 8
    learning_rate: float = 1e-3
    gamma: float = 1.0
    lambda_adv: float = 0.05
    temperature_schedule: TemperatureSchedule = field(
        default_factory=TemperatureSchedule,
    )
    seed: int = 7
    bak_weight_direction: BakWeightDirection = BakWeightDirection.FORMULA
    snr_max_db: float | None = None
    fixed_alpha: float | None = None
    pretrain: bool = True
    discriminator_mode: DiscriminatorMode = DiscriminatorMode.SAD
    pretrain_epochs: int = 30
    pretrain_snr_levels_db: tuple[float, ...] = (0.0, 5.0, 10.0, 20.0)
    fft_size: int = 512
    hop: int = 256
    window: str = "sqrt_hann"
    search_lo_hz: float = 1000.0
    search_hi_hz: float = 6000.0
    smoothing_width: int = 5
    validation_fraction: float = 0.2
    generator: str = "mask"
    ablation: Ablation = Ablation.NONE

    def __post_init__(self) -> None:  # noqa: C901
        """Check the invariants between fields.

        Raises:
            ConfigurationError: On the first violated invariant.
        """
        problems: list[str] = []
        if self.epochs < 1:
            problems.append(f"epochs must be >= 1, got {self.epochs}")
        if not 0 <= self.k_supervised <= self.epochs:
            problems.append(
                f"k_supervised must be in [0, epochs], got {self.k_supervised}",
            )
        if self.batch_size < 1:
            problems.append(f"batch_size must be >= 1, got {self.batch_size}")
        if not self.learning_rate > 0:
            problems.append(f"learning_rate must be positive, got {self.learning_rate}")
        if self.gamma < 0 or self.lambda_adv < 0:
            problems.append("gamma and lambda_adv must be non-negative")
        if self.snr_max_db is not None and not self.snr_max_db > 0:
            problems.append(f"snr_max_db must be positive, got {self.snr_max_db}")
        if self.fixed_alpha is not None and not 0 <= self.fixed_alpha <= 1:
            problems.append(f"fixed_alpha must be in [0, 1], got {self.fixed_alpha}")
        if self.pretrain_epochs < 0 or not self.pretrain_snr_levels_db:
            problems.append(
                "pretraining needs pretrain_epochs >= 0 and at least one level",
            )
        if not 0 < self.validation_fraction < 1:
            problems.append(
                "validation_fraction must be in (0, 1), "
                f"got {self.validation_fraction}",
            )
        if self.smoothing_width < 1:
            problems.append(f"smoothing_width must be >= 1, got {self.smoothing_width}")
        if not 0 < self.search_lo_hz < self.search_hi_hz:
            problems.append("search window needs 0 < search_lo_hz < search_hi_hz")
        if problems:
            raise ConfigurationError("; ".join(problems))
        self.stft_config.require_cola()

    @property
    def stft_config(self) -> StftConfig:
        """Framing of every spectrogram."""
        return StftConfig(fft_size=self.fft_size, hop=self.hop, window=self.window)

    @property
    def bins(self) -> int:
        """Frequency bins of every spectrogram."""
        return self.fft_size // 2 + 1

    def temperature(self, epoch: int) -> float:
        """Soft-split temperature of `epoch`."""
        return self.temperature_schedule.at(epoch, self.epochs)

    def replace(self, **changes: Any) -> TrainConfig:  # noqa: ANN401
        """Copy with `changes` applied and invariants rechecked."""
        return dataclasses.replace(self, **changes)


ABLATION_PRESETS: dict[Ablation, dict[str, Any]] = {
    Ablation.NONE: {},
    Ablation.NO_WEAK_SUPERVISION: {"k_supervised": 0},
    Ablation.NO_PRETRAIN: {"pretrain": False},
    Ablation.NO_SNR_WEIGHT: {"fixed_alpha": 0.5},
    Ablation.FULLBAND: {"discriminator_mode": DiscriminatorMode.FULLBAND},
}


def apply_ablation(config: TrainConfig, ablation: Ablation | str) -> TrainConfig:
    """Apply a named ablation preset and record its name."""
    try:
        name = Ablation(ablation)
    except ValueError as e:
        msg = f"unknown ablation {ablation!r}, known: {[str(a) for a in Ablation]}"
        raise ConfigurationError(msg) from e
    return config.replace(**ABLATION_PRESETS[name], ablation=name)


def _parse_bool(text: str) -> bool:
    lowered = text.lower()
    if lowered in {"true", "yes", "1"}:
        return True
    if lowered in {"false", "no", "0"}:
        return False
    msg = f"expected true or false, got {text!r}"
    raise ValueError(msg)


def _coerce(hint: Any, text: str) -> Any:  # noqa: ANN401, PLR0911
    if isinstance(hint, types.UnionType):
        if text.lower() in {"none", "auto", ""}:
            return None
        (inner,) = (a for a in get_args(hint) if a is not type(None))
        return _coerce(inner, text)
    if hint is bool:
        return _parse_bool(text)
    if hint is TemperatureSchedule:
        return TemperatureSchedule.parse(text)
    if isinstance(hint, type) and issubclass(hint, StrEnum):
        return hint(text)
    if hint in {int, float, str}:
        return hint(text)
    if get_args(hint) and get_args(hint)[-1] is Ellipsis:
        return tuple(float(part) for part in text.split(",") if part.strip())
    msg = f"unsupported field type {hint!r}"
    raise TypeError(msg)


def parse_config(text: str, overrides: Mapping[str, str] | None = None) -> TrainConfig:
    """Parse a flat ``key = value`` document into a `TrainConfig`.

    Args:
        text: The document.
        overrides: Raw values applied after the document (e.g. CLI flags).

    Raises:
        ConfigurationError: On malformed lines, unknown keys, unparsable values
            or violated invariants.
    """
    raw: dict[str, str] = {}
    for number, line in enumerate(text.splitlines(), 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        key, sep, value = stripped.partition("=")
        if not sep:
            msg = f"line {number}: expected 'key = value', got {line!r}"
            raise ConfigurationError(msg)
        raw[key.strip()] = value.strip()
    raw.update(overrides or {})

    hints = get_type_hints(TrainConfig)
    known = {f.name for f in dataclasses.fields(TrainConfig)}
    if unknown := sorted(set(raw) - known):
        msg = f"unknown config keys: {unknown}"
        raise ConfigurationError(msg)
    values: dict[str, Any] = {}
    for key, value in raw.items():
        try:
            values[key] = _coerce(hints[key], value)
        except (ValueError, TypeError) as e:
            msg = f"invalid value {value!r} for {key}: {e}"
            raise ConfigurationError(msg) from e
    return TrainConfig(**values)


def load_config(
    path: Path | None,
    overrides: Mapping[str, str] | None = None,
) -> TrainConfig:
    """Read a config file; `None` means all defaults."""
    if path is None:
        return parse_config("", overrides)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        msg = f"cannot read config {path}: {e}"
        raise ConfigurationError(msg) from e
    return parse_config(text, overrides)


def _format(value: object) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value) if math.isfinite(value) else str(value)
    if isinstance(value, tuple):
        return ",".join(_format(v) for v in value)
    return str(value)


def dump_config(config: TrainConfig) -> str:
    """Canonical ``key = value`` form, keys sorted."""
    names = sorted(f.name for f in dataclasses.fields(config))
    items = [(name, getattr(config, name)) for name in names]
    return "".join(f"{key} = {_format(value)}\n" for key, value in items)


def config_hash(config: TrainConfig) -> str:
    """Stable 16-hex-digit digest of the canonical form."""
    return stable_hash(dump_config(config))
