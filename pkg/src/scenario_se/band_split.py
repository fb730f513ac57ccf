"""Division-point oracle and low/high band splitting.

The low band holds the bins below the division point (speech-dominated), the
high band the bins from the division point upwards (noise-dominated). All
functions act on the last axis, so leading batch/channel axes pass through.
"""

from __future__ import annotations

__all__: list[str] = [
    "REFERENCE_HZ",
    "BandPair",
    "DivisionPoint",
    "dfkd_division_point",
    "hard_split",
    "merge",
    "soft_bands",
    "soft_split",
    "soft_weights",
]

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, overload

import numpy as np
import torch
from loguru import logger
from scipy.ndimage import uniform_filter1d

from scenario_se.errors import ContractViolationError, InvalidInputError
from scenario_se.signal_core import SAMPLE_RATE
from scenario_se.utils import bin_to_hz, hz_to_bin, round_half_up

if TYPE_CHECKING:  # pragma: no cover
    from scenario_se.signal_core import FloatArray

REFERENCE_HZ = 4000.0
FLOOR_DB = 80.0
DIFF_DECIMALS = 9


@dataclass(frozen=True)
class DivisionPoint:
    """A frequency split between ``bin - 1`` and ``bin``."""

    bin: int
    bins: int
    fallback: bool = False

    def __post_init__(self) -> None:
        """Keep the split strictly inside the spectrum."""
        if not 1 <= self.bin <= self.bins - 1:
            msg = f"division bin {self.bin} outside [1, {self.bins - 1}]"
            raise InvalidInputError(msg)

    @property
    def fraction(self) -> float:
        """The split as a fraction of all bins."""
        return self.bin / self.bins

    @classmethod
    def from_fraction(cls, fraction: float, bins: int) -> DivisionPoint:
        """Round-half-up a fraction to a bin, clamped into the valid range."""
        bin_ = min(max(round_half_up(fraction * bins), 1), bins - 1)
        return cls(bin=bin_, bins=bins)

    def hz(self, sample_rate: int = SAMPLE_RATE) -> float:
        """Frequency of the division bin."""
        return bin_to_hz(self.bin, 2 * (self.bins - 1), sample_rate)


@dataclass(frozen=True)
class BandPair[M: (FloatArray, torch.Tensor)]:
    """Low (``[0, m)``) and high (``[m, bins)``) parts of a magnitude matrix."""

    low: M
    high: M

    @property
    def bins(self) -> int:
        """Bins of the merged matrix."""
        return int(self.low.shape[-1] + self.high.shape[-1])


def dfkd_division_point(
    clean_mag: FloatArray,
    search_lo_hz: float = 1000.0,
    search_hi_hz: float = 6000.0,
    *,
    sample_rate: int = SAMPLE_RATE,
    smoothing_width: int = 5,
) -> DivisionPoint:
    """Locate the steepest spectral descent of a clean utterance.

    The per-bin mean magnitude is converted to dB (floored 80 dB below its
    peak), smoothed by a centred moving average, and differenced across bins.
    The returned bin is the upper side of the most negative difference inside
    the search window; ties go to the lower bin. An all-zero profile falls
    back to the 4 kHz reference bin with `DivisionPoint.fallback` set.

    Args:
        clean_mag: ``[frames, bins]`` non-negative magnitudes.
        search_lo_hz: Lower edge of the search window.
        search_hi_hz: Upper edge of the search window.
        sample_rate: Sample rate of the analysed signal.
        smoothing_width: Moving-average width in bins.

    Returns:
        The division point.

    Raises:
        InvalidInputError: On negative magnitudes or a window outside
            ``(0, Nyquist)``.
    """
    mag = np.asarray(clean_mag, dtype=np.float64)
    if mag.ndim != 2:  # noqa: PLR2004
        msg = f"expected a [frames, bins] matrix, got shape {mag.shape}"
        raise InvalidInputError(msg)
    if np.any(mag < 0):
        msg = "magnitudes must be non-negative"
        raise InvalidInputError(msg)
    bins = mag.shape[1]
    fft_size = 2 * (bins - 1)
    nyquist = sample_rate / 2
    if not 0 < search_lo_hz < search_hi_hz < nyquist:
        msg = (
            f"search window [{search_lo_hz}, {search_hi_hz}] Hz "
            f"not inside (0, {nyquist})"
        )
        raise InvalidInputError(msg)

    profile = mag.mean(axis=0)
    peak = float(profile.max(initial=0.0))
    if peak == 0:
        fallback = min(max(hz_to_bin(REFERENCE_HZ, fft_size, sample_rate), 1), bins - 1)
        logger.warning("All-zero spectral profile, falling back to bin {}", fallback)
        return DivisionPoint(bin=fallback, bins=bins, fallback=True)

    floor = peak * 10 ** (-FLOOR_DB / 20)
    profile_db = 20 * np.log10(np.maximum(profile, floor))
    smoothed = uniform_filter1d(profile_db, size=smoothing_width, mode="nearest")
    # quantized so that equal slopes tie exactly
    slope = np.round(np.diff(smoothed), DIFF_DECIMALS)

    bin_hz = sample_rate / fft_size
    lo = max(math.ceil(search_lo_hz / bin_hz), 1)
    hi = min(math.floor(search_hi_hz / bin_hz), bins - 1)
    if lo > hi:
        msg = f"search window [{search_lo_hz}, {search_hi_hz}] Hz holds no bin"
        raise InvalidInputError(msg)
    steepest = lo - 1 + int(np.argmin(slope[lo - 1 : hi]))
    point = DivisionPoint(bin=steepest + 1, bins=bins)
    logger.debug(
        "Division point at bin {} ({:.0f} Hz)",
        point.bin,
        point.hz(sample_rate),
    )
    return point


def _require_no_grad(spec_mag: FloatArray | torch.Tensor) -> None:
    if isinstance(spec_mag, torch.Tensor) and spec_mag.requires_grad:
        msg = "hard_split is not differentiable; use soft_split for gradient paths"
        raise ContractViolationError(msg)


@overload
def hard_split(spec_mag: FloatArray, m: DivisionPoint) -> BandPair[FloatArray]: ...
@overload
def hard_split(spec_mag: torch.Tensor, m: DivisionPoint) -> BandPair[torch.Tensor]: ...
def hard_split(
    spec_mag: FloatArray | torch.Tensor,
    m: DivisionPoint,
) -> BandPair[FloatArray] | BandPair[torch.Tensor]:
    """Split a magnitude matrix at a division point.

    Raises:
        InvalidInputError: If the bin is outside ``[1, bins - 1]`` for `spec_mag`.
        ContractViolationError: If `spec_mag` is a tensor that requires grad.
    """
    _require_no_grad(spec_mag)
    bins = spec_mag.shape[-1]
    if m.bins != bins or not 1 <= m.bin <= bins - 1:
        msg = f"division bin {m.bin} of {m.bins} does not fit {bins} bins"
        raise InvalidInputError(msg)
    low, high = spec_mag[..., : m.bin], spec_mag[..., m.bin :]
    return BandPair(low=low, high=high)  # type: ignore[arg-type]


@overload
def merge(pair: BandPair[FloatArray]) -> FloatArray: ...
@overload
def merge(pair: BandPair[torch.Tensor]) -> torch.Tensor: ...
def merge(
    pair: BandPair[FloatArray] | BandPair[torch.Tensor],
) -> FloatArray | torch.Tensor:
    """Concatenate a band pair back along the bin axis.

    Raises:
        InvalidInputError: If the bands disagree on any axis but the last.
    """
    if pair.low.shape[:-1] != pair.high.shape[:-1]:
        msg = f"band shapes {pair.low.shape} and {pair.high.shape} do not align"
        raise InvalidInputError(msg)
    if isinstance(pair.low, torch.Tensor) and isinstance(pair.high, torch.Tensor):
        return torch.cat([pair.low, pair.high], dim=-1)
    return np.concatenate([pair.low, pair.high], axis=-1)


def soft_weights(
    bins: int,
    fraction: float | torch.Tensor,
    temperature: float,
    *,
    snap: bool = False,
) -> torch.Tensor:
    """High-band weight of every bin, measured at the bin centre.

    ``w(b) = logistic(((b + 0.5) / bins - edge) / temperature)``; a bin whose
    centre sits exactly on the boundary gets weight 0.5.

    Without `snap` the edge is `fraction` itself. With `snap` the edge is
    moved onto the hard division bin of `fraction` in the forward pass while
    the gradient still flows to `fraction` unchanged (straight-through), so
    every bin centre is at least half a bin from the edge and the weights
    approach the hard split as the temperature falls.
    """
    if temperature <= 0:
        msg = f"temperature must be positive, got {temperature}"
        raise InvalidInputError(msg)
    fraction_t = torch.as_tensor(fraction, dtype=torch.float64)
    value = float(fraction_t.detach())
    if not 0 < value < 1:
        msg = f"fraction must be in (0, 1), got {value}"
        raise InvalidInputError(msg)
    edge = fraction_t
    if snap:
        snapped = DivisionPoint.from_fraction(value, bins).fraction
        edge = fraction_t + (snapped - fraction_t).detach()
    centres = (torch.arange(bins, dtype=fraction_t.dtype) + 0.5) / bins
    return torch.sigmoid((centres - edge) / temperature)


@overload
def soft_split(
    spec_mag: FloatArray,
    fraction: float,
    temperature: float,
    *,
    snap: bool = False,
) -> tuple[FloatArray, FloatArray]: ...
@overload
def soft_split(
    spec_mag: torch.Tensor,
    fraction: float | torch.Tensor,
    temperature: float,
    *,
    snap: bool = False,
) -> tuple[torch.Tensor, torch.Tensor]: ...
def soft_split(
    spec_mag: FloatArray | torch.Tensor,
    fraction: float | torch.Tensor,
    temperature: float,
    *,
    snap: bool = False,
) -> tuple[FloatArray, FloatArray] | tuple[torch.Tensor, torch.Tensor]:
    """Differentiable low/high masking of a magnitude matrix.

    `snap` is passed on to `soft_weights`.

    Returns:
        ``(low_masked, high_masked)``, both shaped like `spec_mag`, with
        ``high_masked = w * spec_mag`` and ``low_masked = spec_mag - high_masked``.
        Their sum reproduces `spec_mag` up to floating-point rounding (one
        unit in the last place), not bit for bit.
    """
    weights = soft_weights(spec_mag.shape[-1], fraction, temperature, snap=snap)
    if isinstance(spec_mag, torch.Tensor):
        high_t = spec_mag * weights.to(spec_mag.dtype)
        return spec_mag - high_t, high_t
    high = spec_mag * weights.detach().numpy()
    return spec_mag - high, high


def soft_bands(
    spec_mag: torch.Tensor,
    fraction: torch.Tensor,
    temperature: float,
) -> BandPair[torch.Tensor]:
    """Soft-split bands cropped at the hard bin of `fraction`.

    The logistic edge is snapped onto that bin (see `soft_weights`), so at
    the end of the temperature schedule the bands equal `hard_split` at the
    same bin within 1e-3 while the gradient still reaches `fraction`.
    """
    low, high = soft_split(spec_mag, fraction, temperature, snap=True)
    point = DivisionPoint.from_fraction(float(fraction.detach()), spec_mag.shape[-1])
    return BandPair(low=low[..., : point.bin], high=high[..., point.bin :])
