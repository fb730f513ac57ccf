"""Tests for the `data` package."""

from __future__ import annotations

__all__: list[str] = ["band_energy_fraction"]

from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:  # pragma: no cover
    from scenario_se.signal_core import Waveform


def band_energy_fraction(wave: Waveform, lo_hz: float, hi_hz: float) -> float:
    """Share of the signal's energy between `lo_hz` and `hi_hz`."""
    power = np.square(np.abs(np.fft.rfft(wave.samples)))
    freqs = np.fft.rfftfreq(len(wave), 1 / wave.sample_rate)
    return float(power[(freqs >= lo_hz) & (freqs < hi_hz)].sum() / power.sum())
