"""Tests for the signal modules."""

from __future__ import annotations

__all__: list[str] = []

import numpy as np
from hypothesis import strategies as st

from scenario_se.signal_core import Waveform


@st.composite
def st_waveforms(
    draw: st.DrawFn,
    min_size: int = 512,
    max_size: int = 8192,
) -> Waveform:
    """Return a strategy for seeded random waveforms in ``[-1, 1]``."""
    seed = draw(st.integers(min_value=0, max_value=2**32 - 1))
    n = draw(st.integers(min_value=min_size, max_value=max_size))
    return Waveform(np.random.default_rng(seed).uniform(-1.0, 1.0, n))


@st.composite
def st_signal_noise(draw: st.DrawFn, size: int = 4096) -> tuple[Waveform, Waveform]:
    """Return a strategy for a clean signal and an independent noise."""
    seed = draw(st.integers(min_value=0, max_value=2**32 - 1))
    rng = np.random.default_rng(seed)
    tone = np.sin(np.arange(size) * rng.uniform(0.01, 0.5))
    clean = Waveform(tone * rng.uniform(0.1, 1))
    noise = Waveform(rng.standard_normal(size) * rng.uniform(0.01, 1))
    return clean, noise
