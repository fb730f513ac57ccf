"""Tests for band splitting and the MOS proxies."""

from __future__ import annotations

__all__: list[str] = []

from typing import TYPE_CHECKING

import numpy as np
from hypothesis import strategies as st

from scenario_se.band_split import DivisionPoint

if TYPE_CHECKING:  # pragma: no cover
    from scenario_se.signal_core import FloatArray


@st.composite
def st_magnitudes(
    draw: st.DrawFn,
    min_bins: int = 3,
    max_bins: int = 257,
    max_frames: int = 40,
) -> FloatArray:
    """Return a strategy for non-negative ``[frames, bins]`` matrices."""
    seed = draw(st.integers(min_value=0, max_value=2**32 - 1))
    frames = draw(st.integers(min_value=1, max_value=max_frames))
    bins = draw(st.integers(min_value=min_bins, max_value=max_bins))
    return np.random.default_rng(seed).uniform(0.0, 1.0, (frames, bins))


@st.composite
def st_split_magnitudes(
    draw: st.DrawFn,
    max_bins: int = 257,
) -> tuple[FloatArray, DivisionPoint]:
    """Return a strategy for a magnitude matrix and a division point inside it."""
    mag = draw(st_magnitudes(max_bins=max_bins))
    bins = mag.shape[1]
    bin_ = draw(st.integers(min_value=1, max_value=bins - 1))
    return mag, DivisionPoint(bin=bin_, bins=bins)
