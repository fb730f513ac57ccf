"""Tests for the `mos_oracle` module."""

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import expit

from scenario_se.band_split import DivisionPoint, hard_split
from scenario_se.errors import InvalidInputError
from scenario_se.mos_oracle import (
    MOS_MAX,
    MOS_MIN,
    MosScores,
    bak_proxy,
    ovl_proxy,
    score_utterance,
    sig_proxy,
)

from . import st_magnitudes, st_split_magnitudes

if TYPE_CHECKING:  # pragma: no cover
    from scenario_se.signal_core import FloatArray


@given(ref=st_magnitudes(max_bins=64), seed=st.integers(0, 2**32 - 1))
def test_bak_formula(ref: FloatArray, seed: int) -> None:
    """Test the residual-energy ratio and its logistic map."""
    signal = ref + np.random.default_rng(seed).uniform(0, 0.5, ref.shape)
    ratio = 10 * np.log10(
        (np.sum(ref**2) + 1e-10) / (np.sum((signal - ref) ** 2) + 1e-10),
    )
    expected = 1 + 4 * expit((ratio - 15) / 10)
    assert bak_proxy(ref, signal) == pytest.approx(expected, abs=1e-12)


@given(ref=st_magnitudes(max_bins=64), seed=st.integers(0, 2**32 - 1))
def test_sig_formula(ref: FloatArray, seed: int) -> None:
    """Test the log-spectral distance and its logistic map."""
    signal = ref * np.random.default_rng(seed).uniform(0.5, 2.0, ref.shape)
    distance = np.mean(np.abs(np.log10(signal + 1e-5) - np.log10(ref + 1e-5)))
    assert sig_proxy(ref, signal) == pytest.approx(
        1 + 4 * expit((0.5 - distance) / 0.2),
        abs=1e-12,
    )


@given(
    ref=st_magnitudes(max_bins=64),
    seed=st.integers(0, 2**32 - 1),
    small=st.floats(0.0, 1.0),
    large=st.floats(1.0, 10.0),
)
def test_monotone_in_degradation(
    ref: FloatArray,
    seed: int,
    small: float,
    large: float,
) -> None:
    """Test scores do not increase when the same degradation grows."""
    noise = np.random.default_rng(seed).uniform(0, 0.2, ref.shape)
    assert bak_proxy(ref, ref + large * noise) <= bak_proxy(ref, ref + small * noise)
    assert sig_proxy(ref, ref + large * noise) <= sig_proxy(ref, ref + small * noise)


@given(
    ref=st_magnitudes(min_bins=1, max_bins=256, max_frames=8),
    seed=st.integers(0, 2**32 - 1),
)
def test_any_band_width(ref: FloatArray, seed: int) -> None:
    """Test every proxy is finite and in range for any band width."""
    signal = np.random.default_rng(seed).uniform(0, 1, ref.shape)
    scores = (bak_proxy(ref, signal), sig_proxy(ref, signal), ovl_proxy(ref, signal))
    for score in scores:
        assert np.isfinite(score)
        assert MOS_MIN <= score <= MOS_MAX


@pytest.mark.parametrize("seed", range(20))
def test_band_locality(seed: int) -> None:
    """Test noise above the split moves only BAK and noise below only SIG."""
    rng = np.random.default_rng(seed)
    clean = rng.uniform(0.1, 1.0, (20, 257))
    m = DivisionPoint(bin=int(rng.integers(32, 192)), bins=257)
    base = score_utterance(clean, clean, m)
    noise = rng.uniform(0.2, 1.0, clean.shape)
    above = clean.copy()
    above[:, m.bin :] += noise[:, m.bin :]
    below = clean.copy()
    below[:, : m.bin] += noise[:, : m.bin]

    high_noise = score_utterance(clean, above, m)
    assert high_noise.bak < base.bak
    assert abs(high_noise.sig - base.sig) < 1e-9
    low_noise = score_utterance(clean, below, m)
    assert low_noise.sig < base.sig
    assert abs(low_noise.bak - base.bak) < 1e-9


@given(case=st_split_magnitudes())
def test_clean_scores(case: tuple[FloatArray, DivisionPoint]) -> None:
    """Test an undegraded utterance scores (5, 4.70, 4.85)."""
    mag, m = case
    mag = mag + 1.0
    scores = score_utterance(mag, mag, m)
    assert scores.sig == pytest.approx(1 + 4 * expit(2.5))
    assert scores.bak == pytest.approx(5.0, abs=1e-3)
    assert scores.ovl == pytest.approx((scores.bak + scores.sig) / 2, abs=1e-3)


@given(case=st_split_magnitudes())
def test_score_utterance_bands(case: tuple[FloatArray, DivisionPoint]) -> None:
    """Test BAK uses the high bands, SIG the low bands, OVL the full band."""
    clean, m = case
    degraded = clean * 0.5
    scores = score_utterance(clean, degraded, m)
    clean_bands, degraded_bands = hard_split(clean, m), hard_split(degraded, m)
    assert scores.bak == bak_proxy(clean_bands.high, degraded_bands.high)
    assert scores.sig == sig_proxy(clean_bands.low, degraded_bands.low)
    assert scores.ovl == ovl_proxy(clean, degraded)
    assert tuple(scores) == (scores.bak, scores.sig, scores.ovl)


def test_validation() -> None:
    """Test shape mismatches, empty bands and out-of-range scores."""
    with pytest.raises(InvalidInputError):
        bak_proxy(np.ones((2, 3)), np.ones((2, 4)))
    with pytest.raises(InvalidInputError):
        sig_proxy(np.ones((2, 0)), np.ones((2, 0)))
    with pytest.raises(InvalidInputError):
        MosScores(bak=5.5, sig=3.0, ovl=3.0)
