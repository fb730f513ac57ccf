"""Seeded synthesis of speech-like signals and noise."""

from __future__ import annotations

__all__: list[str] = [
    "SPEECH_CUTOFF_HZ",
    "NoiseKind",
    "synth_noise",
    "synth_speech",
]

from enum import StrEnum
from typing import TYPE_CHECKING

import numpy as np
from scipy import signal as sps

from scenario_se.errors import InvalidInputError
from scenario_se.signal_core import SAMPLE_RATE, Waveform

if TYPE_CHECKING:  # pragma: no cover
    from scenario_se.signal_core import FloatArray

PEAK = 0.5
F0_RANGE_HZ = (90.0, 250.0)
CONTROL_RATE_HZ = 100
# harmonics fade out over this band and vanish above it
TAPER_HZ = (3100.0, 3700.0)
SPEECH_CUTOFF_HZ = TAPER_HZ[1]
TILT_KNEE_HZ = 500.0
HIGHPASS_HZ = 3000.0


class NoiseKind(StrEnum):
    """Spectral shapes of synthetic noise."""

    WHITE = "white"
    PINK = "pink"
    BAND_LIMITED_HIGH = "band_limited_high"


def _n_samples(duration_s: float, sample_rate: int) -> int:
    if duration_s <= 0:
        msg = f"duration must be positive, got {duration_s}"
        raise InvalidInputError(msg)
    return round(duration_s * sample_rate)


def _peak_normalize(x: FloatArray) -> FloatArray:
    peak = np.max(np.abs(x))
    return x if peak == 0 else x * (PEAK / peak)


def _envelope(
    freqs: FloatArray,
    formants: FloatArray,
    widths: FloatArray,
    gains: FloatArray,
) -> FloatArray:
    """Harmonic amplitude at `freqs`: spectral tilt, formant bumps, top taper."""
    tilt = 1 / (1 + freqs / TILT_KNEE_HZ)
    bumps = 1 + np.sum(
        gains[:, None]
        * np.exp(
            -0.5 * np.square((freqs[None, :] - formants[:, None]) / widths[:, None]),
        ),
        axis=0,
    )
    lo, hi = TAPER_HZ
    position = np.clip((freqs - lo) / (hi - lo), 0.0, 1.0)
    taper = 0.5 * (1 + np.cos(np.pi * position))
    return tilt * bumps * taper


def synth_speech(
    duration_s: float,
    seed: int,
    sample_rate: int = SAMPLE_RATE,
) -> Waveform:
    """Synthesize a voiced, speech-like signal.

    A harmonic series on a random-walk pitch track (90-250 Hz) is shaped by a
    -6 dB/octave tilt and two or three formant bumps, tapered to silence
    between 3.1 and 3.7 kHz, amplitude-modulated at a syllabic rate of 2-6 Hz
    and peak-normalized to 0.5.
    """
    n = _n_samples(duration_s, sample_rate)
    rng = np.random.default_rng(seed)
    t = np.arange(n) / sample_rate

    n_control = int(duration_s * CONTROL_RATE_HZ) + 2
    log_lo, log_hi = np.log(F0_RANGE_HZ)
    log_start = np.log(rng.uniform(100.0, 220.0))
    log_f0 = log_start + np.cumsum(rng.normal(0.0, 0.02, n_control))
    log_f0 = np.clip(log_f0, log_lo, log_hi)
    f0 = np.interp(t, np.arange(n_control) / CONTROL_RATE_HZ, np.exp(log_f0))
    phase = 2 * np.pi * np.cumsum(f0) / sample_rate

    n_formants = int(rng.integers(2, 4))
    formants = np.array(
        [rng.uniform(300, 900), rng.uniform(900, 2200), rng.uniform(2200, 3000)],
    )
    formants = formants[:n_formants]
    widths = rng.uniform(250, 400, n_formants)
    gains = rng.uniform(0.5, 1.0, n_formants)

    speech = np.zeros(n)
    for k in range(1, int(SPEECH_CUTOFF_HZ // F0_RANGE_HZ[0]) + 1):
        amplitude = _envelope(k * f0, formants, widths, gains)
        speech += amplitude * np.sin(k * phase + rng.uniform(0, 2 * np.pi))

    rate = rng.uniform(2.0, 6.0)
    syllables = 0.55 + 0.45 * np.sin(2 * np.pi * rate * t + rng.uniform(0, 2 * np.pi))
    return Waveform(_peak_normalize(speech * syllables), sample_rate)


def synth_noise(
    kind: NoiseKind | str,
    duration_s: float,
    seed: int,
    sample_rate: int = SAMPLE_RATE,
) -> Waveform:
    """Synthesize seeded noise, peak-normalized to 0.5.

    ``white`` is flat, ``pink`` falls 3 dB per octave, ``band_limited_high``
    is white noise high-passed at 3 kHz.

    Raises:
        InvalidInputError: On an unknown kind or non-positive duration.
    """
    try:
        kind = NoiseKind(kind)
    except ValueError as e:
        msg = f"unknown noise kind {kind!r}"
        raise InvalidInputError(msg) from e
    n = _n_samples(duration_s, sample_rate)
    white = np.random.default_rng(seed).standard_normal(n)
    match kind:
        case NoiseKind.WHITE:
            noise = white
        case NoiseKind.PINK:
            spectrum = np.fft.rfft(white)
            freqs = np.fft.rfftfreq(n, 1 / sample_rate)
            spectrum[0] = 0
            spectrum[1:] /= np.sqrt(freqs[1:])
            noise = np.fft.irfft(spectrum, n=n)
        case NoiseKind.BAND_LIMITED_HIGH:
            sos = sps.butter(
                8,
                HIGHPASS_HZ,
                btype="highpass",
                fs=sample_rate,
                output="sos",
            )
            noise = sps.sosfiltfilt(sos, white)
    return Waveform(_peak_normalize(noise), sample_rate)
