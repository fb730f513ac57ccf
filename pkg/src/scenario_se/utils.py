"""Utilities."""

from __future__ import annotations

__all__: list[str] = [
    "bin_to_hz",
    "hz_to_bin",
    "round_half_up",
    "stable_hash",
]

import hashlib
import math


def round_half_up(x: float) -> int:
    """Round to the nearest integer, halves going up.

    Examples:
        >>> round_half_up(2.5), round_half_up(-2.5), round_half_up(2.4999)
        (3, -2, 2)
    """
    return math.floor(x + 0.5)


def bin_to_hz(bin_: float, fft_size: int, sample_rate: int) -> float:
    """Convert a frequency-bin index to Hz.

    Examples:
        >>> bin_to_hz(128, 512, 16000)
        4000.0
    """
    return bin_ * sample_rate / fft_size


def hz_to_bin(hz: float, fft_size: int, sample_rate: int) -> int:
    """Convert a frequency in Hz to the nearest bin index.

    Examples:
        >>> hz_to_bin(1000, 512, 16000)
        32
    """
    return round_half_up(hz * fft_size / sample_rate)


def stable_hash(text: str, digits: int = 16) -> str:
    """Return a short, process-independent SHA-256 digest of `text`."""
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:digits]
