"""WAV input/output (mono, 16-bit PCM, 16 kHz canonical)."""

from __future__ import annotations

__all__: list[str] = [
    "read_wav",
    "write_wav",
]

import math
from typing import TYPE_CHECKING

import numpy as np
import soundfile as sf
from loguru import logger
from scipy import signal as sps

from scenario_se.errors import WavFormatError
from scenario_se.signal_core import SAMPLE_RATE, Waveform

if TYPE_CHECKING:  # pragma: no cover
    from pathlib import Path
    from typing import Literal


def read_wav(path: Path, *, strict: bool = True) -> Waveform:
    """Read a mono WAV file as a 16 kHz waveform.

    Args:
        path: File to read.
        strict: Reject files at other sample rates instead of resampling them.

    Returns:
        The waveform, samples scaled to ``[-1, 1]``.

    Raises:
        WavFormatError: If the file is unreadable, not mono, or at another rate
            while `strict` is set.
    """
    try:
        data, rate = sf.read(path, dtype="float64", always_2d=True)
    except (sf.LibsndfileError, RuntimeError, OSError) as e:
        msg = f"cannot read {path}: {e}"
        raise WavFormatError(msg) from e
    if data.shape[1] != 1:
        msg = f"{path} has {data.shape[1]} channels, expected mono"
        raise WavFormatError(msg)
    samples = data[:, 0]
    if rate != SAMPLE_RATE:
        if strict:
            msg = f"{path} is sampled at {rate} Hz, expected {SAMPLE_RATE} Hz"
            raise WavFormatError(msg)
        logger.warning("Resampling {} from {} Hz to {} Hz", path, rate, SAMPLE_RATE)
        g = math.gcd(rate, SAMPLE_RATE)
        samples = sps.resample_poly(samples, SAMPLE_RATE // g, rate // g)
    return Waveform(np.asarray(samples, dtype=np.float64), SAMPLE_RATE)


def write_wav(
    path: Path,
    wave: Waveform,
    subtype: Literal["PCM_16", "FLOAT", "DOUBLE"] = "PCM_16",
) -> None:
    """Write a waveform as a mono RIFF WAV file.

    Samples outside ``[-1, 1]`` are clipped when writing 16-bit PCM.
    """
    samples = wave.samples
    if subtype == "PCM_16":
        samples = np.clip(samples, -1.0, 1.0)
    path.parent.mkdir(parents=True, exist_ok=True)
    sf.write(path, samples, wave.sample_rate, subtype=subtype, format="WAV")
