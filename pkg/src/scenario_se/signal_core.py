"""Time/frequency conversion and SNR arithmetic.

Spectral normalization: `stft` applies the analysis window and an unscaled
``rfft``; `istft` overlap-adds ``irfft`` frames multiplied by the same window
and divides by the summed squared window. For a window whose square is
constant-overlap-add at the hop (the default ``sqrt_hann`` at 50% overlap),
every fully covered sample therefore satisfies

    sum(x**2) == spectral_energy(stft(x))

where `spectral_energy` weights interior bins twice (one-sided spectrum) and
divides by ``fft_size`` and by the overlap-add constant of the squared window.
"""

from __future__ import annotations

__all__: list[str] = [
    "DEFAULT_STFT",
    "SAMPLE_RATE",
    "SI_SDR_CAP_DB",
    "FloatArray",
    "Spectrogram",
    "StftConfig",
    "Waveform",
    "estimate_snr_db",
    "istft",
    "magnitude",
    "mix_at_snr",
    "segmental_snr",
    "si_sdr",
    "snr_db",
    "spectral_energy",
    "stft",
]

from dataclasses import dataclass, field
from functools import cached_property
from typing import TYPE_CHECKING

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import signal as sps

from scenario_se.errors import ConfigurationError, InvalidInputError

if TYPE_CHECKING:  # pragma: no cover
    import numpy.typing as npt

type FloatArray = npt.NDArray[np.float64]
type ComplexArray = npt.NDArray[np.complex128]

SAMPLE_RATE = 16_000
SI_SDR_CAP_DB = 60.0

SEGSNR_MIN_DB = -10.0
SEGSNR_MAX_DB = 35.0
_EPSILON = 1e-7


@dataclass(frozen=True)
class Waveform:
    """Mono real-valued samples with their sample rate."""

    samples: FloatArray
    sample_rate: int = SAMPLE_RATE

    def __post_init__(self) -> None:
        """Validate and freeze the sample buffer."""
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            msg = f"waveform must be mono, got shape {samples.shape}"
            raise InvalidInputError(msg)
        if self.sample_rate <= 0:
            msg = f"sample rate must be positive, got {self.sample_rate}"
            raise InvalidInputError(msg)
        if not np.all(np.isfinite(samples)):
            msg = "waveform contains non-finite samples"
            raise InvalidInputError(msg)
        samples.flags.writeable = False
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        """Number of samples."""
        return int(self.samples.size)

    @property
    def duration_s(self) -> float:
        """Duration in seconds."""
        return len(self) / self.sample_rate

    @property
    def energy(self) -> float:
        """Sum of squared samples."""
        return float(np.sum(np.square(self.samples)))


@dataclass(frozen=True)
class StftConfig:
    """Framing parameters of the short-time Fourier transform."""

    fft_size: int = 512
    hop: int = 256
    window: str = "sqrt_hann"
    _window: FloatArray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        """Check the framing and build the analysis window."""
        if self.fft_size <= 0 or self.fft_size % 2:
            msg = f"fft_size must be a positive even number, got {self.fft_size}"
            raise ConfigurationError(msg)
        if not 0 < self.hop <= self.fft_size:
            msg = f"hop must be in (0, fft_size], got {self.hop}"
            raise ConfigurationError(msg)
        if self.window == "sqrt_hann":
            window = np.sqrt(sps.get_window("hann", self.fft_size))
        else:
            try:
                window = sps.get_window(self.window, self.fft_size)
            except ValueError as e:
                msg = f"unknown window {self.window!r}"
                raise ConfigurationError(msg) from e
        window = np.asarray(window, dtype=np.float64)
        window.flags.writeable = False
        object.__setattr__(self, "_window", window)

    @property
    def bins(self) -> int:
        """Number of one-sided frequency bins."""
        return self.fft_size // 2 + 1

    @property
    def analysis_window(self) -> FloatArray:
        """The analysis (and synthesis) window."""
        return self._window

    @cached_property
    def is_cola(self) -> bool:
        """Whether the squared window is constant-overlap-add at this hop."""
        return bool(
            sps.check_COLA(
                np.square(self._window),
                self.fft_size,
                self.fft_size - self.hop,
            ),
        )

    @property
    def overlap_add_gain(self) -> float:
        """Constant value of the overlap-added squared window."""
        return float(np.sum(np.square(self._window)) / self.hop)

    def require_cola(self) -> None:
        """Raise unless the configuration can be inverted exactly.

        Raises:
            ConfigurationError: If the squared window is not COLA at the hop.
        """
        if not self.is_cola:
            msg = (
                f"window {self.window!r} is not constant-overlap-add "
                f"at fft_size={self.fft_size}, hop={self.hop}"
            )
            raise ConfigurationError(msg)

    def n_frames(self, n_samples: int) -> int:
        """Frames produced for a signal of `n_samples` (no padding)."""
        return 1 + (n_samples - self.fft_size) // self.hop


DEFAULT_STFT = StftConfig()


@dataclass(frozen=True)
class Spectrogram:
    """Complex STFT values laid out as ``[frames, bins]``."""

    values: ComplexArray
    config: StftConfig = DEFAULT_STFT
    sample_rate: int = SAMPLE_RATE

    def __post_init__(self) -> None:
        """Check the bin axis and that every value is finite."""
        bins = self.config.bins
        if self.values.ndim != 2 or self.values.shape[1] != bins:  # noqa: PLR2004
            msg = (
                f"spectrogram must be [frames, {self.config.bins}], "
                f"got {self.values.shape}"
            )
            raise InvalidInputError(msg)
        if not np.all(np.isfinite(self.values)):
            msg = "spectrogram contains non-finite values"
            raise InvalidInputError(msg)

    @property
    def frames(self) -> int:
        """Number of time frames."""
        return int(self.values.shape[0])

    @property
    def bins(self) -> int:
        """Number of frequency bins."""
        return int(self.values.shape[1])

    @property
    def bin_hz(self) -> float:
        """Width of one frequency bin in Hz."""
        return self.sample_rate / self.config.fft_size


def stft(wave: Waveform, cfg: StftConfig = DEFAULT_STFT) -> Spectrogram:
    """Short-time Fourier transform without padding.

    The frame count is ``1 + (len(wave) - fft_size) // hop``; trailing samples
    that do not fill a whole frame are ignored.

    Args:
        wave: The signal.
        cfg: Framing parameters.

    Returns:
        The ``[frames, bins]`` complex spectrogram.

    Raises:
        InvalidInputError: If the signal is shorter than one window.
    """
    if len(wave) < cfg.fft_size:
        msg = f"signal of {len(wave)} samples is shorter than one window"
        raise InvalidInputError(msg)
    frames = sliding_window_view(wave.samples, cfg.fft_size)[:: cfg.hop]
    values = np.fft.rfft(frames * cfg.analysis_window, axis=-1)
    return Spectrogram(values=values, config=cfg, sample_rate=wave.sample_rate)


def istft(spec: Spectrogram, length: int | None = None) -> Waveform:
    """Inverse of `stft` by weighted overlap-add.

    Samples where the summed squared window vanishes (the very first sample
    for Hann-type windows) are returned as zero.

    Args:
        spec: The spectrogram.
        length: Pad with zeros or trim to this many samples.

    Returns:
        The reconstructed waveform.
    """
    cfg = spec.config
    cfg.require_cola()
    window = cfg.analysis_window
    frames = np.fft.irfft(spec.values, n=cfg.fft_size, axis=-1) * window
    n_out = (spec.frames - 1) * cfg.hop + cfg.fft_size
    index = (np.arange(spec.frames) * cfg.hop)[:, None] + np.arange(cfg.fft_size)
    out = np.zeros(n_out)
    norm = np.zeros(n_out)
    np.add.at(out, index, frames)
    np.add.at(norm, index, np.broadcast_to(np.square(window), frames.shape))
    covered = norm > 1e-10  # noqa: PLR2004
    out = np.divide(out, norm, out=np.zeros_like(out), where=covered)
    if length is not None:
        out = np.pad(out, (0, max(0, length - n_out)))[:length]
    return Waveform(out, spec.sample_rate)


def magnitude(spec: Spectrogram) -> FloatArray:
    """Elementwise modulus of the spectrogram."""
    return np.abs(spec.values)


def spectral_energy(spec: Spectrogram) -> float:
    """Time-domain energy implied by a spectrogram (see module docstring)."""
    power = np.square(np.abs(spec.values))
    weights = np.full(spec.bins, 2.0)
    weights[0] = 1.0
    weights[-1] = 1.0
    total = float(np.sum(power * weights)) / spec.config.fft_size
    return total / spec.config.overlap_add_gain


def _require_paired(a: Waveform, b: Waveform) -> None:
    if len(a) != len(b):
        msg = f"length mismatch: {len(a)} != {len(b)}"
        raise InvalidInputError(msg)
    if a.sample_rate != b.sample_rate:
        msg = f"sample rate mismatch: {a.sample_rate} != {b.sample_rate}"
        raise InvalidInputError(msg)


def snr_db(signal: Waveform, noise: Waveform) -> float:
    """Signal-to-noise ratio ``10*log10(sum(s**2) / sum(n**2))``.

    Raises:
        InvalidInputError: If the noise has zero energy; use the recorded
            manifest SNR instead of an infinite estimate.
    """
    _require_paired(signal, noise)
    if noise.energy == 0:
        msg = "noise has zero energy; SNR would be infinite"
        raise InvalidInputError(msg)
    return float(10 * np.log10(signal.energy / noise.energy))


def estimate_snr_db(clean: Waveform, noisy: Waveform) -> float:
    """SNR of a noisy mixture against its clean reference."""
    _require_paired(clean, noisy)
    return snr_db(clean, Waveform(noisy.samples - clean.samples, noisy.sample_rate))


def mix_at_snr(clean: Waveform, noise: Waveform, snr_db: float) -> Waveform:
    """Add `noise` to `clean`, scaled so the mixture has the requested SNR.

    Raises:
        InvalidInputError: If the signals are not paired, `clean` is silent or
            `noise` is silent.
    """
    _require_paired(clean, noise)
    if clean.energy == 0:
        msg = "clean signal has zero energy"
        raise InvalidInputError(msg)
    if noise.energy == 0:
        msg = f"cannot reach {snr_db} dB SNR with zero-energy noise"
        raise InvalidInputError(msg)
    gain = np.sqrt(clean.energy / (noise.energy * 10 ** (snr_db / 10)))
    return Waveform(clean.samples + gain * noise.samples, clean.sample_rate)


def si_sdr(reference: Waveform, estimate: Waveform) -> float:
    """Scale-invariant signal-to-distortion ratio in dB.

    The value is capped to ``[-SI_SDR_CAP_DB, SI_SDR_CAP_DB]`` so that exact
    and silent estimates stay finite.

    Raises:
        InvalidInputError: If the reference is silent or the pair mismatches.
    """
    _require_paired(reference, estimate)
    if reference.energy == 0:
        msg = "reference has zero energy"
        raise InvalidInputError(msg)
    ref = reference.samples
    scale = float(np.dot(estimate.samples, ref)) / reference.energy
    target = scale * ref
    residual = estimate.samples - target
    target_energy = float(np.sum(np.square(target)))
    residual_energy = float(np.sum(np.square(residual)))
    if residual_energy == 0:
        return SI_SDR_CAP_DB
    if target_energy == 0:
        return -SI_SDR_CAP_DB
    value = 10 * np.log10(target_energy / residual_energy)
    return float(np.clip(value, -SI_SDR_CAP_DB, SI_SDR_CAP_DB))


def segmental_snr(clean: Waveform, estimate: Waveform, frame_ms: float = 20.0) -> float:
    """Mean frame-wise SNR over 50%-overlapping Hann frames.

    Each frame's SNR is clamped to ``[-10, 35]`` dB before averaging.
    """
    _require_paired(clean, estimate)
    frame = int(clean.sample_rate * frame_ms / 1000)
    if len(clean) < frame:
        msg = f"signal of {len(clean)} samples is shorter than one {frame_ms} ms frame"
        raise InvalidInputError(msg)
    window = np.hanning(frame)
    clean_frames = sliding_window_view(clean.samples, frame)[:: frame // 2] * window
    error_frames = (
        sliding_window_view(clean.samples - estimate.samples, frame)[:: frame // 2]
        * window
    )
    speech = np.sum(np.square(clean_frames), axis=-1)
    noise = np.sum(np.square(error_frames), axis=-1)
    frame_snr = 10 * np.log10(speech / (noise + _EPSILON) + _EPSILON)
    return float(np.mean(np.clip(frame_snr, SEGSNR_MIN_DB, SEGSNR_MAX_DB)))
