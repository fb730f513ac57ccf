"""Side-by-side log-magnitude spectrograms."""

from __future__ import annotations

__all__: list[str] = [
    "Triptych",
    "plot_triptych",
]

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from loguru import logger
from matplotlib.figure import Figure

from scenario_se.errors import InvalidInputError
from scenario_se.signal_core import DEFAULT_STFT, magnitude, stft
from scenario_se.utils import bin_to_hz

if TYPE_CHECKING:  # pragma: no cover
    from collections.abc import Sequence
    from pathlib import Path

    from scenario_se.band_split import DivisionPoint
    from scenario_se.signal_core import StftConfig, Waveform

DYNAMIC_RANGE_DB = 80.0
DEFAULT_TITLES = ("Noisy", "Enhanced", "Enhanced (SaD)")


@dataclass(frozen=True)
class Triptych:
    """Where a triptych was written and the color scale shared by its panels."""

    path: Path
    vmin_db: float
    vmax_db: float
    division_hz: float | None


def _db(mag: np.ndarray) -> np.ndarray:
    return 20 * np.log10(np.maximum(mag, 1e-10))


def plot_triptych(  # noqa: PLR0913
    noisy: Waveform,
    enhanced: Waveform,
    enhanced_sad: Waveform,
    out_image: Path,
    *,
    division: DivisionPoint | None = None,
    titles: Sequence[str] = DEFAULT_TITLES,
    stft_cfg: StftConfig = DEFAULT_STFT,
) -> Triptych:
    """Render three aligned spectrograms to a PNG.

    All panels share one color scale spanning 80 dB below the loudest bin of
    any panel. A division point, when given, is drawn as a horizontal line.

    Raises:
        InvalidInputError: If the waveforms differ in length or rate.
    """
    waves = (noisy, enhanced, enhanced_sad)
    if len({len(w) for w in waves}) != 1 or len({w.sample_rate for w in waves}) != 1:
        msg = "triptych waveforms must have equal durations and sample rates"
        raise InvalidInputError(msg)
    panels = [_db(magnitude(stft(w, stft_cfg))) for w in waves]
    vmax = max(float(p.max()) for p in panels)
    vmin = vmax - DYNAMIC_RANGE_DB
    rate = noisy.sample_rate
    extent = (0.0, noisy.duration_s, 0.0, rate / 2 / 1000)
    division_hz = (
        None if division is None else bin_to_hz(division.bin, stft_cfg.fft_size, rate)
    )

    fig = Figure(figsize=(12, 3.6), layout="constrained")
    axes = fig.subplots(1, 3, sharey=True)
    image = None
    for ax, panel, title in zip(axes, panels, titles, strict=True):
        image = ax.imshow(
            panel.T,
            origin="lower",
            aspect="auto",
            extent=extent,
            vmin=vmin,
            vmax=vmax,
            cmap="magma",
            interpolation="nearest",
        )
        ax.set_title(title)
        ax.set_xlabel("Time (s)")
        if division_hz is not None:
            ax.axhline(division_hz / 1000, color="cyan", linestyle="--", linewidth=1)
    axes[0].set_ylabel("Frequency (kHz)")
    fig.colorbar(image, ax=axes, label="dB")
    out_image.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_image, format="png", dpi=100, metadata={"Software": None})
    logger.info("Wrote {}", out_image)
    return Triptych(path=out_image, vmin_db=vmin, vmax_db=vmax, division_hz=division_hz)
