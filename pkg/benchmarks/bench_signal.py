"""Framing and division-point oracle on six-second utterances."""

from __future__ import annotations

from scenario_se.band_split import dfkd_division_point
from scenario_se.data.synth import synth_speech
from scenario_se.signal_core import istft, magnitude, stft


class TimeSignal:
    """STFT round trip at the default framing."""

    def setup(self) -> None:
        """Synthesize one utterance."""
        self.wave = synth_speech(6.0, seed=0)
        self.spec = stft(self.wave)
        self.mag = magnitude(self.spec)

    def time_stft(self) -> None:
        """Forward transform."""
        stft(self.wave)

    def time_istft(self) -> None:
        """Weighted overlap-add inverse."""
        istft(self.spec, length=len(self.wave))

    def time_dfkd_division_point(self) -> None:
        """Steepest-descent search in the default window."""
        dfkd_division_point(self.mag)
