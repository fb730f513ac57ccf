"""Corpus construction: synthetic mixtures and external clean/noisy pairs."""

from __future__ import annotations

__all__: list[str] = [
    "CLIP_PEAK",
    "build_corpus",
    "ingest_pairs",
]

from typing import TYPE_CHECKING

import numpy as np
import soundfile as sf
from loguru import logger
from tqdm import tqdm

from scenario_se.data.manifest import ManifestEntry, split_for, write_manifest
from scenario_se.data.synth import NoiseKind, synth_noise, synth_speech
from scenario_se.errors import InvalidInputError, ScenarioSEError
from scenario_se.signal_core import Waveform, estimate_snr_db, mix_at_snr
from scenario_se.wav import read_wav, write_wav

if TYPE_CHECKING:  # pragma: no cover
    from collections.abc import Sequence
    from pathlib import Path

    from scenario_se.data.manifest import Manifest

CLIP_PEAK = 0.99
MANIFEST_NAME = "manifest.jsonl"


def build_corpus(  # noqa: PLR0913
    n_utterances: int,
    snr_range_db: tuple[float, float],
    out_dir: Path,
    seed: int,
    *,
    duration_s: float = 6.0,
    noise_kinds: Sequence[NoiseKind] = tuple(NoiseKind),
) -> Path:
    """Synthesize clean/noisy WAV pairs and their manifest.

    Each utterance mixes synthetic speech with a randomly chosen noise kind at
    an SNR drawn uniformly from `snr_range_db`. When a mixture would clip,
    clean and noisy are scaled by the same factor, which leaves the SNR intact.

    Args:
        n_utterances: Number of pairs.
        snr_range_db: ``(lo, hi)`` SNR range in dB.
        out_dir: Directory receiving ``clean/``, ``noisy/`` and the manifest.
        seed: Corpus seed.
        duration_s: Length of every utterance.
        noise_kinds: Noise kinds to draw from.

    Returns:
        Path of the written manifest.

    Raises:
        InvalidInputError: If ``lo > hi`` or no utterances are requested.
    """
    lo, hi = snr_range_db
    if lo > hi:
        msg = f"empty SNR range ({lo}, {hi})"
        raise InvalidInputError(msg)
    if n_utterances <= 0:
        msg = f"n_utterances must be positive, got {n_utterances}"
        raise InvalidInputError(msg)
    rng = np.random.default_rng(seed)
    entries: list[ManifestEntry] = []
    for i in tqdm(range(n_utterances), desc="synth", unit="utt"):
        uid = f"utt{i:05d}"
        speech_seed, noise_seed = (int(s) for s in rng.integers(0, 2**31, size=2))
        kind = noise_kinds[int(rng.integers(len(noise_kinds)))]
        snr = float(rng.uniform(lo, hi))

        clean = synth_speech(duration_s, speech_seed)
        noisy = mix_at_snr(clean, synth_noise(kind, duration_s, noise_seed), snr)
        peak = float(np.max(np.abs(noisy.samples)))
        if peak > CLIP_PEAK:
            scale = CLIP_PEAK / peak
            clean = Waveform(clean.samples * scale, clean.sample_rate)
            noisy = Waveform(noisy.samples * scale, noisy.sample_rate)

        clean_path = out_dir / "clean" / f"{uid}.wav"
        noisy_path = out_dir / "noisy" / f"{uid}.wav"
        write_wav(clean_path, clean)
        write_wav(noisy_path, noisy)
        entries.append(
            ManifestEntry(
                utterance_id=uid,
                clean_path=clean_path,
                noisy_path=noisy_path,
                snr_db=snr,
                duration_s=clean.duration_s,
                split=split_for(uid),
            ),
        )
        logger.debug("{}: {} noise at {:.2f} dB", uid, kind, snr)
    manifest_path = out_dir / MANIFEST_NAME
    manifest = write_manifest(manifest_path, entries)
    logger.info(
        "Wrote {} utterances to {} (snr_max {:.2f} dB)",
        len(manifest),
        manifest_path,
        manifest.snr_max_db,
    )
    return manifest_path


def ingest_pairs(
    clean_dir: Path,
    noisy_dir: Path,
    out_manifest: Path,
    *,
    strict: bool = True,
) -> Manifest:
    """Build a manifest for an external corpus of same-named clean/noisy WAVs.

    SNRs are estimated from each pair (``None`` when the pair is identical).
    Pairs that are missing a side, unreadable, not mono, at another rate in
    strict mode, or of unequal length are skipped with a warning. In lenient
    mode, resampled copies are written next to the manifest.

    Raises:
        InvalidInputError: If no pair survives validation.
    """
    entries: list[ManifestEntry] = []
    for clean_path in sorted(clean_dir.glob("*.wav")):
        uid = clean_path.stem
        noisy_path = noisy_dir / clean_path.name
        if not noisy_path.is_file():
            logger.warning("Skipping {}: no noisy counterpart", uid)
            continue
        try:
            clean = read_wav(clean_path, strict=strict)
            noisy = read_wav(noisy_path, strict=strict)
        except ScenarioSEError as e:
            logger.warning("Skipping {}: {}", uid, e)
            continue
        if len(clean) != len(noisy):
            logger.warning("Skipping {}: {} != {} samples", uid, len(clean), len(noisy))
            continue
        snr: float | None
        try:
            snr = estimate_snr_db(clean, noisy)
        except InvalidInputError:
            snr = None
        if sf.info(clean_path).samplerate != clean.sample_rate:
            clean_path = out_manifest.parent / "resampled" / "clean" / clean_path.name
            write_wav(clean_path, clean, subtype="FLOAT")
        if sf.info(noisy_path).samplerate != noisy.sample_rate:
            noisy_path = out_manifest.parent / "resampled" / "noisy" / noisy_path.name
            write_wav(noisy_path, noisy, subtype="FLOAT")
        entries.append(
            ManifestEntry(
                utterance_id=uid,
                clean_path=clean_path,
                noisy_path=noisy_path,
                snr_db=snr,
                duration_s=clean.duration_s,
                split=split_for(uid),
            ),
        )
    if not entries:
        msg = f"no usable clean/noisy pairs in {clean_dir} and {noisy_dir}"
        raise InvalidInputError(msg)
    return write_manifest(out_manifest, entries)
