"""Enhancement, metric reports and division-point inspection.

Reports use proxy metrics: SI-SDR and segmental-SNR improvements over the
noisy input, and the BAK/SIG/OVL proxies of the enhanced speech against the
clean reference, split at the clean utterance's oracle division point. The
named columns ``pesq``, ``stoi``, ``csig``, ``cbak`` and ``covl`` are left
empty for externally computed scores.
"""

from __future__ import annotations

__all__: list[str] = [
    "EXTERNAL_COLUMNS",
    "Enhancer",
    "MetricsReport",
    "SplitRow",
    "aggregate",
    "enhance",
    "enhance_waveform",
    "evaluate",
    "generator_enhancer",
    "identity_enhancer",
    "load_models",
    "split_inspect",
]

import csv
import json
from dataclasses import asdict, dataclass, field
from statistics import fmean, median
from typing import TYPE_CHECKING, Any

import numpy as np
import torch
from loguru import logger

from scenario_se.band_split import DivisionPoint, dfkd_division_point
from scenario_se.data.loading import prefetch
from scenario_se.errors import CheckpointError, ScenarioSEError
from scenario_se.mos_oracle import score_utterance
from scenario_se.nets import DTYPE, build_models
from scenario_se.signal_core import (
    Spectrogram,
    Waveform,
    istft,
    magnitude,
    segmental_snr,
    si_sdr,
    stft,
)
from scenario_se.training.checkpoint import checkpoint_id, load_checkpoint
from scenario_se.training.config import TrainConfig, config_hash, parse_config
from scenario_se.wav import read_wav, write_wav

if TYPE_CHECKING:  # pragma: no cover
    from collections.abc import Callable, Sequence
    from pathlib import Path
    from typing import Literal

    from scenario_se.data.manifest import Manifest, ManifestEntry, Split
    from scenario_se.nets import ModelSet
    from scenario_se.signal_core import FloatArray, StftConfig

EXTERNAL_COLUMNS = ("pesq", "stoi", "csig", "cbak", "covl")
METRIC_COLUMNS = (
    "si_sdr_noisy",
    "si_sdr_enhanced",
    "si_sdr_improvement",
    "segsnr_noisy",
    "segsnr_enhanced",
    "segsnr_improvement",
    "bak",
    "sig",
    "ovl",
    "m_label_hz",
    "m_hat_hz",
)

type Enhancer = Callable[[FloatArray], FloatArray]
"""Maps ``[frames, bins]`` noisy magnitudes to enhanced magnitudes."""


def load_models(path: Path) -> tuple[ModelSet, TrainConfig, str]:
    """Rebuild the models stored in a checkpoint.

    Returns:
        The models, the configuration they were trained with, and the
        checkpoint id.

    Raises:
        CheckpointError: If the checkpoint is unreadable or lacks its
            configuration.
    """
    ckpt = load_checkpoint(path)
    text = ckpt.metadata.get("config")
    if not isinstance(text, str):
        msg = f"{path} does not record its configuration"
        raise CheckpointError(msg)
    config = parse_config(text)
    models = build_models(config.bins, config.seed, config.generator)
    ckpt.restore_models(models)
    return models, config, checkpoint_id(path)


def identity_enhancer(noisy_mag: FloatArray) -> FloatArray:
    """Return the noisy magnitudes unchanged."""
    return noisy_mag


def generator_enhancer(models: ModelSet) -> Enhancer:
    """Wrap a generator as a numpy enhancer."""

    def run(noisy_mag: FloatArray) -> FloatArray:
        with torch.no_grad():
            return models.generator(torch.from_numpy(noisy_mag).to(DTYPE)).numpy()

    return run


def enhance_waveform(
    wave: Waveform,
    enhancer: Enhancer,
    stft_cfg: StftConfig,
) -> Waveform:
    """Replace the magnitudes of `wave` and resynthesize with the noisy phase.

    The output has exactly as many samples as the input.
    """
    spec = stft(wave, stft_cfg)
    enhanced_mag = enhancer(magnitude(spec))
    phase = np.exp(1j * np.angle(spec.values))
    enhanced = Spectrogram(enhanced_mag * phase, stft_cfg, wave.sample_rate)
    return istft(enhanced, length=len(wave))


def enhance(
    checkpoint: Path,
    in_wav: Path,
    out_wav: Path,
    subtype: Literal["PCM_16", "FLOAT", "DOUBLE"] = "FLOAT",
) -> Path:
    """Enhance one WAV file with a trained generator.

    Raises:
        CheckpointError: If the checkpoint cannot be used.
        WavFormatError: If the input is not mono 16 kHz audio.
    """
    models, config, _ = load_models(checkpoint)
    wave = read_wav(in_wav)
    enhanced = enhance_waveform(wave, generator_enhancer(models), config.stft_config)
    write_wav(out_wav, enhanced, subtype=subtype)
    logger.info("Enhanced {} -> {}", in_wav, out_wav)
    return out_wav


def aggregate(rows: Sequence[dict[str, Any]]) -> dict[str, dict[str, float | None]]:
    """Mean and median of every metric column over the rows that have it."""
    result: dict[str, dict[str, float | None]] = {}
    for column in METRIC_COLUMNS:
        values = [float(r[column]) for r in rows if r.get(column) is not None]
        result[column] = {
            "mean": fmean(values) if values else None,
            "median": median(values) if values else None,
            "n": len(values),
        }
    return result


@dataclass
class MetricsReport:
    """Per-utterance rows, their aggregates, and the identity-enhancer floor."""

    config_hash: str | None
    checkpoint_id: str | None
    label: str
    rows: list[dict[str, Any]]
    identity_rows: list[dict[str, Any]]
    aggregates: dict[str, dict[str, float | None]] = field(init=False)
    identity_aggregates: dict[str, dict[str, float | None]] = field(init=False)

    def __post_init__(self) -> None:
        """Aggregate the rows."""
        self.aggregates = aggregate(self.rows)
        self.identity_aggregates = aggregate(self.identity_rows)

    def to_json(self) -> str:
        """Serialize with sorted keys."""
        return json.dumps(asdict(self), sort_keys=True, indent=2)

    def write(self, path: Path) -> Path:
        """Write the JSON report."""
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_json() + "\n", encoding="utf-8")
        return path

    @classmethod
    def read(cls, path: Path) -> MetricsReport:
        """Read a report written by `write`; aggregates are recomputed."""
        data = json.loads(path.read_text(encoding="utf-8"))
        return cls(
            config_hash=data["config_hash"],
            checkpoint_id=data["checkpoint_id"],
            label=data["label"],
            rows=data["rows"],
            identity_rows=data["identity_rows"],
        )


def _row(
    entry: ManifestEntry,
    enhancer: Enhancer,
    config: TrainConfig,
    models: ModelSet | None,
) -> dict[str, Any]:
    row: dict[str, Any] = {
        "utterance_id": entry.utterance_id,
        "snr_db": entry.snr_db,
        "error": None,
    }
    row.update(dict.fromkeys(METRIC_COLUMNS))
    row.update(dict.fromkeys(EXTERNAL_COLUMNS))
    try:
        clean = read_wav(entry.clean_path)
        noisy = read_wav(entry.noisy_path)
        cfg = config.stft_config
        if enhancer is identity_enhancer:
            enhanced = noisy
        else:
            enhanced = enhance_waveform(noisy, enhancer, cfg)
        clean_mag = magnitude(stft(clean, cfg))
        noisy_mag = magnitude(stft(noisy, cfg))
        enhanced_mag = magnitude(stft(enhanced, cfg))
        label = dfkd_division_point(
            clean_mag,
            config.search_lo_hz,
            config.search_hi_hz,
            smoothing_width=config.smoothing_width,
        )
        scores = score_utterance(clean_mag, enhanced_mag, label)
        row.update(
            si_sdr_noisy=si_sdr(clean, noisy),
            si_sdr_enhanced=si_sdr(clean, enhanced),
            segsnr_noisy=segmental_snr(clean, noisy),
            segsnr_enhanced=segmental_snr(clean, enhanced),
            bak=scores.bak,
            sig=scores.sig,
            ovl=scores.ovl,
            m_label_hz=label.hz(),
        )
        row["si_sdr_improvement"] = row["si_sdr_enhanced"] - row["si_sdr_noisy"]
        row["segsnr_improvement"] = row["segsnr_enhanced"] - row["segsnr_noisy"]
        if models is not None:
            with torch.no_grad():
                fraction = models.splitter(
                    torch.from_numpy(noisy_mag).to(DTYPE),
                    torch.from_numpy(enhancer(noisy_mag)).to(DTYPE),
                )
            m_hat = DivisionPoint.from_fraction(float(fraction), label.bins)
            row["m_hat_hz"] = m_hat.hz()
    except ScenarioSEError as e:
        logger.warning("Evaluation of {} failed: {}", entry.utterance_id, e)
        row["error"] = str(e)
    return row


def evaluate(  # noqa: PLR0913
    checkpoint: Path | None,
    manifest: Manifest,
    out_report: Path,
    *,
    split: Split | None = None,
    label: str | None = None,
    config: TrainConfig | None = None,
) -> MetricsReport:
    """Enhance every entry, score it, and write the report.

    Args:
        checkpoint: Trained checkpoint; `None` evaluates the identity
            enhancer only.
        manifest: Corpus with clean references.
        out_report: JSON report path.
        split: Partition to evaluate; all entries when `None`.
        label: Report label; defaults to the configuration's ablation name.
        config: Framing and oracle settings when no checkpoint is given.

    Returns:
        The report. Failed entries are kept as rows with an ``error``.
    """
    models: ModelSet | None = None
    ckpt_id: str | None = None
    if checkpoint is not None:
        models, config, ckpt_id = load_models(checkpoint)
    config = config or TrainConfig()
    entries = list(manifest) if split is None else manifest.select(split)

    enhancer = identity_enhancer if models is None else generator_enhancer(models)
    rows = list(prefetch(lambda e: _row(e, enhancer, config, models), entries))
    identity_rows = list(
        prefetch(lambda e: _row(e, identity_enhancer, config, None), entries),
    )
    report = MetricsReport(
        config_hash=config_hash(config) if checkpoint is not None else None,
        checkpoint_id=ckpt_id,
        label=label or str(config.ablation),
        rows=rows,
        identity_rows=identity_rows,
    )
    report.write(out_report)
    improvement = report.aggregates["si_sdr_improvement"]["median"]
    logger.info(
        "Wrote {} ({} rows, median SI-SDR improvement {})",
        out_report,
        len(rows),
        improvement,
    )
    return report


@dataclass(frozen=True)
class SplitRow:
    """Oracle (and optionally predicted) division point of one utterance."""

    utterance_id: str
    split: str
    m_bin: int
    m_hz: float
    fallback: bool
    m_hat_bin: int | None = None
    m_hat_hz: float | None = None
    abs_error_fraction: float | None = None


def split_inspect(
    manifest: Manifest,
    out_table: Path,
    checkpoint: Path | None = None,
    config: TrainConfig | None = None,
) -> list[SplitRow]:
    """Tabulate oracle division points, plus the splitter's predictions.

    Writes a CSV with one row per utterance.
    """
    models: ModelSet | None = None
    if checkpoint is not None:
        models, config, _ = load_models(checkpoint)
    config = config or TrainConfig()
    cfg = config.stft_config
    rows: list[SplitRow] = []
    for entry in manifest:
        clean_mag = magnitude(stft(read_wav(entry.clean_path), cfg))
        point = dfkd_division_point(
            clean_mag,
            config.search_lo_hz,
            config.search_hi_hz,
            smoothing_width=config.smoothing_width,
        )
        row = SplitRow(
            utterance_id=entry.utterance_id,
            split=str(entry.split),
            m_bin=point.bin,
            m_hz=point.hz(),
            fallback=point.fallback,
        )
        if models is not None:
            noisy = read_wav(entry.noisy_path)
            noisy_mag = torch.from_numpy(magnitude(stft(noisy, cfg)))
            with torch.no_grad():
                enhanced_mag = models.generator(noisy_mag)
                fraction = float(models.splitter(noisy_mag, enhanced_mag))
            predicted = DivisionPoint.from_fraction(fraction, point.bins)
            row = SplitRow(
                **{
                    **asdict(row),
                    "m_hat_bin": predicted.bin,
                    "m_hat_hz": predicted.hz(),
                    "abs_error_fraction": abs(fraction - point.fraction),
                },
            )
        rows.append(row)

    out_table.parent.mkdir(parents=True, exist_ok=True)
    with out_table.open("w", encoding="utf-8", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=list(SplitRow.__dataclass_fields__))
        writer.writeheader()
        writer.writerows(asdict(r) for r in rows)
    logger.info("Wrote {} division points to {}", len(rows), out_table)
    return rows
