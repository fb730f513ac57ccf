"""Utterance manifests (newline-delimited JSON).

The first line is a header record (``kind="header"``) holding ``snr_max_db``
and the sample rate; every further line describes one utterance
(``kind="utterance"``) with the fields of `ManifestEntry`. Paths are stored
relative to the manifest's directory.
"""

from __future__ import annotations

__all__: list[str] = [
    "Manifest",
    "ManifestEntry",
    "Split",
    "load_manifest",
    "split_for",
    "write_manifest",
]

import json
import os
from dataclasses import dataclass
from enum import StrEnum
from pathlib import Path
from typing import TYPE_CHECKING

import soundfile as sf

from scenario_se.errors import ManifestError
from scenario_se.signal_core import SAMPLE_RATE
from scenario_se.utils import stable_hash

if TYPE_CHECKING:  # pragma: no cover
    from collections.abc import Iterator, Sequence


class Split(StrEnum):
    """Corpus partitions."""

    TRAIN = "train"
    VAL = "val"
    TEST = "test"


def split_for(utterance_id: str) -> Split:
    """Assign an utterance to train/val/test (80/10/10) by its id hash."""
    bucket = int(stable_hash(utterance_id, 8), 16) % 10
    if bucket < 8:  # noqa: PLR2004
        return Split.TRAIN
    return Split.VAL if bucket == 8 else Split.TEST  # noqa: PLR2004


@dataclass(frozen=True)
class ManifestEntry:
    """One clean/noisy pair."""

    utterance_id: str
    clean_path: Path
    noisy_path: Path
    snr_db: float | None
    duration_s: float
    split: Split


@dataclass(frozen=True)
class Manifest:
    """Validated entries and the corpus-wide maximum SNR."""

    entries: tuple[ManifestEntry, ...]
    snr_max_db: float

    def __iter__(self) -> Iterator[ManifestEntry]:
        """Iterate entries in file order."""
        return iter(self.entries)

    def __len__(self) -> int:
        """Number of entries."""
        return len(self.entries)

    def select(self, split: Split) -> list[ManifestEntry]:
        """Entries of one partition."""
        return [e for e in self.entries if e.split is split]


def _snr_max(entries: Sequence[ManifestEntry]) -> float:
    recorded = [e.snr_db for e in entries if e.snr_db is not None]
    return max(recorded, default=0.0)


def write_manifest(path: Path, entries: Sequence[ManifestEntry]) -> Manifest:
    """Write a manifest and return it."""
    root = path.parent
    path.parent.mkdir(parents=True, exist_ok=True)
    manifest = Manifest(entries=tuple(entries), snr_max_db=_snr_max(entries))
    lines = [
        json.dumps(
            {
                "kind": "header",
                "n": len(entries),
                "sample_rate": SAMPLE_RATE,
                "snr_max_db": manifest.snr_max_db,
            },
            sort_keys=True,
        ),
    ]
    lines.extend(
        json.dumps(
            {
                "kind": "utterance",
                "utterance_id": e.utterance_id,
                "clean_path": Path(os.path.relpath(e.clean_path, root)).as_posix(),
                "noisy_path": Path(os.path.relpath(e.noisy_path, root)).as_posix(),
                "snr_db": e.snr_db,
                "duration_s": e.duration_s,
                "split": str(e.split),
            },
            sort_keys=True,
        )
        for e in entries
    )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return manifest


def _validate_entry(entry: ManifestEntry) -> str | None:
    for label, file in (("clean", entry.clean_path), ("noisy", entry.noisy_path)):
        if not file.is_file():
            return f"{label} file {file} does not exist"
    try:
        clean = sf.info(entry.clean_path)
        noisy = sf.info(entry.noisy_path)
    except (sf.LibsndfileError, RuntimeError) as e:
        return f"unreadable audio: {e}"
    for label, info in (("clean", clean), ("noisy", noisy)):
        if info.channels != 1:
            return f"{label} file has {info.channels} channels, expected mono"
        if info.samplerate != SAMPLE_RATE:
            return f"{label} file is {info.samplerate} Hz, expected {SAMPLE_RATE} Hz"
    if clean.frames != noisy.frames:
        return f"length mismatch: clean {clean.frames} != noisy {noisy.frames} samples"
    return None


def load_manifest(path: Path, *, validate: bool = True) -> Manifest:
    """Read a manifest, checking every entry.

    Raises:
        ManifestError: Listing every entry that is malformed, missing a file,
            not mono 16 kHz, or whose clean and noisy lengths differ.
    """
    if not path.is_file():
        raise ManifestError([("<manifest>", f"{path} does not exist")])
    root = path.parent
    entries: list[ManifestEntry] = []
    problems: list[tuple[str, str]] = []
    header_snr_max: float | None = None
    for number, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        where = f"<line {number}>"
        try:
            record = json.loads(line)
        except json.JSONDecodeError as e:
            problems.append((where, f"malformed record: {e.msg}"))
            continue
        if not isinstance(record, dict):
            kind = type(record).__name__
            problems.append((where, f"malformed record: a JSON {kind}, not an object"))
            continue
        if record.get("kind") == "header":
            try:
                header_snr_max = float(record["snr_max_db"])
            except (KeyError, ValueError, TypeError) as e:
                problems.append((where, f"malformed header: {e!r}"))
            continue
        uid = str(record.get("utterance_id", where))
        try:
            snr_db = record.get("snr_db")
            entry = ManifestEntry(
                utterance_id=uid,
                clean_path=root / record["clean_path"],
                noisy_path=root / record["noisy_path"],
                snr_db=None if snr_db is None else float(snr_db),
                duration_s=float(record["duration_s"]),
                split=Split(record.get("split") or split_for(uid)),
            )
        except (KeyError, ValueError, TypeError) as e:
            problems.append((uid, f"malformed record: {e!r}"))
            continue
        if validate and (reason := _validate_entry(entry)) is not None:
            problems.append((uid, reason))
            continue
        entries.append(entry)
    if problems:
        raise ManifestError(problems)
    snr_max = _snr_max(entries) if header_snr_max is None else header_snr_max
    return Manifest(entries=tuple(entries), snr_max_db=snr_max)
