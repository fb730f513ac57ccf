"""Batching of manifest entries into magnitude spectrograms."""

from __future__ import annotations

__all__: list[str] = [
    "Batch",
    "Example",
    "batch_iterator",
    "load_example",
    "prefetch",
]

from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import batched
from typing import TYPE_CHECKING

import numpy as np
from loguru import logger

from scenario_se.errors import InvalidInputError
from scenario_se.signal_core import DEFAULT_STFT, estimate_snr_db, magnitude, stft
from scenario_se.wav import read_wav

if TYPE_CHECKING:  # pragma: no cover
    from collections.abc import Callable, Iterable, Iterator, Sequence
    from concurrent.futures import Future

    from scenario_se.data.manifest import ManifestEntry
    from scenario_se.signal_core import FloatArray, StftConfig


@dataclass(frozen=True)
class Example:
    """One utterance as training input."""

    utterance_id: str
    clean_mag: FloatArray
    noisy_mag: FloatArray
    snr_db: float | None


type Batch = list[Example]


def load_example(entry: ManifestEntry, stft_cfg: StftConfig = DEFAULT_STFT) -> Example:
    """Read a pair and transform it to ``[frames, bins]`` magnitudes.

    A missing manifest SNR is estimated from the pair; an identical pair has
    no finite SNR and keeps ``None``.
    """
    clean = read_wav(entry.clean_path)
    noisy = read_wav(entry.noisy_path)
    snr = entry.snr_db
    if snr is None:
        try:
            snr = estimate_snr_db(clean, noisy)
        except InvalidInputError:
            logger.debug("{}: no finite SNR estimate", entry.utterance_id)
    return Example(
        utterance_id=entry.utterance_id,
        clean_mag=magnitude(stft(clean, stft_cfg)),
        noisy_mag=magnitude(stft(noisy, stft_cfg)),
        snr_db=snr,
    )


def prefetch[T, R](
    func: Callable[[T], R],
    items: Iterable[T],
    depth: int = 4,
) -> Iterator[R]:
    """Map `func` over `items` on a worker thread, yielding in input order.

    At most `depth` results are in flight at any time.
    """
    if depth < 1:
        msg = f"depth must be at least 1, got {depth}"
        raise InvalidInputError(msg)
    with ThreadPoolExecutor(max_workers=1) as executor:
        pending: deque[Future[R]] = deque()
        for item in items:
            pending.append(executor.submit(func, item))
            if len(pending) >= depth:
                yield pending.popleft().result()
        while pending:
            yield pending.popleft().result()


def batch_iterator(
    entries: Sequence[ManifestEntry],
    batch_size: int,
    seed: int | np.random.Generator,
    stft_cfg: StftConfig = DEFAULT_STFT,
    *,
    depth: int = 4,
) -> Iterator[Batch]:
    """Yield seeded-shuffled batches; the final short batch is kept.

    There are ``ceil(len(entries) / batch_size)`` batches.

    Args:
        entries: Validated manifest entries.
        batch_size: Utterances per batch.
        seed: Seed, or a generator whose state advances by one permutation.
        stft_cfg: Framing of the magnitudes.
        depth: Utterances loaded ahead on the worker thread.

    Raises:
        InvalidInputError: If there are no entries or `batch_size` < 1.
    """
    if not entries:
        msg = "cannot batch an empty entry list"
        raise InvalidInputError(msg)
    if batch_size < 1:
        msg = f"batch_size must be at least 1, got {batch_size}"
        raise InvalidInputError(msg)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    order = [entries[int(i)] for i in rng.permutation(len(entries))]
    examples = prefetch(lambda e: load_example(e, stft_cfg), order, depth)
    for batch in batched(examples, batch_size):
        yield list(batch)
