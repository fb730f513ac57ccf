"""Newline-delimited JSON training log.

Records are written with sorted keys and without timestamps so identical runs
produce identical files. Every record has a ``kind``: ``pretrain`` (one per
discriminator and pretraining epoch), ``step`` (one per training step) or
``epoch`` (division-point statistics after each epoch).
"""

from __future__ import annotations

__all__: list[str] = [
    "TrainingLog",
    "read_log",
]

import json
from typing import TYPE_CHECKING, Any, Self

from scenario_se.errors import InvalidInputError

if TYPE_CHECKING:  # pragma: no cover
    from collections.abc import Callable, Mapping
    from pathlib import Path
    from types import TracebackType


class TrainingLog:
    """Append-only writer of log records."""

    def __init__(self, path: Path) -> None:
        """Open (and create) the log at `path`."""
        path.parent.mkdir(parents=True, exist_ok=True)
        self.path = path
        self._file = path.open("a", encoding="utf-8")

    def write(self, kind: str, **fields: Any) -> None:  # noqa: ANN401
        """Append one record."""
        record = {"kind": kind, **fields}
        self._file.write(json.dumps(record, sort_keys=True, allow_nan=False) + "\n")
        self._file.flush()

    def close(self) -> None:
        """Close the file."""
        self._file.close()

    def __enter__(self) -> Self:
        """Use as a context manager."""
        return self

    def __exit__(
        self,
        exc_type: type[BaseException] | None,
        exc: BaseException | None,
        tb: TracebackType | None,
    ) -> None:
        """Close on exit."""
        self.close()

    @classmethod
    def truncated(
        cls,
        path: Path,
        keep: Callable[[Mapping[str, Any]], bool],
    ) -> TrainingLog:
        """Reopen an existing log keeping only the records `keep` accepts."""
        if path.is_file():
            kept = [
                json.dumps(record, sort_keys=True, allow_nan=False) + "\n"
                for record in read_log(path)
                if keep(record)
            ]
            path.write_text("".join(kept), encoding="utf-8")
        return cls(path)


def read_log(path: Path) -> list[dict[str, Any]]:
    """Parse every record of a log.

    Raises:
        InvalidInputError: If a line is not a JSON object.
    """
    records: list[dict[str, Any]] = []
    for number, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as e:
            msg = f"{path}:{number}: {e}"
            raise InvalidInputError(msg) from e
        if not isinstance(record, dict):
            msg = f"{path}:{number}: expected an object"
            raise InvalidInputError(msg)
        records.append(record)
    return records
