"""Tests for `scenario_se.training.log`."""

from __future__ import annotations

import math
from typing import TYPE_CHECKING

import pytest

from scenario_se.errors import InvalidInputError
from scenario_se.training.log import TrainingLog, read_log

if TYPE_CHECKING:  # pragma: no cover
    from pathlib import Path


def test_write_read(tmp_path: Path) -> None:
    """Test records, key order and appending."""
    path = tmp_path / "logs" / "train.jsonl"
    with TrainingLog(path) as log:
        log.write("step", epoch=1, loss_g=0.5)
    with TrainingLog(path) as log:
        log.write("epoch", epoch=1, m_mean=0.3)
    assert path.read_text(encoding="utf-8").splitlines()[0] == (
        '{"epoch": 1, "kind": "step", "loss_g": 0.5}'
    )
    assert read_log(path) == [
        {"epoch": 1, "kind": "step", "loss_g": 0.5},
        {"epoch": 1, "kind": "epoch", "m_mean": 0.3},
    ]


def test_non_finite_rejected(tmp_path: Path) -> None:
    """Test that NaN values are not written."""
    with (
        TrainingLog(tmp_path / "a.jsonl") as log,
        pytest.raises(ValueError, match="JSON"),
    ):
        log.write("step", loss_g=math.nan)


def test_truncated(tmp_path: Path) -> None:
    """Test that only accepted records survive reopening."""
    path = tmp_path / "a.jsonl"
    with TrainingLog(path) as log:
        for epoch in (1, 2, 3):
            log.write("epoch", epoch=epoch)
    with TrainingLog.truncated(path, lambda r: r["epoch"] <= 1) as log:
        log.write("epoch", epoch=2)
    assert [r["epoch"] for r in read_log(path)] == [1, 2]


def test_truncated_new_file(tmp_path: Path) -> None:
    """Test that truncating an absent log starts a new one."""
    path = tmp_path / "new.jsonl"
    with TrainingLog.truncated(path, lambda _: True) as log:
        log.write("epoch", epoch=1)
    assert read_log(path) == [{"epoch": 1, "kind": "epoch"}]


@pytest.mark.parametrize("line", ["{broken", "[1, 2]"])
def test_read_rejects(tmp_path: Path, line: str) -> None:
    """Test lines that are not JSON objects."""
    path = tmp_path / "a.jsonl"
    path.write_text('{"kind": "step"}\n\n' + line + "\n", encoding="utf-8")
    with pytest.raises(InvalidInputError):
        read_log(path)
