"""Shared fixtures: a tiny configuration, corpus and training run."""

from __future__ import annotations

import json
from pathlib import Path
from typing import TYPE_CHECKING, Any

import pytest

from scenario_se.data.corpus import build_corpus
from scenario_se.data.manifest import load_manifest
from scenario_se.training.config import TrainConfig, dump_config
from scenario_se.training.trainer import run_training

if TYPE_CHECKING:  # pragma: no cover
    from collections.abc import Callable

    from scenario_se.data.manifest import Manifest
    from scenario_se.training.trainer import TrainingResult

TINY = TrainConfig(
    fft_size=64,
    hop=32,
    epochs=2,
    k_supervised=1,
    batch_size=4,
    pretrain_epochs=1,
    pretrain_snr_levels_db=(0.0, 10.0),
)

GOLDEN_DIR = Path(__file__).parent / "golden"

type Golden = Callable[[str, dict[str, Any]], dict[str, Any]]


def pytest_addoption(parser: pytest.Parser) -> None:
    """Add ``--update-golden``."""
    parser.addoption(
        "--update-golden",
        action="store_true",
        help="rewrite the recorded values under tests/golden",
    )


@pytest.fixture
def golden(request: pytest.FixtureRequest) -> Golden:
    """Return the recorded value for a name, recording it on first use.

    Files live in ``tests/golden/<name>.json``; ``--update-golden`` rewrites
    them from the current values.
    """
    update = bool(request.config.getoption("--update-golden"))

    def recorded(name: str, value: dict[str, Any]) -> dict[str, Any]:
        path = GOLDEN_DIR / f"{name}.json"
        if update or not path.is_file():
            GOLDEN_DIR.mkdir(exist_ok=True)
            text = json.dumps(value, indent=2, sort_keys=True) + "\n"
            path.write_text(text, encoding="utf-8")
        recorded_value: dict[str, Any] = json.loads(path.read_text(encoding="utf-8"))
        return recorded_value

    return recorded


@pytest.fixture
def tiny_config() -> TrainConfig:
    """Configuration small enough for unit tests."""
    return TINY


@pytest.fixture
def tiny_config_file(tmp_path: Path) -> Path:
    """The tiny configuration as a config file."""
    path = tmp_path / "tiny.conf"
    path.write_text("# unit-test scale\n" + dump_config(TINY), encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def tiny_corpus(tmp_path_factory: pytest.TempPathFactory) -> Manifest:
    """Twelve quarter-second synthetic utterances."""
    out_dir = tmp_path_factory.mktemp("corpus")
    manifest = build_corpus(12, (0.0, 20.0), out_dir, seed=3, duration_s=0.25)
    return load_manifest(manifest)


@pytest.fixture(scope="session")
def tiny_run(
    tmp_path_factory: pytest.TempPathFactory,
    tiny_corpus: Manifest,
) -> TrainingResult:
    """A complete two-epoch training run on the tiny corpus."""
    return run_training(tiny_corpus, TINY, tmp_path_factory.mktemp("run"))
