"""Command-line interface.

Every subcommand accepts ``--config``, ``--seed``, ``--out``, ``--ablation``
and ``--log-level``. Typed errors are logged and end the process with exit
status 1; usage errors exit with status 2.
"""

from __future__ import annotations

__all__: list[str] = [
    "build_parser",
    "main",
]

import argparse
import sys
from pathlib import Path
from typing import TYPE_CHECKING

from loguru import logger

from scenario_se.band_split import DivisionPoint
from scenario_se.data.corpus import build_corpus, ingest_pairs
from scenario_se.data.manifest import Split, load_manifest
from scenario_se.errors import ScenarioSEError
from scenario_se.evaluation import enhance, evaluate, split_inspect
from scenario_se.plotting import plot_triptych
from scenario_se.training.checkpoint import load_checkpoint, save_checkpoint
from scenario_se.training.config import (
    Ablation,
    TrainConfig,
    apply_ablation,
    load_config,
)
from scenario_se.training.log import TrainingLog
from scenario_se.training.pretrain import pretrain_discriminators
from scenario_se.training.trainer import run_training
from scenario_se.wav import read_wav

if TYPE_CHECKING:  # pragma: no cover
    from collections.abc import Sequence

LOG_FORMAT = "<level>{level: <8}</level> {name}:{function} - {message}"


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="flat key = value config file")
    common.add_argument("--seed", type=int, help="override the configured seed")
    common.add_argument(
        "--out",
        type=Path,
        default=Path("runs"),
        help="output directory",
    )
    common.add_argument(
        "--ablation",
        choices=[str(a) for a in Ablation],
        default=str(Ablation.NONE),
        help="configuration preset",
    )
    common.add_argument(
        "--log-level",
        default="INFO",
        choices=["TRACE", "DEBUG", "INFO", "SUCCESS", "WARNING", "ERROR", "CRITICAL"],
    )
    return common


def build_parser() -> argparse.ArgumentParser:
    """Parser with every subcommand."""
    common = _common()
    parser = argparse.ArgumentParser(
        prog="scenario-se",
        description="Speech enhancement with a scenario-aware discriminator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", parents=[common], help="synthesize a corpus")
    synth.add_argument("--n", type=int, default=200, help="number of utterances")
    synth.add_argument("--snr-lo", type=float, default=0.0)
    synth.add_argument("--snr-hi", type=float, default=20.0)
    synth.add_argument(
        "--duration",
        type=float,
        default=6.0,
        help="seconds per utterance",
    )

    ingest = sub.add_parser(
        "ingest",
        parents=[common],
        help="index clean/noisy WAV pairs",
    )
    ingest.add_argument("--clean-dir", type=Path, required=True)
    ingest.add_argument("--noisy-dir", type=Path, required=True)
    ingest.add_argument(
        "--lenient",
        action="store_true",
        help="resample non-16 kHz input",
    )

    pretrain = sub.add_parser(
        "pretrain",
        parents=[common],
        help="pretrain discriminators",
    )
    pretrain.add_argument("--manifest", type=Path, required=True)

    train = sub.add_parser("train", parents=[common], help="adversarial training")
    train.add_argument("--manifest", type=Path, required=True)
    train.add_argument("--pretrained", type=Path, help="checkpoint from 'pretrain'")
    train.add_argument("--resume", type=Path, help="checkpoint of an interrupted run")

    enh = sub.add_parser("enhance", parents=[common], help="enhance one WAV file")
    enh.add_argument("--checkpoint", type=Path, required=True)
    enh.add_argument("in_wav", type=Path)
    enh.add_argument("out_wav", type=Path)

    ev = sub.add_parser("eval", parents=[common], help="write a metrics report")
    ev.add_argument("--manifest", type=Path, required=True)
    ev.add_argument(
        "--checkpoint",
        type=Path,
        help="omit to score the identity enhancer",
    )
    ev.add_argument("--split", choices=[*(str(s) for s in Split), "all"], default="val")
    ev.add_argument("--report", type=Path, help="defaults to <out>/report.json")

    split = sub.add_parser("split", parents=[common], help="tabulate division points")
    split.add_argument("--manifest", type=Path, required=True)
    split.add_argument("--checkpoint", type=Path)
    split.add_argument("--table", type=Path, help="defaults to <out>/split.csv")

    plot = sub.add_parser(
        "plot",
        parents=[common],
        help="render a spectrogram triptych",
    )
    plot.add_argument("noisy", type=Path)
    plot.add_argument("enhanced", type=Path)
    plot.add_argument("enhanced_sad", type=Path)
    plot.add_argument(
        "--division-bin",
        type=int,
        help="draw a division line at this bin",
    )
    plot.add_argument("--image", type=Path, help="defaults to <out>/triptych.png")
    return parser


def _configure_logging(level: str) -> None:
    logger.remove()
    logger.add(sys.stderr, level=level, format=LOG_FORMAT)
    logger.enable("scenario_se")


def _config(args: argparse.Namespace) -> TrainConfig:
    overrides = {} if args.seed is None else {"seed": str(args.seed)}
    return apply_ablation(load_config(args.config, overrides), args.ablation)


def _run(args: argparse.Namespace) -> None:  # noqa: C901
    config = _config(args)
    out: Path = args.out
    match args.command:
        case "synth":
            build_corpus(
                args.n,
                (args.snr_lo, args.snr_hi),
                out,
                config.seed,
                duration_s=args.duration,
            )
        case "ingest":
            ingest_pairs(
                args.clean_dir,
                args.noisy_dir,
                out / "manifest.jsonl",
                strict=not args.lenient,
            )
        case "pretrain":
            manifest = load_manifest(args.manifest)
            with TrainingLog(out / "pretrain_log.jsonl") as log:
                ckpt = pretrain_discriminators(manifest, config, log=log)
            save_checkpoint(out / "pretrain.ckpt", ckpt)
        case "train":
            manifest = load_manifest(args.manifest)
            pretrained = None
            if args.pretrained is not None:
                pretrained = load_checkpoint(args.pretrained)
            result = run_training(
                manifest,
                config,
                out,
                pretrained=pretrained,
                resume=args.resume,
            )
            logger.info("Final checkpoint {}", result.checkpoint_path)
        case "enhance":
            enhance(args.checkpoint, args.in_wav, args.out_wav)
        case "eval":
            manifest = load_manifest(args.manifest)
            evaluate(
                args.checkpoint,
                manifest,
                args.report or out / "report.json",
                split=None if args.split == "all" else Split(args.split),
                label=None if args.checkpoint else str(config.ablation),
                config=config,
            )
        case "split":
            split_inspect(
                load_manifest(args.manifest),
                args.table or out / "split.csv",
                args.checkpoint,
                config,
            )
        case "plot":
            noisy = read_wav(args.noisy)
            division = None
            if args.division_bin is not None:
                division = DivisionPoint(bin=args.division_bin, bins=config.bins)
            plot_triptych(
                noisy,
                read_wav(args.enhanced),
                read_wav(args.enhanced_sad),
                args.image or out / "triptych.png",
                division=division,
                stft_cfg=config.stft_config,
            )


def main(argv: Sequence[str] | None = None) -> int:
    """Run the command line; returns the exit status."""
    args = build_parser().parse_args(argv)
    _configure_logging(args.log_level)
    try:
        _run(args)
    except ScenarioSEError as e:
        logger.error("{}: {}", type(e).__name__, e)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
