"""Deterministic binary checkpoints.

Layout::

    b"SADCKPT1"                      magic
    uint32 little-endian             header length in bytes
    header                           UTF-8 JSON, sorted keys
    payload                          raw row-major tensor bytes

The header maps every tensor name to its dtype, shape, payload offset and
byte count, and carries the epoch, the configuration hash, the shuffling RNG
state and free-form metadata. Tensors are stored in name order and nothing
time-dependent is written, so saving a loaded checkpoint reproduces the file
byte for byte.

Model parameters are stored as ``<model>.<parameter>``; optimizer moments as
``optim.<optimizer>.<index>.<key>``.
"""

from __future__ import annotations

__all__: list[str] = [
    "MAGIC",
    "Checkpoint",
    "checkpoint_id",
    "load_checkpoint",
    "save_checkpoint",
]

import json
from dataclasses import dataclass, field
from struct import pack, unpack
from typing import TYPE_CHECKING, Any

import numpy as np
import torch

from scenario_se.errors import CheckpointError
from scenario_se.utils import stable_hash

if TYPE_CHECKING:  # pragma: no cover
    from collections.abc import Mapping
    from pathlib import Path

    from torch.optim import Optimizer

    from scenario_se.nets import ModelSet

MAGIC = b"SADCKPT1"
_LENGTH = "<I"
_OPTIM_PREFIX = "optim."


@dataclass
class Checkpoint:
    """Named arrays plus the scalars needed to resume."""

    tensors: dict[str, np.ndarray] = field(default_factory=dict)
    epoch: int = 0
    config_hash: str = ""
    rng_state: dict[str, Any] | None = None
    metadata: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def capture(  # noqa: PLR0913
        cls,
        models: ModelSet,
        optimizers: Mapping[str, Optimizer] | None = None,
        *,
        epoch: int,
        config_hash: str,
        rng: np.random.Generator | None = None,
        metadata: Mapping[str, Any] | None = None,
    ) -> Checkpoint:
        """Snapshot models, optimizer moments and the shuffling RNG."""
        tensors: dict[str, np.ndarray] = {}
        for model_name, model in models.named_models().items():
            for name, tensor in model.state_dict().items():
                tensors[f"{model_name}.{name}"] = _to_numpy(tensor)
        for opt_name, optimizer in (optimizers or {}).items():
            for index, state in optimizer.state_dict()["state"].items():
                for key, value in state.items():
                    tensors[f"{_OPTIM_PREFIX}{opt_name}.{index}.{key}"] = _to_numpy(
                        torch.as_tensor(value),
                    )
        return cls(
            tensors=tensors,
            epoch=epoch,
            config_hash=config_hash,
            rng_state=None if rng is None else rng.bit_generator.state,
            metadata=dict(metadata or {}),
        )

    def restore_models(self, models: ModelSet) -> None:
        """Load parameters into `models`.

        Raises:
            CheckpointError: If a parameter is missing or has another shape.
        """
        for model_name, model in models.named_models().items():
            prefix = f"{model_name}."
            state = {
                name[len(prefix) :]: torch.from_numpy(array.copy())
                for name, array in self.tensors.items()
                if name.startswith(prefix)
            }
            try:
                model.load_state_dict(state, strict=True)
            except RuntimeError as e:
                msg = f"checkpoint does not fit model {model_name}: {e}"
                raise CheckpointError(msg) from e

    def restore_optimizers(self, optimizers: Mapping[str, Optimizer]) -> None:
        """Load optimizer moments; hyperparameters come from the optimizers."""
        for opt_name, optimizer in optimizers.items():
            prefix = f"{_OPTIM_PREFIX}{opt_name}."
            state: dict[int, dict[str, torch.Tensor]] = {}
            for name, array in self.tensors.items():
                if name.startswith(prefix):
                    index, key = name[len(prefix) :].split(".", 1)
                    tensor = torch.from_numpy(array.copy())
                    state.setdefault(int(index), {})[key] = tensor
            state_dict = optimizer.state_dict()
            state_dict["state"] = state
            optimizer.load_state_dict(state_dict)

    def restore_rng(self) -> np.random.Generator:
        """The shuffling generator at the captured state.

        Raises:
            CheckpointError: If no RNG state was captured.
        """
        if self.rng_state is None:
            msg = "checkpoint holds no RNG state"
            raise CheckpointError(msg)
        rng = np.random.default_rng()
        rng.bit_generator.state = self.rng_state
        return rng


def _to_numpy(tensor: torch.Tensor) -> np.ndarray:
    return np.array(tensor.detach().cpu().numpy(), order="C", copy=True)


def _encode(ckpt: Checkpoint) -> bytes:
    entries: dict[str, dict[str, Any]] = {}
    chunks: list[bytes] = []
    offset = 0
    for name in sorted(ckpt.tensors):
        array = np.asarray(ckpt.tensors[name], order="C")
        data = array.tobytes(order="C")
        entries[name] = {
            "dtype": array.dtype.str,
            "shape": list(array.shape),
            "offset": offset,
            "nbytes": len(data),
        }
        chunks.append(data)
        offset += len(data)
    header = json.dumps(
        {
            "config_hash": ckpt.config_hash,
            "epoch": ckpt.epoch,
            "metadata": ckpt.metadata,
            "rng_state": ckpt.rng_state,
            "tensors": entries,
        },
        sort_keys=True,
        separators=(",", ":"),
    ).encode("utf-8")
    return MAGIC + pack(_LENGTH, len(header)) + header + b"".join(chunks)


def save_checkpoint(path: Path, ckpt: Checkpoint) -> str:
    """Write a checkpoint and return its id."""
    data = _encode(ckpt)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(data)
    return stable_hash(data.hex())


def load_checkpoint(path: Path) -> Checkpoint:
    """Read a checkpoint written by `save_checkpoint`.

    Raises:
        CheckpointError: If the file is missing, foreign or truncated.
    """
    try:
        data = path.read_bytes()
    except OSError as e:
        msg = f"cannot read checkpoint {path}: {e}"
        raise CheckpointError(msg) from e
    prefix = len(MAGIC) + 4
    if len(data) < prefix or not data.startswith(MAGIC):
        msg = f"{path} is not a checkpoint"
        raise CheckpointError(msg)
    (length,) = unpack(_LENGTH, data[len(MAGIC) : prefix])
    try:
        header = json.loads(data[prefix : prefix + length].decode("utf-8"))
        payload = memoryview(data)[prefix + length :]
        tensors = {
            name: np.frombuffer(
                payload[entry["offset"] : entry["offset"] + entry["nbytes"]],
                dtype=np.dtype(entry["dtype"]),
            )
            .reshape(entry["shape"])
            .copy()
            for name, entry in header["tensors"].items()
        }
    except (UnicodeDecodeError, ValueError, KeyError, TypeError) as e:
        msg = f"corrupt checkpoint {path}: {e}"
        raise CheckpointError(msg) from e
    return Checkpoint(
        tensors=tensors,
        epoch=int(header["epoch"]),
        config_hash=str(header["config_hash"]),
        rng_state=header["rng_state"],
        metadata=dict(header["metadata"]),
    )


def checkpoint_id(path: Path) -> str:
    """Content digest of a checkpoint file."""
    try:
        return stable_hash(path.read_bytes().hex())
    except OSError as e:
        msg = f"cannot read checkpoint {path}: {e}"
        raise CheckpointError(msg) from e
