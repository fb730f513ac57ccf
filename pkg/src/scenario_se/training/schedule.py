"""Weak-supervision schedule."""

from __future__ import annotations

__all__: list[str] = [
    "supervision_active",
]

from scenario_se.errors import InvalidInputError


def supervision_active(epoch: int, k_supervised: int) -> bool:
    """Whether division-point labels supervise the splitter in `epoch`.

    Epochs are 1-based and the boundary is inclusive.

    Examples:
        >>> supervision_active(10, 10), supervision_active(11, 10)
        (True, False)
    """
    if epoch < 1:
        msg = f"epochs are 1-based, got {epoch}"
        raise InvalidInputError(msg)
    return epoch <= k_supervised
