"""Reference-based MOS proxies for background, signal and overall quality.

These deterministic scores stand in for a pretrained non-intrusive MOS
predictor: they supply the regression targets of the band discriminators.
Every proxy consumes magnitude matrices of any shape, so bands of any width
can be scored.
"""

from __future__ import annotations

__all__: list[str] = [
    "MOS_MAX",
    "MOS_MIN",
    "MosScores",
    "ProxyCalibration",
    "bak_proxy",
    "ovl_proxy",
    "score_utterance",
    "sig_proxy",
]

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
import torch
from scipy.special import expit

from scenario_se.band_split import hard_split
from scenario_se.errors import InvalidInputError

if TYPE_CHECKING:  # pragma: no cover
    from collections.abc import Iterator

    from scenario_se.band_split import DivisionPoint
    from scenario_se.signal_core import FloatArray

MOS_MIN = 1.0
MOS_MAX = 5.0

BAK_EPSILON = 1e-10
SIG_EPSILON = 1e-5


@dataclass(frozen=True)
class ProxyCalibration:
    """Logistic calibration of the proxies."""

    bak_center_db: float = 15.0
    bak_scale_db: float = 10.0
    sig_center: float = 0.5
    sig_scale: float = 0.2
    ovl_bak_weight: float = 0.5


DEFAULT_CALIBRATION = ProxyCalibration()


@dataclass(frozen=True)
class MosScores[T: (float, torch.Tensor)]:
    """BAK, SIG and OVL on the MOS scale.

    Holds either oracle targets (floats in ``[1, 5]``) or discriminator
    predictions (tensors).
    """

    bak: T
    sig: T
    ovl: T

    def __post_init__(self) -> None:
        """Check float scores against the MOS range."""
        for name, value in (("bak", self.bak), ("sig", self.sig), ("ovl", self.ovl)):
            if isinstance(value, float) and not MOS_MIN <= value <= MOS_MAX:
                msg = f"{name} score {value} outside [{MOS_MIN}, {MOS_MAX}]"
                raise InvalidInputError(msg)

    def __iter__(self) -> Iterator[T]:
        """Iterate in ``(bak, sig, ovl)`` order."""
        return iter((self.bak, self.sig, self.ovl))


def _mos(x: float) -> float:
    return float(np.clip(MOS_MIN + (MOS_MAX - MOS_MIN) * expit(x), MOS_MIN, MOS_MAX))


def _require_same_shape(reference: FloatArray, signal: FloatArray) -> None:
    if reference.shape != signal.shape:
        msg = f"shape mismatch: {reference.shape} != {signal.shape}"
        raise InvalidInputError(msg)
    if reference.size == 0:
        msg = "cannot score an empty band"
        raise InvalidInputError(msg)


def bak_proxy(
    reference_band: FloatArray,
    signal_band: FloatArray,
    calibration: ProxyCalibration = DEFAULT_CALIBRATION,
) -> float:
    """Background-intrusiveness proxy from the band's residual energy.

    ``r = 10*log10((sum(ref**2) + eps) / (sum((sig - ref)**2) + eps))`` mapped
    through ``1 + 4*logistic((r - 15) / 10)``.
    """
    _require_same_shape(reference_band, signal_band)
    residual = signal_band - reference_band
    ratio_db = 10 * np.log10(
        (np.sum(np.square(reference_band)) + BAK_EPSILON)
        / (np.sum(np.square(residual)) + BAK_EPSILON),
    )
    return _mos((ratio_db - calibration.bak_center_db) / calibration.bak_scale_db)


def sig_proxy(
    reference_band: FloatArray,
    signal_band: FloatArray,
    calibration: ProxyCalibration = DEFAULT_CALIBRATION,
) -> float:
    """Signal-distortion proxy from the mean log-spectral distance.

    ``d = mean(|log10(sig + eps) - log10(ref + eps)|)`` mapped through
    ``1 + 4*logistic((0.5 - d) / 0.2)``.
    """
    _require_same_shape(reference_band, signal_band)
    log_ratio = np.log10(signal_band + SIG_EPSILON) - np.log10(
        reference_band + SIG_EPSILON,
    )
    distance = np.mean(np.abs(log_ratio))
    return _mos((calibration.sig_center - distance) / calibration.sig_scale)


def ovl_proxy(
    reference_full: FloatArray,
    signal_full: FloatArray,
    calibration: ProxyCalibration = DEFAULT_CALIBRATION,
) -> float:
    """Overall proxy: weighted mean of the full-band BAK and SIG proxies."""
    weight = calibration.ovl_bak_weight
    score = weight * bak_proxy(reference_full, signal_full, calibration) + (
        1 - weight
    ) * sig_proxy(reference_full, signal_full, calibration)
    return float(np.clip(score, MOS_MIN, MOS_MAX))


def score_utterance(
    clean: FloatArray,
    degraded: FloatArray,
    m: DivisionPoint,
    calibration: ProxyCalibration = DEFAULT_CALIBRATION,
) -> MosScores[float]:
    """Score a degraded utterance band by band against its clean reference.

    BAK is taken on the high bands, SIG on the low bands, OVL on the full band,
    all split at `m`.
    """
    _require_same_shape(clean, degraded)
    clean_bands = hard_split(clean, m)
    degraded_bands = hard_split(degraded, m)
    return MosScores(
        bak=bak_proxy(clean_bands.high, degraded_bands.high, calibration),
        sig=sig_proxy(clean_bands.low, degraded_bands.low, calibration),
        ovl=ovl_proxy(clean, degraded, calibration),
    )
