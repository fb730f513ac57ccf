"""Tests for the `losses` module."""

from __future__ import annotations

import math
from typing import TYPE_CHECKING

import numpy as np
import pytest
import torch
from hypothesis import given
from hypothesis import strategies as st

from scenario_se.errors import InvalidInputError
from scenario_se.losses import (
    BakWeightDirection,
    LossBreakdown,
    SnrContext,
    alpha,
    loss_bak,
    loss_discriminator,
    loss_generator,
    loss_m,
    loss_ovl,
    loss_sig,
    loss_total,
)

if TYPE_CHECKING:  # pragma: no cover
    from pytest_benchmark.fixture import BenchmarkFixture

st_loss = st.floats(min_value=0.0, max_value=16.0)
st_alpha = st.floats(min_value=0.0, max_value=1.0)


@given(
    m=st_loss,
    bak=st_loss,
    sig=st_loss,
    ovl=st_loss,
    a=st_alpha,
    include_m=st.booleans(),
)
def test_discriminator_loss_reconstruction(  # noqa: PLR0913
    m: float,
    bak: float,
    sig: float,
    ovl: float,
    a: float,
    include_m: bool,  # noqa: FBT001
) -> None:
    """Test the SNR-balanced sum of the band losses."""
    loss = loss_discriminator(
        loss_m=m,
        loss_bak=bak,
        loss_sig=sig,
        loss_ovl=ovl,
        alpha=a,
        include_m=include_m,
    )
    expected = m * include_m + ovl + a * bak + (1 - a) * sig
    assert loss == pytest.approx(expected, abs=1e-9)
    prose = loss_discriminator(
        loss_m=m,
        loss_bak=bak,
        loss_sig=sig,
        loss_ovl=ovl,
        alpha=a,
        include_m=include_m,
        direction=BakWeightDirection.PROSE,
    )
    expected = m * include_m + ovl + (1 - a) * bak + a * sig
    assert prose == pytest.approx(expected, abs=1e-9)


def test_reconstruction_batch(benchmark: BenchmarkFixture) -> None:
    """Test 1000 random component tuples for both losses within one second."""
    rng = np.random.default_rng(0)
    tuples = rng.uniform(0, 16, (1000, 5))
    weights = rng.uniform(size=(1000, 2)) * (1.0, 2.0)

    def worst_error() -> float:
        worst = 0.0
        for (m, bak, sig, ovl, g), (a, gamma) in zip(tuples, weights, strict=True):
            d = loss_discriminator(
                loss_m=m,
                loss_bak=bak,
                loss_sig=sig,
                loss_ovl=ovl,
                alpha=a,
                include_m=True,
            )
            total = loss_total(g, d, gamma)
            worst = max(
                worst,
                abs(d - (a * bak + (1 - a) * sig + ovl + m)),
                abs(total - (g + gamma * d)),
            )
        return float(worst)

    assert benchmark.pedantic(worst_error, rounds=1, iterations=1) < 1e-9
    assert benchmark.stats.stats.max < 1.0


@pytest.mark.parametrize(("snr", "expected"), [(0.0, 0.0), (20.0, 1.0), (10.0, 0.5)])
def test_alpha_endpoints(snr: float, expected: float) -> None:
    """Test the SNR weight is affine between 0 and the maximum SNR."""
    assert alpha(SnrContext(snr_db=snr, snr_max_db=20.0)) == expected


@given(snr=st.floats(-100, 100), snr_max=st.floats(0.1, 60))
def test_alpha_clamped(snr: float, snr_max: float) -> None:
    """Test the SNR is clamped into ``[0, snr_max]``."""
    a = alpha(SnrContext(snr_db=snr, snr_max_db=snr_max))
    assert 0.0 <= a <= 1.0
    if snr <= 0:
        assert a == 0.0
    if snr >= snr_max:
        assert a == 1.0


@pytest.mark.parametrize("snr_max", [0.0, -5.0, math.nan])
def test_snr_context_validation(snr_max: float) -> None:
    """Test the maximum SNR must be positive."""
    with pytest.raises(InvalidInputError):
        SnrContext(snr_db=5.0, snr_max_db=snr_max)


@given(a=st.floats(-10, 10), b=st.floats(-10, 10))
def test_squared_errors(a: float, b: float) -> None:
    """Test scalar losses are squared errors."""
    for loss in (loss_m, loss_bak, loss_sig, loss_ovl):
        assert loss(a, b) == pytest.approx((a - b) ** 2)


@given(g=st_loss, d=st_loss, gamma=st.floats(0, 10))
def test_total_loss(g: float, d: float, gamma: float) -> None:
    """Test the generator-side objective."""
    assert loss_total(g, d, gamma) == pytest.approx(g + gamma * d, abs=1e-9)


def test_total_loss_rejects_negative_gamma() -> None:
    """Test gamma must be non-negative."""
    with pytest.raises(InvalidInputError):
        loss_total(1.0, 1.0, -0.1)


def test_generator_loss() -> None:
    """Test the L1 term plus the adversarial push towards a score of 5."""
    rng = np.random.default_rng(1)
    enhanced = torch.from_numpy(rng.uniform(0, 1, (6, 9)))
    clean = torch.from_numpy(rng.uniform(0, 1, (6, 9)))
    predictions = [
        torch.tensor(4.0, dtype=torch.float64),
        torch.tensor(3.5, dtype=torch.float64),
    ]
    expected = torch.mean(torch.abs(enhanced - clean)) + 0.1 * (1.0 + 2.25)
    assert torch.allclose(loss_generator(enhanced, clean, predictions, 0.1), expected)
    with pytest.raises(InvalidInputError):
        loss_generator(enhanced, clean[:, :8], predictions)


def test_generator_loss_gradient() -> None:
    """Test the generator loss against finite differences."""
    rng = np.random.default_rng(2)
    enhanced = torch.from_numpy(rng.uniform(0, 1, (4, 5))).requires_grad_()
    clean = torch.from_numpy(rng.uniform(0, 1, (4, 5)))
    score = torch.tensor(3.0, dtype=torch.float64, requires_grad=True)

    def loss(y: torch.Tensor, s: torch.Tensor) -> torch.Tensor:
        return loss_generator(y, clean, [s * y.mean()], 0.05)

    assert torch.autograd.gradcheck(
        loss,
        (enhanced, score),
        eps=1e-6,
        atol=1e-6,
        rtol=1e-4,
    )


def test_band_loss_gradients() -> None:
    """Test the scalar losses against finite differences."""
    pred = torch.tensor(3.2, dtype=torch.float64, requires_grad=True)
    target = torch.tensor(4.1, dtype=torch.float64)

    def d_loss(p: torch.Tensor) -> torch.Tensor:
        return loss_discriminator(
            loss_m=loss_m(p / 5, target / 5),
            loss_bak=loss_bak(p, target),
            loss_sig=loss_sig(p * 0.9, target),
            loss_ovl=loss_ovl(p, target),
            alpha=0.3,
            include_m=True,
        )

    assert torch.autograd.gradcheck(d_loss, (pred,), eps=1e-6, atol=1e-6, rtol=1e-4)


def test_breakdown() -> None:
    """Test finiteness and the log record."""
    breakdown = LossBreakdown(
        loss_m=0.1,
        loss_bak=0.2,
        loss_sig=0.3,
        loss_ovl=0.4,
        loss_d=0.9,
        loss_g=1.0,
        loss_total=1.9,
        alpha=0.5,
        supervised_m=True,
    )
    assert breakdown.is_finite()
    assert breakdown.to_record()["loss_total"] == 1.9
    broken = LossBreakdown(**{**breakdown.to_record(), "loss_g": math.inf})
    assert not broken.is_finite()
