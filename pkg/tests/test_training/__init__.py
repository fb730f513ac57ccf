"""Tests for the `training` package."""

from __future__ import annotations

__all__: list[str] = []

from hypothesis import strategies as st

from scenario_se.losses import BakWeightDirection
from scenario_se.training.config import (
    DiscriminatorMode,
    ScheduleRule,
    TemperatureSchedule,
    TrainConfig,
)


@st.composite
def st_schedules(draw: st.DrawFn) -> TemperatureSchedule:
    """Return a strategy for valid temperature schedules."""
    end = draw(st.floats(min_value=1e-6, max_value=1.0))
    start = draw(st.floats(min_value=end, max_value=2.0))
    return TemperatureSchedule(start, end, draw(st.sampled_from(ScheduleRule)))


@st.composite
def st_configs(draw: st.DrawFn) -> TrainConfig:
    """Return a strategy for valid training configurations."""
    epochs = draw(st.integers(min_value=1, max_value=50))
    fft_size = draw(st.sampled_from([64, 128, 256, 512]))
    return TrainConfig(
        epochs=epochs,
        k_supervised=draw(st.integers(min_value=0, max_value=epochs)),
        batch_size=draw(st.integers(min_value=1, max_value=64)),
        learning_rate=draw(st.floats(min_value=1e-6, max_value=1.0)),
        gamma=draw(st.floats(min_value=0.0, max_value=10.0)),
        temperature_schedule=draw(st_schedules()),
        seed=draw(st.integers(min_value=0, max_value=2**31)),
        bak_weight_direction=draw(st.sampled_from(BakWeightDirection)),
        snr_max_db=draw(st.none() | st.floats(min_value=0.5, max_value=60.0)),
        fixed_alpha=draw(st.none() | st.floats(min_value=0.0, max_value=1.0)),
        pretrain=draw(st.booleans()),
        discriminator_mode=draw(st.sampled_from(DiscriminatorMode)),
        pretrain_snr_levels_db=tuple(
            draw(
                st.lists(
                    st.floats(min_value=-10.0, max_value=40.0) | st.just(float("inf")),
                    min_size=1,
                    max_size=5,
                ),
            ),
        ),
        fft_size=fft_size,
        hop=fft_size // 2,
    )
