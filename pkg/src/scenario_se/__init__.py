"""Scenario-aware discriminator training for GAN speech enhancement."""

from loguru import logger

logger.disable("scenario_se")
