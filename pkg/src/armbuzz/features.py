"""Sparse binary state encoding: position bins crossed with motion direction.

The servo range is split into ``num_bins`` equal angular bins, each split
three ways by motion direction (no motion / negative / positive), giving
``num_bins * 3`` state units. One extra always-active baseline unit is
appended at the end, so every encoded vector has exactly two active bits.

Boundary angles belong to the upper bin; the top edge of the range clamps
into the last bin. Direction uses the realized (measured) velocity with a
small dead-band for "no motion".
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError

DIRECTIONS = 3  # no motion, negative, positive


@dataclass(frozen=True)
class CodecConfig:
    num_bins: int = 32
    range_deg: float = 300.0
    velocity_epsilon_deg_s: float = 0.1  # |v| at or below this counts as no motion

    def validate(self) -> None:
        if self.num_bins < 1:
            raise ConfigError(f"num_bins must be >= 1, got {self.num_bins}")
        if self.range_deg <= 0:
            raise ConfigError(f"range_deg must be > 0, got {self.range_deg}")
        if self.velocity_epsilon_deg_s < 0:
            raise ConfigError(
                f"velocity_epsilon_deg_s must be >= 0, got {self.velocity_epsilon_deg_s}"
            )

    @property
    def bin_width_deg(self) -> float:
        return self.range_deg / self.num_bins

    @property
    def length(self) -> int:
        """Total feature vector length including the baseline unit."""
        return self.num_bins * DIRECTIONS + 1

    @property
    def baseline_index(self) -> int:
        return self.num_bins * DIRECTIONS


@dataclass(frozen=True)
class FeatureVector:
    """A binary vector with exactly two active bits: one state unit plus the
    always-active baseline unit (index ``length - 1``)."""

    length: int
    active_indices: tuple[int, int]  # (state unit, baseline unit)

    @property
    def state_index(self) -> int:
        return self.active_indices[0]


def bin_of(angle_deg: float, config: CodecConfig) -> int:
    """Positional bin for an angle in [0, range_deg]."""
    if not 0.0 <= angle_deg <= config.range_deg:
        raise ValueError(
            f"angle {angle_deg} outside [0, {config.range_deg}]"
        )
    return min(config.num_bins - 1, math.floor(angle_deg / config.bin_width_deg))


def direction_of(velocity_deg_s: float, config: CodecConfig) -> int:
    """0 for no motion, 1 for negative velocity, 2 for positive velocity."""
    if abs(velocity_deg_s) <= config.velocity_epsilon_deg_s:
        return 0
    return 1 if velocity_deg_s < 0 else 2


def encode(angle_deg: float, velocity_deg_s: float, config: CodecConfig) -> FeatureVector:
    """Encode (angle, velocity) as the active (bin, direction) unit plus baseline."""
    state_index = bin_of(angle_deg, config) * DIRECTIONS + direction_of(velocity_deg_s, config)
    return FeatureVector(
        length=config.length,
        active_indices=(state_index, config.baseline_index),
    )
