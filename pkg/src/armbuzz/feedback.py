"""Per-tick tactor decisions under the four feedback regimes.

``decide`` is a pure function: given the trial mode, the instantaneous load,
and the current load prediction, it reports whether the (single) shoulder
tactor should vibrate and which rule fired. All thresholds use strict
inequality. ``NoFeedback`` never fires.

An optional minimum-on-duration latch is provided separately so the decision
function itself stays stateless; it defaults off.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import ConfigError
from .sim import LOAD_MAX


class FeedbackMode(enum.Enum):
    TRAINING = "training"
    NO_FEEDBACK = "no_feedback"
    REACTIVE = "reactive"
    PREDICTIVE = "predictive"


class FiredRule(enum.Enum):
    TRAINING = "training"
    REACTIVE = "reactive"
    PREDICTIVE = "predictive"
    NONE = "none"


@dataclass(frozen=True)
class FeedbackThresholds:
    training_load: float = 650.0     # load that means "fully flexed, back off"
    reactive_load: float = 420.0     # load that means "wall was hit"
    predictive_value: float = 900.0  # discounted-return value meaning "impact imminent"
    min_on_ms: float = 0.0           # optional buzz latch duration, 0 disables

    def validate(self) -> None:
        if not 0 <= self.training_load <= LOAD_MAX:
            raise ConfigError(f"training_load must lie in [0, {LOAD_MAX}], got {self.training_load}")
        if not 0 <= self.reactive_load <= LOAD_MAX:
            raise ConfigError(f"reactive_load must lie in [0, {LOAD_MAX}], got {self.reactive_load}")
        if self.predictive_value < 0:
            raise ConfigError(f"predictive_value must be >= 0, got {self.predictive_value}")
        if self.min_on_ms < 0:
            raise ConfigError(f"min_on_ms must be >= 0, got {self.min_on_ms}")


@dataclass(frozen=True)
class FeedbackDecision:
    tactor_on: bool
    fired_rule: FiredRule


_OFF = FeedbackDecision(tactor_on=False, fired_rule=FiredRule.NONE)


def decide(mode: FeedbackMode, load: float, prediction: float,
           thresholds: FeedbackThresholds) -> FeedbackDecision:
    """Tactor on/off for one tick; pure function of its arguments."""
    if mode is FeedbackMode.TRAINING:
        if load > thresholds.training_load:
            return FeedbackDecision(True, FiredRule.TRAINING)
    elif mode is FeedbackMode.REACTIVE:
        if load > thresholds.reactive_load:
            return FeedbackDecision(True, FiredRule.REACTIVE)
    elif mode is FeedbackMode.PREDICTIVE:
        if prediction > thresholds.predictive_value:
            return FeedbackDecision(True, FiredRule.PREDICTIVE)
    return _OFF


class TactorLatch:
    """Holds the buzz on for a minimum duration after each firing tick.

    With ``min_on_ms == 0`` (the default) this is a transparent pass-through
    and the tactor state is recomputed fresh from every tick's signal.
    """

    def __init__(self, min_on_ms: float, dt_ms: float):
        self._hold_ticks = math.ceil(min_on_ms / dt_ms) if min_on_ms > 0 else 0
        self._remaining = 0
        self._held_rule = FiredRule.NONE

    def apply(self, decision: FeedbackDecision) -> FeedbackDecision:
        if decision.tactor_on:
            self._remaining = self._hold_ticks
            self._held_rule = decision.fired_rule
            return decision
        if self._remaining > 1:
            self._remaining -= 1
            return FeedbackDecision(True, self._held_rule)
        self._remaining = 0
        return decision
