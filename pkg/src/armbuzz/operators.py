"""Scripted joystick operators emulating the experiment's human subjects.

One operator drives one trial. It observes nothing but the tactor flag and
its own issued commands; position awareness is dead-reckoned by integrating
commanded motion, corrupted by per-tick Gaussian noise and, in the
no-feedback task, by a per-trial drift bias. This reproduces the blindfolded,
sound-isolated test conditions.

Task scripts:

* Training: sweep wall to wall at full deflection; when the 650-load tactor
  fires at a wall, keep pressing for a hold period, then reverse; pause
  briefly on crossing the workspace center. Contact re-anchors the internal
  estimate to the wall (the training task is performed with vision).
* Reactive / predictive: drive toward the target wall; on tactor onset keep
  the current command for the reaction latency, then reverse toward the
  other wall. For one latency period after each reversal the tactor is
  ignored; if the buzz still persists when that window expires it is taken
  as the new approach's onset. Without this, a prediction that stays above
  threshold through a turnaround would mask every later onset.
* No feedback: reverse when the internal estimate reaches the believed wall
  position. The drifting estimate makes believed arrivals migrate, which
  biases real contacts toward one side and deepens them over the trial.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError
from .feedback import FeedbackMode
from .sim import JoystickCommand, SimConfig, wall_angles

DRIFT_BIAS_RANGE = (0.005, 0.02)  # deg/tick magnitude when drawn per trial


@dataclass(frozen=True)
class UserModelConfig:
    reaction_latency_ms: float = 200.0  # tactor onset to corrective reversal
    approach_speed: float = 1.0         # joystick magnitude while approaching
    center_pause_ms: float = 800.0      # training pause at workspace center
    press_hold_ms: float = 250.0        # training press duration after tactor onset
    drift_bias_deg_per_tick: float | None = None  # None: drawn from +-DRIFT_BIAS_RANGE
    estimate_noise_std_deg: float = 0.05          # per-tick dead-reckoning noise
    rng_seed: int = 0

    def validate(self) -> None:
        if self.reaction_latency_ms < 0:
            raise ConfigError(f"reaction_latency_ms must be >= 0, got {self.reaction_latency_ms}")
        if not 0 < self.approach_speed <= 1:
            raise ConfigError(f"approach_speed must lie in (0, 1], got {self.approach_speed}")
        if not 0 <= self.center_pause_ms <= 1000:
            raise ConfigError(f"center_pause_ms must lie in [0, 1000], got {self.center_pause_ms}")
        if self.press_hold_ms < 0:
            raise ConfigError(f"press_hold_ms must be >= 0, got {self.press_hold_ms}")
        if self.estimate_noise_std_deg < 0:
            raise ConfigError(
                f"estimate_noise_std_deg must be >= 0, got {self.estimate_noise_std_deg}"
            )


class Phase(enum.Enum):
    APPROACH_LEFT = "approach_left"
    APPROACH_RIGHT = "approach_right"
    PRESSING = "pressing"
    RETREATING = "retreating"
    PAUSING = "pausing"


@dataclass(frozen=True)
class OperatorState:
    phase: Phase
    target_left: bool              # which wall the current approach aims at
    internal_estimate_deg: float   # dead-reckoned arm angle
    t: int = 0
    tactor_seen_at: int | None = None    # tick of the onset driving the current action
    reversal_due_at: int | None = None   # test tasks: scheduled reversal tick
    refractory_until: int = 0            # test tasks: ignore the tactor before this tick
    pause_until: int | None = None       # training: center pause expiry tick
    prev_tactor: bool = False


class ScriptedOperator:
    """Deterministic (per seed) command source for one trial."""

    def __init__(self, user: UserModelConfig, sim: SimConfig, task: FeedbackMode):
        user.validate()
        self.user = user
        self.task = task
        self.center = sim.center_deg
        self.left_wall, self.right_wall = wall_angles(sim)
        self.tick_deg = sim.max_speed_deg_s * sim.dt_s  # believed degrees per full-deflection tick
        self.latency_ticks = int(round(user.reaction_latency_ms / sim.dt_ms))
        self.hold_ticks = int(round(user.press_hold_ms / sim.dt_ms))
        self.pause_ticks = int(round(user.center_pause_ms / sim.dt_ms))
        self._rng = np.random.default_rng(user.rng_seed)
        self.drift_bias = 0.0

    def reset(self) -> OperatorState:
        """Reseed and return the initial state (arm centered, approach phase).

        Draw order is fixed: first-target coin, drift sign coin, drift
        magnitude. The drift bias only acts in the no-feedback task.
        """
        self._rng = np.random.default_rng(self.user.rng_seed)
        target_left = bool(self._rng.integers(0, 2) == 0)
        sign = -1.0 if self._rng.integers(0, 2) == 0 else 1.0
        magnitude = float(self._rng.uniform(*DRIFT_BIAS_RANGE))
        if self.user.drift_bias_deg_per_tick is None:
            self.drift_bias = sign * magnitude
        else:
            self.drift_bias = float(self.user.drift_bias_deg_per_tick)
        return OperatorState(
            phase=Phase.APPROACH_LEFT if target_left else Phase.APPROACH_RIGHT,
            target_left=target_left,
            internal_estimate_deg=self.center,
        )

    def _axis_toward(self, target_left: bool) -> float:
        return -self.user.approach_speed if target_left else self.user.approach_speed

    def step(self, op: OperatorState, observed_tactor: bool) -> tuple[JoystickCommand, OperatorState]:
        onset = observed_tactor and not op.prev_tactor
        if self.task is FeedbackMode.TRAINING:
            axis, op = self._step_training(op, onset)
        elif self.task is FeedbackMode.NO_FEEDBACK:
            axis, op = self._step_no_feedback(op)
        else:
            axis, op = self._step_tactile(op, onset, observed_tactor)

        # Dead-reckon the effect of the command just issued.
        est = op.internal_estimate_deg + axis * self.tick_deg
        est += float(self._rng.normal(0.0, self.user.estimate_noise_std_deg))
        if self.task is FeedbackMode.NO_FEEDBACK:
            est += self.drift_bias
        op = replace(op, internal_estimate_deg=est, t=op.t + 1,
                     prev_tactor=observed_tactor)
        return JoystickCommand(axis=axis), op

    def _step_training(self, op: OperatorState, onset: bool) -> tuple[float, OperatorState]:
        if op.phase in (Phase.APPROACH_LEFT, Phase.APPROACH_RIGHT):
            if onset:
                # Contact confirmed: anchor belief at the wall and press.
                wall = self.left_wall if op.target_left else self.right_wall
                op = replace(op, phase=Phase.PRESSING, tactor_seen_at=op.t,
                             internal_estimate_deg=wall)
            return self._axis_toward(op.target_left), op
        if op.phase is Phase.PRESSING:
            if op.tactor_seen_at is not None and op.t >= op.tactor_seen_at + self.hold_ticks:
                op = replace(op, phase=Phase.RETREATING, target_left=not op.target_left,
                             tactor_seen_at=None)
            return self._axis_toward(op.target_left), op
        if op.phase is Phase.RETREATING:
            crossed = (op.internal_estimate_deg >= self.center if not op.target_left
                       else op.internal_estimate_deg <= self.center)
            if crossed:
                op = replace(op, phase=Phase.PAUSING, pause_until=op.t + self.pause_ticks)
                return 0.0, op
            return self._axis_toward(op.target_left), op
        # Phase.PAUSING
        if op.pause_until is not None and op.t >= op.pause_until:
            op = replace(
                op,
                phase=Phase.APPROACH_LEFT if op.target_left else Phase.APPROACH_RIGHT,
                pause_until=None,
            )
            return self._axis_toward(op.target_left), op
        return 0.0, op

    def _step_tactile(self, op: OperatorState, onset: bool,
                      observed_tactor: bool) -> tuple[float, OperatorState]:
        if op.reversal_due_at is not None and op.t >= op.reversal_due_at:
            op = replace(
                op,
                target_left=not op.target_left,
                phase=Phase.APPROACH_RIGHT if op.target_left else Phase.APPROACH_LEFT,
                reversal_due_at=None,
                tactor_seen_at=None,
                refractory_until=op.t + self.latency_ticks,
            )
        elif op.reversal_due_at is None and op.t >= op.refractory_until:
            # A buzz still on when the refractory window closes counts as
            # this approach's onset.
            if onset or (observed_tactor and op.t == op.refractory_until):
                op = replace(op, tactor_seen_at=op.t,
                             reversal_due_at=op.t + self.latency_ticks)
        return self._axis_toward(op.target_left), op

    def _step_no_feedback(self, op: OperatorState) -> tuple[float, OperatorState]:
        believed_wall = self.left_wall if op.target_left else self.right_wall
        arrived = (op.internal_estimate_deg <= believed_wall if op.target_left
                   else op.internal_estimate_deg >= believed_wall)
        if arrived:
            op = replace(
                op,
                target_left=not op.target_left,
                phase=Phase.APPROACH_RIGHT if op.target_left else Phase.APPROACH_LEFT,
            )
        return self._axis_toward(op.target_left), op
