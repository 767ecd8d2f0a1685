"""Fixed-timestep simulation of a 1-DOF servo shoulder in a walled workspace.

The joint sweeps a 300 degree range at up to ``max_speed_deg_s``. Two virtual
walls sit symmetrically about the workspace center. Pushing past a wall is
allowed up to ``max_flex_deg`` of penetration (arm compliance): the measured
angle keeps advancing at half the commanded rate while penetrating, a spring
load proportional to penetration is reported, and the tick on which contact
begins adds an impact transient proportional to the commanded speed. In free
space the load signal is Gaussian sensor noise. Loads are quantized to the
integer 0..1024 scale of the modeled servo.

Noise comes from a seeded numpy PCG64 generator (``np.random.default_rng``),
one draw per tick, so identical (config, seed, command sequence) reproduce the
state sequence bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

LOAD_MAX = 1024


@dataclass(frozen=True)
class SimConfig:
    dt_ms: float = 50.0                 # milliseconds per tick (20 Hz)
    max_speed_deg_s: float = 45.0       # speed at full joystick deflection
    range_deg: float = 300.0            # total servo travel
    center_deg: float = 150.0           # workspace center
    wall_halfwidth_deg: float = 28.125  # center-to-wall distance (3 bins of 9.375)
    max_flex_deg: float = 23.4          # penetration cap under sustained push
    spring_load_per_deg: float = 51.2   # load units per degree of penetration
    impact_load_per_deg_s: float = 14.5 # load units per deg/s of approach speed
    free_noise_mean: float = 30.0       # free-space load noise mean
    free_noise_std: float = 15.0        # free-space load noise std
    rng_seed: int = 0

    def validate(self) -> None:
        if self.dt_ms <= 0:
            raise ConfigError(f"dt_ms must be > 0, got {self.dt_ms}")
        if self.max_speed_deg_s <= 0:
            raise ConfigError(f"max_speed_deg_s must be > 0, got {self.max_speed_deg_s}")
        if self.range_deg <= 0:
            raise ConfigError(f"range_deg must be > 0, got {self.range_deg}")
        if not 0 < self.wall_halfwidth_deg < self.range_deg / 2:
            raise ConfigError(
                "wall_halfwidth_deg must lie in (0, range_deg/2), "
                f"got {self.wall_halfwidth_deg}"
            )
        if not 0 <= self.center_deg <= self.range_deg:
            raise ConfigError(f"center_deg must lie in [0, range_deg], got {self.center_deg}")
        if self.max_flex_deg <= 0:
            raise ConfigError(f"max_flex_deg must be > 0, got {self.max_flex_deg}")
        if self.spring_load_per_deg * self.max_flex_deg < LOAD_MAX:
            raise ConfigError(
                "spring_load_per_deg * max_flex_deg must reach the full load scale "
                f"({LOAD_MAX}), got {self.spring_load_per_deg * self.max_flex_deg}"
            )
        if self.free_noise_std < 0:
            raise ConfigError(f"free_noise_std must be >= 0, got {self.free_noise_std}")

    @property
    def dt_s(self) -> float:
        return self.dt_ms / 1000.0


@dataclass(frozen=True)
class ServoState:
    t: int                   # tick index
    angle_deg: float         # measured angle in [0, range_deg]
    velocity_deg_s: float    # realized velocity (angle delta / dt)
    load: int                # servo load, 0..1024
    in_contact: bool
    penetration_deg: float   # degrees past the nearer wall, 0 when free


@dataclass(frozen=True)
class JoystickCommand:
    """One axis of thumb-joystick deflection, clamped into [-1, +1]."""

    axis: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "axis", max(-1.0, min(1.0, float(self.axis))))


def wall_angles(config: SimConfig) -> tuple[float, float]:
    """Return (left_wall_deg, right_wall_deg)."""
    config.validate()
    return (config.center_deg - config.wall_halfwidth_deg,
            config.center_deg + config.wall_halfwidth_deg)


def _penetration(angle: float, left: float, right: float) -> float:
    if angle < left:
        return left - angle
    if angle > right:
        return angle - right
    return 0.0


class ArmSim:
    """Owns the noise stream for one simulated arm.

    State is explicit: :meth:`step` is a pure function of (state, command)
    apart from the single noise draw it consumes. One caller advances a given
    instance at a time; independent instances are fully isolated.
    """

    def __init__(self, config: SimConfig):
        config.validate()
        self.config = config
        self.left_wall, self.right_wall = wall_angles(config)
        self._rng = np.random.default_rng(config.rng_seed)

    def _noise(self) -> float:
        return float(self._rng.normal(self.config.free_noise_mean,
                                      self.config.free_noise_std))

    @staticmethod
    def _quantize_load(raw: float) -> int:
        return int(round(min(float(LOAD_MAX), max(0.0, raw))))

    def reset(self) -> ServoState:
        """Center the arm, reseed the noise stream, and draw the initial load."""
        self._rng = np.random.default_rng(self.config.rng_seed)
        return ServoState(
            t=0,
            angle_deg=self.config.center_deg,
            velocity_deg_s=0.0,
            load=self._quantize_load(self._noise()),
            in_contact=False,
            penetration_deg=0.0,
        )

    def _segment(self, angle: float, v_cmd: float) -> tuple[float, float]:
        """Rate and stopping boundary for the region the motion is entering."""
        cfg = self.config
        left, right = self.left_wall, self.right_wall
        if v_cmd > 0:
            if angle < left:
                return v_cmd / 2.0, left                    # withdrawing from left flex
            if angle < right:
                return v_cmd, right                          # free interior
            return v_cmd / 2.0, right + cfg.max_flex_deg     # deepening right flex
        if angle > right:
            return v_cmd / 2.0, right
        if angle > left:
            return v_cmd, left
        return v_cmd / 2.0, left - cfg.max_flex_deg

    def step(self, state: ServoState, cmd: JoystickCommand) -> ServoState:
        cfg = self.config
        dt = cfg.dt_s
        v_cmd = cmd.axis * cfg.max_speed_deg_s
        left, right = self.left_wall, self.right_wall

        angle = state.angle_deg
        remaining = dt
        # Integrate the tick piecewise: full commanded rate in the interior,
        # half rate while penetrating (either direction), saturating at
        # max_flex_deg past a wall.
        while remaining > 1e-12 and v_cmd != 0.0:
            rate, boundary = self._segment(angle, v_cmd)
            t_hit = (boundary - angle) / rate
            if t_hit >= remaining:
                angle += rate * remaining
                break
            angle = boundary
            remaining -= t_hit
            if _penetration(boundary, left, right) >= cfg.max_flex_deg:
                break                                        # flex saturated

        angle = min(cfg.range_deg, max(0.0, angle))
        pen = _penetration(angle, left, right)
        raw_load = self._noise()
        if pen > 0.0:
            raw_load += cfg.spring_load_per_deg * pen
            if not state.in_contact:
                # Contact began this tick: impact transient.
                raw_load += cfg.impact_load_per_deg_s * abs(v_cmd)
        return ServoState(
            t=state.t + 1,
            angle_deg=angle,
            velocity_deg_s=(angle - state.angle_deg) / dt,
            load=self._quantize_load(raw_load),
            in_contact=pen > 0.0,
            penetration_deg=pen,
        )
