"""Trial and protocol orchestration.

One trial wires the pieces together at a fixed per-tick order:
sense -> predict -> feedback decision -> operator command -> simulator step ->
(during training) learner update with the load measured after the step. The
logged record for tick t holds the pre-step state plus the command issued in
it.

A protocol run is the four-task sequence training -> no feedback -> reactive
-> predictive, with the weights learned in the training task frozen and
reused by the reactive and predictive tasks. Per-trial RNG seeds for the
simulator and the operator are derived from the trial seed with numpy's
SeedSequence, so a (config, seed) pair pins the entire run.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, SnapshotError
from .features import DIRECTIONS, CodecConfig, encode
from .feedback import (FeedbackDecision, FeedbackMode, FeedbackThresholds,
                       TactorLatch, decide)
from .gvf import GvfLearner, load_snapshot
from .logio import TrialLog, TrialStepRecord
from .metrics import TrialMetrics, compute_metrics
from .operators import ScriptedOperator, UserModelConfig
from .sim import ArmSim, SimConfig

PROTOCOL_TASK_ORDER = (
    FeedbackMode.TRAINING,
    FeedbackMode.NO_FEEDBACK,
    FeedbackMode.REACTIVE,
    FeedbackMode.PREDICTIVE,
)


@dataclass(frozen=True)
class TrialConfig:
    task: FeedbackMode
    duration_ticks: int = 6000          # 5 minutes at 20 Hz
    sim: SimConfig = field(default_factory=SimConfig)
    codec: CodecConfig = field(default_factory=CodecConfig)
    thresholds: FeedbackThresholds = field(default_factory=FeedbackThresholds)
    user: UserModelConfig = field(default_factory=UserModelConfig)
    learner_alpha: float = 0.1
    learner_gamma: float = 0.92
    snapshot_path: str | None = None    # trained weights source for test tasks
    continue_learning: bool = False     # keep updating weights in test tasks
    seed: int = 0

    def validate(self) -> None:
        if self.duration_ticks < 0:
            raise ConfigError(f"duration_ticks must be >= 0, got {self.duration_ticks}")
        self.sim.validate()
        self.codec.validate()
        self.thresholds.validate()
        self.user.validate()
        if self.codec.range_deg != self.sim.range_deg:
            raise ConfigError(
                f"codec.range_deg ({self.codec.range_deg}) must match "
                f"sim.range_deg ({self.sim.range_deg})"
            )
        if self.task is FeedbackMode.TRAINING and self.snapshot_path is not None:
            raise ConfigError("training trials learn fresh weights; snapshot_path must be unset")


@dataclass
class TrialResult:
    log: TrialLog
    metrics: TrialMetrics
    learner: GvfLearner | None  # trained (frozen) weights after a training trial


def derive_seeds(seed: int, n: int = 2) -> list[int]:
    """Deterministic child seeds (simulator, operator, ...) for one trial."""
    return [int(s) for s in np.random.SeedSequence(seed).generate_state(n)]


def _resolve_learner(config: TrialConfig, provided: GvfLearner | None) -> tuple[GvfLearner, bool]:
    """Return (learner, learning_enabled) for the trial."""
    length = config.codec.length
    if config.task is FeedbackMode.TRAINING:
        return GvfLearner(length, config.learner_alpha, config.learner_gamma), True

    learner = provided
    if learner is None and config.snapshot_path is not None:
        learner = load_snapshot(config.snapshot_path)
    if learner is None:
        if config.task in (FeedbackMode.REACTIVE, FeedbackMode.PREDICTIVE):
            raise SnapshotError(
                f"{config.task.value} trials need trained weights; no snapshot given",
                code="no_snapshot",
            )
        # No-feedback trials consult nothing; log zero predictions.
        learner = GvfLearner(length, 0.0, config.learner_gamma)
        learner.freeze()
    if learner.length != length:
        raise SnapshotError(
            f"snapshot length {learner.length} does not match feature length {length}"
        )
    if config.continue_learning:
        # Work on a copy so the source snapshot stays frozen for other trials.
        fork = GvfLearner(learner.length, learner.alpha, learner.gamma)
        fork.w[:] = learner.w
        fork.updates_applied = learner.updates_applied
        return fork, True
    return learner, False


def run_trial(config: TrialConfig, learner: GvfLearner | None = None,
              pacer=None) -> TrialResult:
    """Run one trial; returns the log, its metrics, and trained weights if any.

    ``learner`` overrides the snapshot source for test tasks (the protocol
    runner hands the freshly trained weights over in memory). ``pacer``, when
    given, is waited on before every tick (real-time execution).
    """
    config.validate()
    learner, learning = _resolve_learner(config, learner)
    sim_seed, op_seed = derive_seeds(config.seed)
    sim = ArmSim(replace(config.sim, rng_seed=sim_seed))
    operator = ScriptedOperator(replace(config.user, rng_seed=op_seed),
                                sim.config, config.task)
    latch = TactorLatch(config.thresholds.min_on_ms, config.sim.dt_ms)

    state = sim.reset()
    op = operator.reset()
    records = []
    for _ in range(config.duration_ticks):
        if pacer is not None:
            pacer.wait()
        x_t = encode(state.angle_deg, state.velocity_deg_s, config.codec)
        prediction = learner.predict(x_t)
        decision: FeedbackDecision = latch.apply(
            decide(config.task, state.load, prediction, config.thresholds)
        )
        cmd, op = operator.step(op, decision.tactor_on)
        next_state = sim.step(state, cmd)
        if learning:
            x_next = encode(next_state.angle_deg, next_state.velocity_deg_s, config.codec)
            learner.update(x_t, float(next_state.load), x_next)
        records.append(TrialStepRecord(
            t=state.t,
            angle_deg=state.angle_deg,
            velocity_deg_s=state.velocity_deg_s,
            bin=x_t.state_index // DIRECTIONS,
            load=state.load,
            prediction=prediction,
            tactor_on=decision.tactor_on,
            fired_rule=decision.fired_rule,
            joystick_axis=cmd.axis,
            in_contact=state.in_contact,
        ))
        state = next_state

    log = TrialLog(
        task=config.task.value,
        duration_ticks=config.duration_ticks,
        dt_ms=config.sim.dt_ms,
        seed=config.seed,
        num_bins=config.codec.num_bins,
        records=tuple(records),
    )
    metrics = compute_metrics(log)
    trained = None
    if learning:
        learner.freeze()
        trained = learner
    return TrialResult(log=log, metrics=metrics, learner=trained)


@dataclass
class ProtocolReport:
    seed: int
    metrics: dict[str, TrialMetrics]          # keyed by task value
    total_loads: dict[str, int]
    ordering_no_feedback_gt_reactive: bool
    ordering_reactive_gt_predictive: bool
    predictive_to_reactive_load_ratio: float
    reactive_to_no_feedback_load_ratio: float

    def as_dict(self) -> dict:
        return {
            "seed": self.seed,
            "total_loads": dict(self.total_loads),
            "ordering_no_feedback_gt_reactive": self.ordering_no_feedback_gt_reactive,
            "ordering_reactive_gt_predictive": self.ordering_reactive_gt_predictive,
            "predictive_to_reactive_load_ratio": self.predictive_to_reactive_load_ratio,
            "reactive_to_no_feedback_load_ratio": self.reactive_to_no_feedback_load_ratio,
            "metrics": {task: m.as_dict() for task, m in self.metrics.items()},
        }


@dataclass
class ProtocolResult:
    report: ProtocolReport
    trials: dict[str, TrialResult]            # keyed by task value
    trained_learner: GvfLearner


def run_protocol(base: TrialConfig, seed: int) -> ProtocolResult:
    """Run the four-task sequence under one protocol seed."""
    trial_seeds = derive_seeds(seed, n=len(PROTOCOL_TASK_ORDER))
    trials: dict[str, TrialResult] = {}

    training_cfg = replace(base, task=FeedbackMode.TRAINING,
                           snapshot_path=None, seed=trial_seeds[0])
    training = run_trial(training_cfg)
    assert training.learner is not None
    trials[FeedbackMode.TRAINING.value] = training

    for i, task in enumerate(PROTOCOL_TASK_ORDER[1:], start=1):
        cfg = replace(base, task=task, snapshot_path=None, seed=trial_seeds[i])
        provided = training.learner if task is not FeedbackMode.NO_FEEDBACK else None
        trials[task.value] = run_trial(cfg, learner=provided)

    metrics = {task: r.metrics for task, r in trials.items()}
    loads = {task: m.total_summed_load for task, m in metrics.items()}
    nf = loads[FeedbackMode.NO_FEEDBACK.value]
    re = loads[FeedbackMode.REACTIVE.value]
    pr = loads[FeedbackMode.PREDICTIVE.value]
    report = ProtocolReport(
        seed=seed,
        metrics=metrics,
        total_loads=loads,
        ordering_no_feedback_gt_reactive=nf > re,
        ordering_reactive_gt_predictive=re > pr,
        predictive_to_reactive_load_ratio=pr / re if re else float("inf"),
        reactive_to_no_feedback_load_ratio=re / nf if nf else float("inf"),
    )
    return ProtocolResult(report=report, trials=trials,
                          trained_learner=training.learner)
