"""Simulated robot-arm shoulder with learned load prediction and
anticipatory vibrotactile feedback.

The package re-creates, in simulation, a human-steered robot shoulder whose
servo load is predicted online by a temporal-difference learner; the
prediction (or the raw load) drives a vibrotactile cue under four feedback
regimes, and an experiment harness reproduces the four-task protocol with
scripted operators or a live human over a WebSocket session.
"""

from .errors import ConfigError, LogParseError, SnapshotError
from .features import CodecConfig, FeatureVector, bin_of, direction_of, encode
from .feedback import (FeedbackDecision, FeedbackMode, FeedbackThresholds,
                       FiredRule, TactorLatch, decide)
from .gvf import (GvfLearner, UpdateRecord, discounted_return_oracle,
                  load_snapshot, save_snapshot, snapshot_from_json,
                  snapshot_to_json)
from .harness import (PROTOCOL_TASK_ORDER, ProtocolReport, ProtocolResult,
                      TrialConfig, TrialResult, derive_seeds, run_protocol,
                      run_trial)
from .logio import (TrialLog, TrialStepRecord, dump_log, parse_log, read_log,
                    write_log)
from .metrics import TrialMetrics, compute_metrics
from .operators import (OperatorState, Phase, ScriptedOperator,
                        UserModelConfig)
from .sim import (LOAD_MAX, ArmSim, JoystickCommand, ServoState, SimConfig,
                  wall_angles)

__version__ = "0.1.0"
