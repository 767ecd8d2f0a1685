"""Incremental temporal-difference learner over sparse binary features.

The learner maintains a weight vector ``w`` and predicts the exponentially
discounted sum of future servo load: at timescale ``gamma``, the prediction
for feature vector ``x`` is the inner product ``w . x``. On each transition
(x_t, tau_next, x_next) the one-step temporal-difference update is applied:

    delta = tau_next + gamma * (w . x_next) - (w . x_t)
    w[i] += alpha * delta        for every active index i of x_t

with ``delta`` computed entirely from the pre-update weights. No eligibility
traces. With the two-active-bit encoding the effective step on a state's
prediction is ``2 * alpha`` per visit. Weights start at zero. Freezing the
learner is exactly equivalent to ``alpha = 0``: update calls still report
``delta`` and count, but leave the weights untouched.

Snapshots serialize the full learner state to a JSON document; weights are
written with 17 significant digits so a restore is bit-exact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, SnapshotError
from .features import FeatureVector

SNAPSHOT_FORMAT_VERSION = 1


@dataclass
class UpdateRecord:
    td_error: float
    prediction_before: float
    prediction_after: float


class GvfLearner:
    def __init__(self, length: int, alpha: float = 0.1, gamma: float = 0.92):
        if length < 1:
            raise ConfigError(f"length must be >= 1, got {length}")
        if not 0.0 <= alpha <= 1.0:
            raise ConfigError(f"alpha must lie in [0, 1], got {alpha}")
        if not 0.0 <= gamma < 1.0:
            raise ConfigError(f"gamma must lie in [0, 1), got {gamma}")
        self.w = np.zeros(length, dtype=np.float64)
        self.alpha = float(alpha)
        self.gamma = float(gamma)
        self.frozen = False
        self.updates_applied = 0

    @property
    def length(self) -> int:
        return len(self.w)

    def _check_length(self, x: FeatureVector) -> None:
        if x.length != len(self.w):
            raise ValueError(
                f"feature vector length {x.length} does not match weights {len(self.w)}"
            )

    def predict(self, x: FeatureVector) -> float:
        """Inner product w . x, i.e. the sum of weights at the active indices."""
        self._check_length(x)
        i, j = x.active_indices
        return float(self.w[i] + self.w[j])

    def update(self, x_t: FeatureVector, tau_next: float, x_next: FeatureVector) -> UpdateRecord:
        """Apply one temporal-difference step for the transition x_t -> x_next."""
        self._check_length(x_t)
        self._check_length(x_next)
        pred_t = self.predict(x_t)
        pred_next = self.predict(x_next)
        delta = tau_next + self.gamma * pred_next - pred_t
        if not self.frozen:
            for i in x_t.active_indices:
                self.w[i] += self.alpha * delta
        self.updates_applied += 1
        return UpdateRecord(
            td_error=delta,
            prediction_before=pred_t,
            prediction_after=self.predict(x_t),
        )

    def freeze(self) -> None:
        self.frozen = True

    def unfreeze(self) -> None:
        self.frozen = False


def snapshot_to_json(learner: GvfLearner) -> str:
    """Serialize learner state as a self-describing JSON document."""
    weights = ", ".join(format(v, ".17g") for v in learner.w)
    head = json.dumps(
        {
            "format_version": SNAPSHOT_FORMAT_VERSION,
            "alpha": learner.alpha,
            "gamma": learner.gamma,
            "frozen": learner.frozen,
            "updates_applied": learner.updates_applied,
            "length": learner.length,
        }
    )
    return head[:-1] + ', "weights": [' + weights + "]}"


def snapshot_from_json(text: str) -> GvfLearner:
    """Rebuild a learner from a snapshot document; reject anything malformed."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SnapshotError(f"snapshot is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SnapshotError("snapshot must be a JSON object")
    required = ("format_version", "alpha", "gamma", "frozen",
                "updates_applied", "length", "weights")
    missing = [k for k in required if k not in doc]
    if missing:
        raise SnapshotError(f"snapshot missing fields: {missing}")
    if doc["format_version"] != SNAPSHOT_FORMAT_VERSION:
        raise SnapshotError(f"unsupported snapshot format_version {doc['format_version']}")
    weights = doc["weights"]
    if not isinstance(weights, list) or len(weights) != doc["length"]:
        raise SnapshotError(
            f"weights array length {len(weights) if isinstance(weights, list) else '?'} "
            f"does not match declared length {doc['length']}"
        )
    learner = GvfLearner(int(doc["length"]), float(doc["alpha"]), float(doc["gamma"]))
    learner.w[:] = np.asarray(weights, dtype=np.float64)
    learner.frozen = bool(doc["frozen"])
    learner.updates_applied = int(doc["updates_applied"])
    return learner


def save_snapshot(learner: GvfLearner, path: str | Path) -> None:
    Path(path).write_text(snapshot_to_json(learner) + "\n", encoding="utf-8")


def load_snapshot(path: str | Path) -> GvfLearner:
    p = Path(path)
    if not p.exists():
        raise SnapshotError(f"snapshot file not found: {p}", code="no_snapshot")
    return snapshot_from_json(p.read_text(encoding="utf-8"))


def discounted_return_oracle(loads: list[float] | np.ndarray, t: int, gamma: float,
                             horizon: int = 200) -> float:
    """Brute-force truncated discounted return: sum of gamma^k * loads[t+k+1].

    Independent check for learned predictions on a known load sequence;
    indexing mirrors the update rule (the signal attributed to time t is the
    load measured on arrival at t+1).
    """
    total = 0.0
    n = len(loads)
    for k in range(horizon + 1):
        idx = t + k + 1
        if idx >= n:
            break
        total += (gamma ** k) * float(loads[idx])
    return total
