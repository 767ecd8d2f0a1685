"""Aggregate trial metrics: summed load, per-bin profiles, feedback lead times.

``median_feedback_lead_ms`` measures how far the buzz preceded wall contact.
Contact episodes are maximal runs of ``in_contact``; each episode is paired
with a tactor onset from the same approach (the stretch since the previous
episode ended, through this episode). The latest onset at or before first
contact wins; failing that, the earliest one after it (a negative lead:
feedback followed contact). Episodes with no onset contribute no sample.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass

from .errors import LogParseError
from .logio import TrialLog


@dataclass(frozen=True)
class TrialMetrics:
    total_summed_load: int
    per_bin_visits: tuple[int, ...]
    per_bin_visit_fraction: tuple[float, ...]
    per_bin_summed_load: tuple[int, ...]
    wall_contact_count: int
    median_feedback_lead_ms: float | None  # None when no contact was paired

    def as_dict(self) -> dict:
        return {
            "total_summed_load": self.total_summed_load,
            "per_bin_visits": list(self.per_bin_visits),
            "per_bin_visit_fraction": list(self.per_bin_visit_fraction),
            "per_bin_summed_load": list(self.per_bin_summed_load),
            "wall_contact_count": self.wall_contact_count,
            "median_feedback_lead_ms": self.median_feedback_lead_ms,
        }


def _feedback_lead_samples_ms(log: TrialLog) -> list[float]:
    records = log.records
    contact_starts = []   # first tick of each contact episode
    episode_ends = []     # tick after each episode's last contact
    prev = False
    for rec in records:
        if rec.in_contact and not prev:
            contact_starts.append(rec.t)
        if prev and not rec.in_contact:
            episode_ends.append(rec.t)
        prev = rec.in_contact
    if prev:
        episode_ends.append(records[-1].t + 1)

    onsets = []
    prev = False
    for rec in records:
        if rec.tactor_on and not prev:
            onsets.append(rec.t)
        prev = rec.tactor_on

    leads = []
    window_start = 0
    for start, end in zip(contact_starts, episode_ends):
        in_window = [o for o in onsets if window_start <= o < end]
        before = [o for o in in_window if o <= start]
        after = [o for o in in_window if o > start]
        if before:
            leads.append((start - before[-1]) * log.dt_ms)
        elif after:
            leads.append((start - after[0]) * log.dt_ms)
        window_start = end
    return leads


def compute_metrics(log: TrialLog, num_bins: int | None = None) -> TrialMetrics:
    """Pure aggregation over a trial log."""
    bins = num_bins if num_bins is not None else log.num_bins
    visits = [0] * bins
    bin_load = [0] * bins
    for rec in log.records:
        if not 0 <= rec.bin < bins:
            raise LogParseError(f"bin {rec.bin} out of range [0, {bins})", rec.t + 2)
        visits[rec.bin] += 1
        bin_load[rec.bin] += rec.load

    n = len(log.records)
    fractions = [v / n for v in visits] if n else [0.0] * bins

    contacts = 0
    prev = False
    for rec in log.records:
        if rec.in_contact and not prev:
            contacts += 1
        prev = rec.in_contact

    leads = _feedback_lead_samples_ms(log)
    return TrialMetrics(
        total_summed_load=sum(bin_load),
        per_bin_visits=tuple(visits),
        per_bin_visit_fraction=tuple(fractions),
        per_bin_summed_load=tuple(bin_load),
        wall_contact_count=contacts,
        median_feedback_lead_ms=statistics.median(leads) if leads else None,
    )
