"""Wall-clock pacing for real-time tick loops.

Deadlines are absolute against a monotonic clock: the k-th tick is due at
``start + k * dt``. A late loop runs its backlog back to back (ticks are
never skipped or coalesced) and the schedule stays anchored, so a single
slow tick does not shift every later deadline.
"""

from __future__ import annotations

import time


class TickPacer:
    def __init__(self, dt_s: float, clock=time.monotonic, sleep=time.sleep):
        if dt_s <= 0:
            raise ValueError(f"dt_s must be > 0, got {dt_s}")
        self.dt_s = dt_s
        self._clock = clock
        self._sleep = sleep
        self._start: float | None = None
        self._ticks = 0

    def start(self) -> None:
        self._start = self._clock()
        self._ticks = 0

    def next_deadline(self) -> float:
        if self._start is None:
            self.start()
        return self._start + (self._ticks + 1) * self.dt_s

    def wait(self) -> float:
        """Block until the next tick is due; returns lateness in seconds
        (negative when the loop had slack)."""
        deadline = self.next_deadline()
        self._ticks += 1
        remaining = deadline - self._clock()
        if remaining > 0:
            self._sleep(remaining)
            return 0.0
        return -remaining
