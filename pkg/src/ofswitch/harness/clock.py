"""Simulated time: a settable clock and an event scheduler.

The scheduler orders events by (time, insertion sequence), so two events at
the same instant always run in the order they were scheduled -- a property
the deterministic-replay guarantees rest on.
"""

from __future__ import annotations

import heapq
import itertools


class SimClock:
    def __init__(self, start: float = 0.0):
        self._now = float(start)

    def now(self) -> float:
        return self._now

    def advance_to(self, t: float) -> None:
        if t < self._now:
            raise ValueError(f"clock cannot move backwards ({t} < {self._now})")
        self._now = t

    def __call__(self) -> float:
        return self._now


class Scheduler:
    def __init__(self, clock: SimClock | None = None):
        self.clock = clock if clock is not None else SimClock()
        self._heap: list = []
        self._seq = itertools.count()

    def at(self, t: float, fn, *args) -> None:
        if t < self.clock.now():
            raise ValueError(f"cannot schedule in the past ({t} < {self.clock.now()})")
        heapq.heappush(self._heap, (t, next(self._seq), fn, args))

    def after(self, delay: float, fn, *args) -> None:
        self.at(self.clock.now() + delay, fn, *args)

    def __len__(self) -> int:
        return len(self._heap)

    def step(self) -> bool:
        """Run the earliest event; False when nothing is pending."""
        if not self._heap:
            return False
        t, _, fn, args = heapq.heappop(self._heap)
        self.clock.advance_to(t)
        fn(*args)
        return True

    def run(self, until: float | None = None, max_events: int | None = None) -> int:
        """Drain events (optionally stopping at simulated time `until`);
        returns how many ran."""
        ran = 0
        while self._heap:
            if until is not None and self._heap[0][0] > until:
                break
            if max_events is not None and ran >= max_events:
                break
            self.step()
            ran += 1
        if until is not None and self.clock.now() < until and (
                not self._heap or self._heap[0][0] > until):
            self.clock.advance_to(until)
        return ran
