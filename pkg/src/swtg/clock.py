"""Clock abstraction used by the generator, channel and analyzer.

Two implementations: the monotonic system clock for live runs, and a
virtual clock for deterministic tests and simulated high-rate trials.
All timestamps are integer nanoseconds since the clock's epoch.
"""

from __future__ import annotations

import threading
import time
from typing import Protocol


class Clock(Protocol):
    def now(self) -> int: ...

    def sleep_until(self, deadline_ns: int) -> None: ...


class SystemClock:
    """Monotonic wall clock. Epoch is the moment of construction."""

    # Sleeping in chunks keeps stop() latency bounded without needing to
    # interrupt a long sleep.
    MAX_CHUNK_S = 0.002

    def __init__(self) -> None:
        self._epoch = time.monotonic_ns()

    def now(self) -> int:
        return time.monotonic_ns() - self._epoch

    def sleep_until(self, deadline_ns: int) -> None:
        while True:
            remaining = deadline_ns - self.now()
            if remaining <= 0:
                return
            time.sleep(min(remaining / 1e9, self.MAX_CHUNK_S))


class VirtualClock:
    """Simulated clock: sleep_until() advances time instead of waiting.

    A limit caps how far sleepers may advance; a thread asking to sleep past
    the limit blocks until the limit is raised or the clock is released.
    This lets a controller run worker threads up to an exact simulated
    instant and then stop them, giving deterministic schedules.
    """

    def __init__(self, start_ns: int = 0) -> None:
        self._now = start_ns
        self._limit: int | None = None
        self._released = False
        self._blocked: dict[int, int] = {}  # thread id -> deadline it waits on
        self._cond = threading.Condition()

    def now(self) -> int:
        with self._cond:
            return self._now

    def sleep_until(self, deadline_ns: int) -> None:
        me = threading.get_ident()
        with self._cond:
            while (
                self._limit is not None
                and deadline_ns > self._limit
                and not self._released
            ):
                self._blocked[me] = deadline_ns
                self._cond.notify_all()
                try:
                    self._cond.wait()
                finally:
                    self._blocked.pop(me, None)
            if self._released and self._limit is not None:
                # Stopped while blocked: do not advance past the limit.
                deadline_ns = min(deadline_ns, self._limit)
            if deadline_ns > self._now:
                self._now = deadline_ns

    def set_limit(self, limit_ns: int) -> None:
        with self._cond:
            self._limit = limit_ns
            self._cond.notify_all()

    def advance_to(self, t_ns: int) -> None:
        with self._cond:
            if t_ns > self._now:
                self._now = t_ns
            self._cond.notify_all()

    def wait_quiescent(self, n_threads: int, timeout_s: float = 30.0) -> bool:
        """Block until n_threads are parked on deadlines beyond the current
        limit. Threads still parked from an earlier, lower limit do not
        count: they are runnable and merely not scheduled yet."""
        deadline = time.monotonic() + timeout_s
        with self._cond:
            while True:
                parked = sum(
                    1
                    for d in self._blocked.values()
                    if self._limit is not None and d > self._limit
                )
                if parked >= n_threads:
                    return True
                left = deadline - time.monotonic()
                if left <= 0:
                    return False
                self._cond.wait(timeout=min(left, 0.05))

    def release(self) -> None:
        """Unblock all sleepers; they wake without advancing past the limit."""
        with self._cond:
            self._released = True
            self._cond.notify_all()
