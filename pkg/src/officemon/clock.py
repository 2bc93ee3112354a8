"""Clock abstraction so simulations can drive time explicitly.

Timestamps are epoch seconds (UTC). A SimClock's sleep() advances
simulated time without blocking, which lets an agent's ordinary run
loop cover a full simulated day in well under a minute of wall time.
"""

from __future__ import annotations

import time
from datetime import datetime, timezone
from typing import Protocol, runtime_checkable


@runtime_checkable
class Clock(Protocol):
    def now(self) -> float:
        ...

    def sleep(self, seconds: float) -> None:
        ...


class SystemClock:
    """Wall-clock time."""

    def now(self) -> float:
        return time.time()

    def sleep(self, seconds: float) -> None:
        time.sleep(seconds)


class SimClock:
    """Simulated clock; sleep() advances time instantly."""

    def __init__(self, start: float = 0.0):
        self._now = float(start)

    def now(self) -> float:
        return self._now

    def sleep(self, seconds: float) -> None:
        if seconds < 0:
            raise ValueError("cannot sleep a negative duration")
        self._now += seconds

    def advance_to(self, t: float) -> None:
        if t < self._now:
            raise ValueError("cannot move a SimClock backwards")
        self._now = float(t)


def utc_from_epoch(epoch: float) -> datetime:
    """Epoch seconds to an aware UTC datetime, floored to the second."""
    return datetime.fromtimestamp(int(epoch), tz=timezone.utc)


def epoch_from_utc(dt: datetime) -> int:
    if dt.tzinfo is None:
        raise ValueError("naive datetime; internal timestamps must be UTC-aware")
    return int(dt.timestamp())
