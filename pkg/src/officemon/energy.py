"""Software energy sensor: power-state occupancy to watt-hours.

A PC occupies one of a small set of power states whose draw is nearly
constant, so energy can be inferred by sampling the state once per
second and multiplying occupancy by per-state power. The annualized
form of the same idea is the ECMA-383 / Energy Star TEC estimate.

Working and short-idle draw are indistinguishable in practice, so both
bill at the short-idle power. Laptops on battery are not drawing from
the building, so those seconds are excluded; charging systems draw a
multiple of their plugged-in power. External monitors add their on
rating during short idle and work, standby during long idle, and off
rating while the system sleeps or is off.
"""

from __future__ import annotations

import bisect
import logging
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import Iterable, Iterator, Protocol, Sequence

from .clock import Clock, utc_from_epoch
from .domain import Report, SensorIndicator
from .wire import format_timestamp, parse_timestamp

log = logging.getLogger(__name__)

HOURS_PER_YEAR = 8760


class PowerState(str, Enum):
    """Machine power states; exactly one holds at any sampled instant."""

    OFF = "off"
    SLEEP = "sleep"
    IDLE = "idle"          # on, screen off
    SHORT_IDLE = "sidle"   # on, screen on, no workload
    WORK = "work"          # on, screen on, executing a workload


#: Wire payload name for each state's occupancy seconds.
OCCUPANCY_NAMES = {
    PowerState.OFF: "offSec",
    PowerState.SLEEP: "sleepSec",
    PowerState.IDLE: "idleSec",
    PowerState.SHORT_IDLE: "sidleSec",
    PowerState.WORK: "workSec",
}
BATTERY_NAME = "batterySec"


class FractionsDoNotSum(ValueError):
    pass


class ObserverUnavailable(RuntimeError):
    """Raised by an observer that cannot answer a poll; the sampler
    records a gap rather than fabricating samples."""


@dataclass(frozen=True)
class MachinePowerProfile:
    """Per-state draw for one machine type, in watts.

    Power values come from provisioning metadata (measured, or from the
    manufacturer's Energy Star figures). The charging multiplier covers
    the larger draw of a laptop charging its battery, typically 2 to 3
    times the plugged-in draw.
    """

    p_off: float
    p_sleep: float
    p_idle: float
    p_sidle: float
    monitor_on: float = 0.0
    monitor_standby: float = 0.0
    monitor_off: float = 0.0
    charging_multiplier: float = 2.5

    def __post_init__(self):
        for name in ("p_off", "p_sleep", "p_idle", "p_sidle",
                     "monitor_on", "monitor_standby", "monitor_off"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.charging_multiplier < 1:
            raise ValueError("charging multiplier must be >= 1")

    def power(self, state: PowerState) -> float:
        """System draw in a state; work bills at the short-idle power."""
        return {
            PowerState.OFF: self.p_off,
            PowerState.SLEEP: self.p_sleep,
            PowerState.IDLE: self.p_idle,
            PowerState.SHORT_IDLE: self.p_sidle,
            PowerState.WORK: self.p_sidle,
        }[state]


@dataclass(frozen=True)
class BatterySnapshot:
    on_ac_power: bool
    charging: bool
    charge_pct: float = 100.0

    def __post_init__(self):
        if not 0 <= self.charge_pct <= 100:
            raise ValueError(f"charge percent outside [0, 100]: {self.charge_pct}")


@dataclass(frozen=True)
class TimeFractions:
    """Fraction of a year spent in each state. Each must lie in [0, 1];
    the sum-to-one check fires in tec_annual so callers get a clear error."""

    t_off: float
    t_sleep: float
    t_idle: float
    t_sidle: float
    t_work: float

    def __post_init__(self):
        for name in ("t_off", "t_sleep", "t_idle", "t_sidle", "t_work"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise ValueError(f"{name} must be within [0, 1], got {v}")

    def total(self) -> float:
        return self.t_off + self.t_sleep + self.t_idle + self.t_sidle + self.t_work


@dataclass
class StateOccupancy:
    """Seconds spent per state over a reporting window; seconds on
    battery are tracked separately and never billed."""

    seconds: dict[PowerState, int] = field(
        default_factory=lambda: {s: 0 for s in PowerState})
    on_battery_seconds: int = 0

    def state_total(self) -> int:
        return sum(self.seconds.values())

    def total(self) -> int:
        return self.state_total() + self.on_battery_seconds

    def add(self, state: PowerState, seconds: int = 1) -> None:
        self.seconds[state] += seconds


@dataclass(frozen=True)
class EnergyReading:
    """Interval energy plus the occupancy it was computed from."""

    interval_wh: float
    occupancy: StateOccupancy

    def __post_init__(self):
        if self.interval_wh < 0:
            raise ValueError("interval energy cannot be negative")


class EventKind(str, Enum):
    SLEEP_ENTER = "sleep_enter"
    WAKE = "wake"
    BOOT = "boot"


@dataclass(frozen=True)
class PowerEvent:
    epoch: float
    kind: EventKind


@dataclass(frozen=True)
class Sample:
    epoch: int
    state: PowerState
    battery: BatterySnapshot


class SystemObserver(Protocol):
    """Pluggable binding to the host OS; poll must be non-blocking and
    the event log time-ordered. The OS binding is an integration point;
    the scripted observer below is the desk-scale implementation."""

    def poll(self) -> tuple[PowerState, BatterySnapshot]:
        ...

    def event_log(self) -> Sequence[PowerEvent]:
        ...


class ScriptedObserver:
    """Replays a power-state script against a clock.

    Segments are (start_epoch, state, on_ac, charging), sorted by start;
    each holds until the next begins. Polls before the first segment or
    inside a configured fail window raise ObserverUnavailable.
    """

    def __init__(self, clock: Clock,
                 segments: Sequence[tuple[float, PowerState, bool, bool]],
                 events: Sequence[PowerEvent] = (),
                 fail_between: tuple[float, float] | None = None):
        if not segments:
            raise ValueError("at least one segment required")
        ordered = sorted(segments, key=lambda s: s[0])
        self._clock = clock
        self._starts = [s[0] for s in ordered]
        # snapshots prebuilt: poll runs once per second per machine
        self._answers = [(state, BatterySnapshot(on_ac_power=on_ac, charging=charging))
                         for _, state, on_ac, charging in ordered]
        self._events = tuple(sorted(events, key=lambda e: e.epoch))
        self._fail_between = fail_between

    @classmethod
    def constant(cls, clock: Clock, state: PowerState, *,
                 on_ac: bool = True, charging: bool = False) -> "ScriptedObserver":
        return cls(clock, [(float("-inf"), state, on_ac, charging)])

    def poll(self) -> tuple[PowerState, BatterySnapshot]:
        t = self._clock.now()
        if self._fail_between and self._fail_between[0] <= t < self._fail_between[1]:
            raise ObserverUnavailable(f"observer offline at t={t}")
        idx = bisect.bisect_right(self._starts, t) - 1
        if idx < 0:
            raise ObserverUnavailable(f"no scripted state at t={t}")
        return self._answers[idx]

    def event_log(self) -> Sequence[PowerEvent]:
        return self._events


def sample_loop(observer: SystemObserver, clock: Clock,
                duration_s: int) -> Iterator[Sample]:
    """Yield one sample per second of clock time.

    The state is polled at the start of each second and attributed to
    that second (the sample's epoch is the second's end). An
    unavailable observer produces a gap, never a fabricated sample;
    gaps are reconciled later from the event log (derive_sleep) or
    attributed to the off state.
    """
    end = clock.now() + duration_s
    while clock.now() < end:
        try:
            state, battery = observer.poll()
        except ObserverUnavailable:
            clock.sleep(1)
            continue
        clock.sleep(1)
        yield Sample(int(clock.now()), state, battery)


@dataclass(frozen=True)
class SleepDerivation:
    sleep_s: int
    off_s: int
    open_since: float | None  # unmatched sleep-enter, attributed next window


def derive_sleep(events: Iterable[PowerEvent], window_start: float,
                 window_end: float) -> SleepDerivation:
    """Seconds asleep (and off) within a window, from the event log.

    A sleep-enter closed by a wake is a sleep span; closed by a boot it
    is an off span (the machine was shut down while suspended). Spans
    are clipped to the window. A sleep-enter still open at the window
    end is left open and counted when a later log closes it.
    """
    sleep_s = 0.0
    off_s = 0.0
    open_start: float | None = None
    for event in sorted(events, key=lambda e: e.epoch):
        if event.kind == EventKind.SLEEP_ENTER:
            if open_start is None:
                open_start = event.epoch
        elif open_start is not None:
            overlap = min(event.epoch, window_end) - max(open_start, window_start)
            if overlap > 0:
                if event.kind == EventKind.WAKE:
                    sleep_s += overlap
                else:
                    off_s += overlap
            open_start = None
    return SleepDerivation(int(round(sleep_s)), int(round(off_s)), open_start)


def accumulate(samples: Iterable[Sample], window_start: float, window_end: float,
               events: Iterable[PowerEvent] = ()) -> StateOccupancy:
    """Fold one-second samples into per-state occupancy for a window.

    Samples taken on battery count as battery seconds. Window seconds
    with no sample are attributed from the event log first (sleep, then
    off spans), and any remaining gap goes to the off state, the lowest
    draw, rather than being dropped silently.
    """
    occ = StateOccupancy()
    for sample in samples:
        if not window_start < sample.epoch <= window_end:
            continue
        if sample.battery.on_ac_power:
            occ.add(sample.state)
        else:
            occ.on_battery_seconds += 1
    gap = int(round(window_end - window_start)) - occ.total()
    if gap > 0:
        derived = derive_sleep(events, window_start, window_end)
        took = min(derived.sleep_s, gap)
        occ.add(PowerState.SLEEP, took)
        gap -= took
        took = min(derived.off_s, gap)
        occ.add(PowerState.OFF, took)
        gap -= took
        if gap > 0:
            occ.add(PowerState.OFF, gap)
    return occ


def interval_energy(occ: StateOccupancy, profile: MachinePowerProfile,
                    monitor_attached: bool = False,
                    charging: bool = False) -> EnergyReading:
    """Watt-hours for one reporting window.

    System draw is occupancy times per-state power (work at the
    short-idle rate); charging scales the system draw only, not an
    attached monitor. Battery seconds contribute nothing.
    """
    s = occ.seconds
    system_ws = (
        s[PowerState.OFF] * profile.p_off
        + s[PowerState.SLEEP] * profile.p_sleep
        + s[PowerState.IDLE] * profile.p_idle
        + (s[PowerState.SHORT_IDLE] + s[PowerState.WORK]) * profile.p_sidle
    )
    if charging:
        system_ws *= profile.charging_multiplier
    monitor_ws = 0.0
    if monitor_attached:
        monitor_ws = (
            (s[PowerState.SHORT_IDLE] + s[PowerState.WORK]) * profile.monitor_on
            + s[PowerState.IDLE] * profile.monitor_standby
            + (s[PowerState.OFF] + s[PowerState.SLEEP]) * profile.monitor_off
        )
    return EnergyReading((system_ws + monitor_ws) / 3600.0, occ)


def tec_annual(profile: MachinePowerProfile, fractions: TimeFractions) -> float:
    """Annualized total energy consumption estimate, in kWh.

    (8760 / 1000) * [P_off*T_off + P_sleep*T_sleep + P_idle*T_idle
                     + P_sidle*(T_sidle + T_work)]
    """
    total = fractions.total()
    if abs(total - 1.0) > 1e-9:
        raise FractionsDoNotSum(f"state-time fractions sum to {total!r}, not 1")
    return (HOURS_PER_YEAR / 1000.0) * (
        profile.p_off * fractions.t_off
        + profile.p_sleep * fractions.t_sleep
        + profile.p_idle * fractions.t_idle
        + profile.p_sidle * (fractions.t_sidle + fractions.t_work)
    )


def make_energy_report(user_id: str, occ: StateOccupancy,
                       profile: MachinePowerProfile, tsutc: datetime, *,
                       monitor_attached: bool = False,
                       charging: bool = False) -> Report | None:
    """Build the wire report for one window, or None when the whole
    window ran on battery (building draw was zero, so nothing to say)."""
    if occ.on_battery_seconds > 0 and occ.state_total() == 0:
        return None
    reading = interval_energy(occ, profile, monitor_attached, charging)
    payload: dict[str, float | int] = {"intervalWh": reading.interval_wh}
    for state in PowerState:
        payload[OCCUPANCY_NAMES[state]] = occ.seconds[state]
    payload[BATTERY_NAME] = occ.on_battery_seconds
    return Report(user_id, tsutc, SensorIndicator.ENERGY, payload)


def save_trace(path: str, samples: Iterable[tuple[int, PowerState, bool, bool]]) -> None:
    """Write a scripted trace: one line per second,
    `mm-dd-yy-HH:MM:SS state on_ac charging` with 1/0 flags."""
    with open(path, "w", encoding="ascii") as fh:
        for epoch, state, on_ac, charging in samples:
            ts = format_timestamp(utc_from_epoch(epoch))
            fh.write(f"{ts} {state.value} {int(on_ac)} {int(charging)}\n")


def load_trace(path: str) -> list[tuple[int, PowerState, bool, bool]]:
    out = []
    with open(path, encoding="ascii") as fh:
        for lineno, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                ts, state, on_ac, charging = raw.split()
                epoch = int(parse_timestamp(ts).timestamp())
                out.append((epoch, PowerState(state), on_ac == "1", charging == "1"))
            except (ValueError, KeyError) as exc:
                raise ValueError(f"{path}:{lineno}: bad trace line {raw!r}") from exc
    return out


def observer_from_trace(clock: Clock,
                        samples: Sequence[tuple[int, PowerState, bool, bool]],
                        events: Sequence[PowerEvent] = ()) -> ScriptedObserver:
    """Observer replaying a per-second trace; each line holds for its second."""
    segments = [(float(epoch), state, on_ac, charging)
                for epoch, state, on_ac, charging in samples]
    return ScriptedObserver(clock, segments, events=events)
