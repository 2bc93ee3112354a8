"""Edge agent: samples ambient conditions and power states, assembles
reports, and pushes them to the ingestion service on a fixed cadence.

The agent ticks once per second of clock time. Power-state occupancy is
counted every tick; the ambient backend is read every sample interval;
on each report interval the agent emits one ambient report (the most
recent sample) and one energy report, pushing any buffered backlog
first so emission stays in timestamp order. Failed posts are buffered
and retried next cycle, oldest dropped beyond capacity, so memory stays
flat through long outages.
"""

from __future__ import annotations

import logging
import math
import random
from collections import deque
from dataclasses import dataclass
from typing import Optional, Protocol

import requests

from .clock import Clock, utc_from_epoch
from .domain import AmbientReading, ambient_report
from .energy import (MachinePowerProfile, ObserverUnavailable, PowerState,
                     StateOccupancy, SystemObserver, derive_sleep,
                     make_energy_report)
from .wire import serialize_report

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class AgentConfig:
    user_id: str
    ingestion_url: str = ""
    sample_interval_s: int = 5
    report_interval_s: int = 30
    buffer_capacity: int = 1000

    def __post_init__(self):
        if self.sample_interval_s < 1:
            raise ValueError("sample interval must be >= 1 s")
        if self.report_interval_s < self.sample_interval_s:
            raise ValueError("report interval must be >= sample interval")
        if self.buffer_capacity < 1:
            raise ValueError("buffer capacity must be >= 1")


_CONFIG_KEYS = {
    "user_id": str,
    "ingestion_url": str,
    "sample_interval_s": int,
    "report_interval_s": int,
    "buffer_capacity": int,
}


def load_agent_config(path: str, **overrides) -> AgentConfig:
    """Build an AgentConfig from a key=value file.

    Blank lines and '#' comments are ignored; unknown keys are errors.
    Explicit keyword overrides (CLI flags) win over file values.
    """
    values: dict = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key = key.strip()
            if not sep or key not in _CONFIG_KEYS:
                raise ValueError(f"{path}:{lineno}: bad config line {raw.strip()!r}")
            values[key] = _CONFIG_KEYS[key](value.strip())
    values.update({k: v for k, v in overrides.items() if v is not None})
    return AgentConfig(**values)


class AmbientBackend(Protocol):
    """Sensor binding; read() must be non-blocking or bounded-time."""

    def read(self) -> AmbientReading:
        ...


def simulate_ambient(t: float, seed: int = 0, *, mean_temp: float = 22.0,
                     temp_amplitude: float = 3.0, mean_rh: float = 45.0,
                     rh_amplitude: float = 10.0) -> AmbientReading:
    """Deterministic stand-in for the desk sensor stick.

    Diurnal sinusoids around the configured means plus seeded noise;
    light is a day/night step. The same (seed, t) always yields the
    same reading.
    """
    rng = random.Random((seed << 24) ^ int(t))
    day_frac = (t % 86400.0) / 86400.0
    temp = mean_temp + temp_amplitude * math.sin(2 * math.pi * (day_frac - 0.25)) \
        + rng.gauss(0.0, 0.3)
    rh = mean_rh + rh_amplitude * math.sin(2 * math.pi * (day_frac + 0.5)) \
        + rng.gauss(0.0, 1.0)
    if 7.0 <= day_frac * 24.0 < 19.0:
        light = 300.0 + rng.uniform(-30.0, 30.0)
    else:
        light = 5.0 + rng.uniform(0.0, 2.0)
    return AmbientReading(
        light=round(max(light, 0.0), 2),
        temp_c=round(min(max(temp, -40.0), 85.0), 2),
        rh=round(min(max(rh, 0.0), 100.0), 2),
    )


class SimulatedAmbientBackend:
    """Clock-driven simulated sensor stick."""

    def __init__(self, clock: Clock, seed: int = 0, **params):
        self._clock = clock
        self._seed = seed
        self._params = params

    def read(self) -> AmbientReading:
        return simulate_ambient(self._clock.now(), self._seed, **self._params)


class Transport(Protocol):
    def post(self, line: str) -> bool:
        ...


class HttpTransport:
    """Posts wire lines to the ingestion sensor endpoint; any transport
    or non-2xx failure reports False so the sender buffers the line."""

    def __init__(self, base_url: str, path: str = "/sensor", timeout: float = 5.0,
                 session: Optional[requests.Session] = None):
        self._url = base_url.rstrip("/") + path
        self._timeout = timeout
        self._session = session or requests.Session()

    def post(self, line: str) -> bool:
        try:
            resp = self._session.post(self._url, data=line.encode("utf-8"),
                                      timeout=self._timeout)
        except requests.RequestException as exc:
            log.warning("post to %s failed: %s", self._url, exc)
            return False
        if not 200 <= resp.status_code < 300:
            log.warning("post to %s rejected: %s %s", self._url,
                        resp.status_code, resp.text[:200])
            return False
        return True


class InMemoryTransport:
    """Direct in-process delivery to an ingestion service; lossless
    unless marked down. Used for fleet simulation and tests."""

    def __init__(self, service, endpoint: str = "sensor"):
        self._service = service
        self._endpoint = endpoint
        self.down = False
        self.delivered = 0

    def post(self, line: str) -> bool:
        if self.down:
            return False
        if self._endpoint == "meter":
            status, _ = self._service.handle_meter_post(line)
        else:
            status, _ = self._service.handle_sensor_post(line)
        ok = 200 <= status < 300
        if ok:
            self.delivered += 1
        return ok


class ReportSender:
    """Cycle-aligned push with a bounded retry buffer.

    Each dispatch first drains the buffer oldest-first, then sends the
    new lines, so delivery order equals emission order. On the first
    failure the rest of the queue is re-buffered; beyond capacity the
    oldest lines are dropped and counted.
    """

    def __init__(self, transport: Transport, capacity: int):
        self._transport = transport
        self._capacity = capacity
        self._pending: deque[str] = deque()
        self.dropped = 0
        self.sent = 0

    def __len__(self) -> int:
        return len(self._pending)

    def dispatch(self, lines: list[str]) -> int:
        queue = list(self._pending) + list(lines)
        self._pending.clear()
        sent = 0
        for i, line in enumerate(queue):
            if self._transport.post(line):
                sent += 1
                continue
            self._pending.extend(queue[i:])
            while len(self._pending) > self._capacity:
                self._pending.popleft()
                self.dropped += 1
            break
        self.sent += sent
        return sent


def fetch_profile(base_url: str, user_id: str, timeout: float = 5.0) -> MachinePowerProfile:
    """Fetch the machine's per-state power profile from the backend
    configuration endpoint (set at provisioning time)."""
    url = base_url.rstrip("/") + f"/profile/{user_id}"
    resp = requests.get(url, timeout=timeout)
    resp.raise_for_status()
    return MachinePowerProfile(**resp.json()["profile"])


class Agent:
    """One monitored machine: tick() once per second of clock time."""

    def __init__(self, config: AgentConfig, profile: MachinePowerProfile,
                 ambient: AmbientBackend, observer: SystemObserver,
                 transport: Transport, clock: Clock,
                 *, monitor_attached: bool = False):
        self.config = config
        self.profile = profile
        self.ambient = ambient
        self.observer = observer
        self.clock = clock
        self.monitor_attached = monitor_attached
        self.sender = ReportSender(transport, config.buffer_capacity)
        self.moved = False  # host relocated: ambient readings stop
        self.ambient_reports = 0
        self.energy_reports = 0
        self._window_start: Optional[int] = None
        self._occupancy = StateOccupancy()
        self._charging_seen = False
        self._latest_sample: Optional[AmbientReading] = None
        self._sample_fresh = False

    def tick(self) -> None:
        t = int(self.clock.now())
        if self._window_start is None:
            # first tick: the window covers only observed seconds
            self._window_start = t - 1
        try:
            state, battery = self.observer.poll()
        except ObserverUnavailable:
            pass
        else:
            if battery.on_ac_power:
                self._occupancy.add(state)
                if battery.charging:
                    self._charging_seen = True
            else:
                self._occupancy.on_battery_seconds += 1
        if t % self.config.sample_interval_s == 0 and not self.moved:
            try:
                self._latest_sample = self.ambient.read()
                self._sample_fresh = True
            except Exception as exc:
                log.warning("ambient read failed for %s: %s",
                            self.config.user_id, exc)
        if t % self.config.report_interval_s == 0:
            self._emit(t)

    def _emit(self, t: int) -> None:
        tsutc = utc_from_epoch(t)
        lines: list[str] = []
        if self._sample_fresh and not self.moved and self._latest_sample is not None:
            rep = ambient_report(self.config.user_id, tsutc, self._latest_sample)
            lines.append(serialize_report(rep))
            self.ambient_reports += 1
        occ = self._reconciled_occupancy(t)
        energy = make_energy_report(
            self.config.user_id, occ, self.profile, tsutc,
            monitor_attached=self.monitor_attached, charging=self._charging_seen)
        if energy is not None:
            lines.append(serialize_report(energy))
            self.energy_reports += 1
        if lines:
            self.sender.dispatch(lines)
        self._window_start = t
        self._occupancy = StateOccupancy()
        self._charging_seen = False
        self._sample_fresh = False

    def _reconciled_occupancy(self, window_end: int) -> StateOccupancy:
        """Fill observer gaps from the event log (sleep, then off spans);
        anything still unaccounted is attributed to off."""
        occ = self._occupancy
        gap = (window_end - self._window_start) - occ.total()
        if gap > 0:
            derived = derive_sleep(self.observer.event_log(),
                                   self._window_start, window_end)
            took = min(derived.sleep_s, gap)
            occ.add(PowerState.SLEEP, took)
            gap -= took
            took = min(derived.off_s, gap)
            occ.add(PowerState.OFF, took)
            gap -= took
            if gap > 0:
                occ.add(PowerState.OFF, gap)
        return occ


def run_agent(config: AgentConfig, profile: MachinePowerProfile,
              ambient: AmbientBackend, observer: SystemObserver,
              transport: Transport, clock: Clock, duration_s: int, *,
              monitor_attached: bool = False) -> Agent:
    """Run one agent for a duration of clock time and return it.

    With a SimClock this is the fleet-simulation entry point: a full
    day completes in well under a minute of wall time.
    """
    agent = Agent(config, profile, ambient, observer, transport, clock,
                  monitor_attached=monitor_attached)
    for _ in range(duration_s):
        clock.sleep(1)
        agent.tick()
    return agent
