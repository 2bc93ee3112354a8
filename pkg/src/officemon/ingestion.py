"""Ingestion service: the write path between producers and the sensor
store.

Agents push wire lines to the sensor endpoint; plug-load meters post to
their own endpoint; a poller fetches outdoor weather on a programmable
interval and feeds it through the same writer. Every accepted document
is appended synchronously before the 2xx goes out, so a producer's ack
really means stored, and producers stay decoupled from the storage
implementation behind this service.
"""

from __future__ import annotations

import json
import logging
from typing import Optional, Protocol

from .clock import Clock, SystemClock, utc_from_epoch
from .domain import SensorIndicator, WeatherReading, weather_report
from .stores import DataStores, stream_id
from .wire import WireFormatError, parse_report, serialize_report

log = logging.getLogger(__name__)

#: Indicators accepted on the sensor endpoint; meters have their own.
SENSOR_INDICATORS = frozenset({
    SensorIndicator.AMBIENT, SensorIndicator.ENERGY,
    SensorIndicator.COMFORT, SensorIndicator.WEATHER,
})

KWH_DECREASED_FLAG = "kwh_decreased"


class IngestionService:
    """Parses, validates, and appends pushed reports.

    Status contract: 400 for anything the parser rejects, 404 when the
    sender is not provisioned (its stream does not exist), 503 when the
    store fails so the producer keeps the report buffered and retries.
    """

    def __init__(self, stores: DataStores, clock: Optional[Clock] = None):
        self.stores = stores
        self.clock = clock or SystemClock()

    def _receive_time(self):
        return utc_from_epoch(self.clock.now())

    def handle_sensor_post(self, body: str) -> tuple[int, str]:
        try:
            report = parse_report(body)
        except WireFormatError as exc:
            return 400, str(exc)
        if report.indicator not in SENSOR_INDICATORS:
            return 400, f"indicator {report.indicator.value!r} is not accepted " \
                        f"on the sensor endpoint"
        sid = stream_id(report.id, report.indicator)
        if not self.stores.sensors.has_stream(sid):
            return 404, f"id {report.id!r} has no {report.indicator.value} stream; " \
                        f"provision it first"
        try:
            self.stores.sensors.append(sid, report.tsutc, dict(report.payload),
                                       self._receive_time())
        except Exception:
            log.exception("store append failed for %s", sid)
            return 503, "store failure; retry"
        return 200, "ok"

    def handle_meter_post(self, body: str) -> tuple[int, str]:
        """Meter intake: same envelope, `watts`/`kwh` payload. A cumulative
        counter that runs backwards is stored anyway but flagged for the
        console (corrupted or replaced meter)."""
        try:
            report = parse_report(body)
        except WireFormatError as exc:
            return 400, str(exc)
        if report.indicator is not SensorIndicator.PLUG_METER:
            return 400, "meter endpoint accepts only plugmeter reports"
        if not self.stores.metadata.has_meter(report.id):
            return 404, f"meter {report.id!r} is not registered"
        sid = stream_id(report.id, SensorIndicator.PLUG_METER)
        flags: tuple[str, ...] = ()
        new_kwh = report.payload.get("kwh")
        previous = self.stores.sensors.last(sid)
        if (previous is not None and new_kwh is not None
                and isinstance(previous.payload.get("kwh"), (int, float))
                and new_kwh < previous.payload["kwh"]):
            flags = (KWH_DECREASED_FLAG,)
        try:
            self.stores.sensors.append(sid, report.tsutc, dict(report.payload),
                                       self._receive_time(), flags)
        except Exception:
            log.exception("store append failed for %s", sid)
            return 503, "store failure; retry"
        return 200, "ok"

    def handle_profile_get(self, user_id: str) -> tuple[int, str]:
        """Configuration surface: the per-state power values assigned to
        a machine at provisioning, for the energy sensor to apply."""
        try:
            record = self.stores.get_user(user_id)
        except LookupError:
            return 404, f"no such user {user_id!r}"
        return 200, json.dumps({
            "userId": user_id,
            "machineType": record.machine_type,
            "monitorAttached": record.monitor_attached,
            "profile": vars(record.profile),
        })

    def handle_health(self) -> tuple[int, str]:
        return 200, "ok"


class WeatherProvider(Protocol):
    """Outdoor-conditions source; fetch must be bounded-time and may
    raise, which skips that polling cycle."""

    def fetch(self, location: str) -> WeatherReading:
        ...


class StubWeatherProvider:
    """Fixed or scripted provider for tests and offline demos."""

    def __init__(self, temp_c: float = 18.0, rh_pct: float = 55.0,
                 conditions: str = "clear", fail_every: int = 0):
        self.temp_c = temp_c
        self.rh_pct = rh_pct
        self.conditions = conditions
        self.fail_every = fail_every  # every Nth call raises (1-based)
        self.calls = 0

    def fetch(self, location: str) -> WeatherReading:
        self.calls += 1
        if self.fail_every and self.calls % self.fail_every == 0:
            raise ConnectionError("stub provider scripted failure")
        return WeatherReading(self.temp_c, self.rh_pct, self.conditions, location)


class FileWeatherProvider:
    """Reads current conditions from a JSON file on every fetch, so a
    fixture file can stand in for the public weather service."""

    def __init__(self, path: str):
        self._path = path

    def fetch(self, location: str) -> WeatherReading:
        with open(self._path, encoding="utf-8") as fh:
            data = json.load(fh)
        return WeatherReading(data["tempC"], data["rhPct"],
                              data.get("conditions", ""), location)


class WeatherPoller:
    """Appends one site weather document per interval via the ingestion
    writer; provider failures skip the cycle rather than fabricating a
    gap-filling document."""

    def __init__(self, service: IngestionService, provider: WeatherProvider,
                 location: str, interval_min: float = 15,
                 clock: Optional[Clock] = None):
        self.service = service
        self.provider = provider
        self.location = location
        self.interval_s = int(interval_min * 60)
        self.clock = clock or service.clock
        self.stored = 0
        self.skipped = 0
        service.stores.register_site(location)

    def tick(self) -> bool:
        try:
            reading = self.provider.fetch(self.location)
        except Exception as exc:
            log.warning("weather fetch for %s failed: %s", self.location, exc)
            self.skipped += 1
            return False
        report = weather_report(utc_from_epoch(self.clock.now()), reading)
        status, message = self.service.handle_sensor_post(serialize_report(report))
        if status != 200:
            log.warning("weather post rejected: %s %s", status, message)
            self.skipped += 1
            return False
        self.stored += 1
        return True

    def run(self, duration_s: int) -> None:
        ticks = duration_s // self.interval_s
        for _ in range(ticks):
            self.clock.sleep(self.interval_s)
            self.tick()


def serve(service: IngestionService, host: str = "127.0.0.1", port: int = 8080):
    """Bind the service to a threaded HTTP server (returned unstarted)."""
    from . import httpglue

    routes = [
        ("POST", r"/sensor", lambda m, body, q: service.handle_sensor_post(body)),
        ("POST", r"/meter", lambda m, body, q: service.handle_meter_post(body)),
        ("GET", r"/health", lambda m, body, q: service.handle_health()),
        ("GET", r"/profile/(?P<uid>[^/]+)",
         lambda m, body, q: service.handle_profile_get(m.group("uid"))),
    ]
    return httpglue.build_server(host, port, routes)
