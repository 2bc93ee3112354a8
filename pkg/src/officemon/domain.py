"""Shared domain vocabulary for the monitoring system.

Defines the sensor indicator set, the typed readings each sensor family
produces, the report envelope every producer serializes onto the wire,
and the single vocabulary table of payload names. Engineering units are
implicit on the wire; this table documents them instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from typing import Mapping, Union

Value = Union[int, float, str]

#: Envelope names; always present, never payload.
ENVELOPE_NAMES = ("id", "tsutc", "indicator")


class SensorIndicator(str, Enum):
    """Stream-type tag carried in every report. Closed set; the parser
    rejects anything else."""

    AMBIENT = "ambsensor"
    ENERGY = "energysensor"
    PLUG_METER = "plugmeter"
    WEATHER = "weather"
    COMFORT = "comfort"


@dataclass(frozen=True)
class VocabEntry:
    kind: str  # "number" or "string"
    unit: str
    description: str


#: Every payload name used anywhere in the system. The wire parser
#: rejects names outside this table.
VOCABULARY: Mapping[str, VocabEntry] = {
    # ambient sensor
    "light": VocabEntry("number", "level", "light level (unitless sensor scale)"),
    "tempC": VocabEntry("number", "degC", "temperature"),
    "rh": VocabEntry("number", "%", "relative humidity"),
    # software energy sensor
    "intervalWh": VocabEntry("number", "Wh", "energy used since the previous report"),
    "offSec": VocabEntry("number", "s", "seconds powered off in the interval"),
    "sleepSec": VocabEntry("number", "s", "seconds asleep in the interval"),
    "idleSec": VocabEntry("number", "s", "seconds idle, screen off, in the interval"),
    "sidleSec": VocabEntry("number", "s", "seconds in short idle, screen on, in the interval"),
    "workSec": VocabEntry("number", "s", "seconds executing a workload in the interval"),
    "batterySec": VocabEntry("number", "s", "seconds on battery power (not billed)"),
    # plug-load meter
    "watts": VocabEntry("number", "W", "instantaneous power draw"),
    "kwh": VocabEntry("number", "kWh", "lifetime cumulative energy"),
    # weather service
    "outdoorTempC": VocabEntry("number", "degC", "outdoor temperature"),
    "outdoorRhPct": VocabEntry("number", "%", "outdoor relative humidity"),
    "conditions": VocabEntry("string", "", "short-text weather conditions"),
    "location": VocabEntry("string", "", "site identifier"),
    # occupant comfort
    "vote": VocabEntry("number", "", "thermal sensation vote, -3 very cold to +3 very hot"),
    "zone": VocabEntry("string", "", "HVAC zone the vote applies to"),
}


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ValueError(message)


@dataclass(frozen=True)
class AmbientReading:
    """One sample from the desk-side ambient sensor."""

    light: float
    temp_c: float
    rh: float

    def __post_init__(self):
        _require(self.light >= 0, f"light must be >= 0, got {self.light}")
        _require(-40 <= self.temp_c <= 85, f"tempC outside sensor range: {self.temp_c}")
        _require(0 <= self.rh <= 100, f"rh must be within [0, 100], got {self.rh}")

    def payload(self) -> dict[str, Value]:
        return {"light": self.light, "tempC": self.temp_c, "rh": self.rh}


@dataclass(frozen=True)
class ComfortVote:
    """Thermal sensation vote on the seven-point scale."""

    value: int
    zone: str

    def __post_init__(self):
        _require(isinstance(self.value, int) and not isinstance(self.value, bool),
                 "vote must be an integer")
        _require(-3 <= self.value <= 3, f"vote outside [-3, +3]: {self.value}")
        _require(bool(self.zone), "zone must be non-empty")

    def payload(self) -> dict[str, Value]:
        return {"vote": self.value, "zone": self.zone}


@dataclass(frozen=True)
class MeterReading:
    """Instantaneous draw and lifetime energy from a plug-load meter."""

    watts: float
    cumulative_kwh: float

    def __post_init__(self):
        _require(self.watts >= 0, f"watts must be >= 0, got {self.watts}")
        _require(self.cumulative_kwh >= 0, "cumulative kWh must be >= 0")

    def payload(self) -> dict[str, Value]:
        return {"watts": self.watts, "kwh": self.cumulative_kwh}


@dataclass(frozen=True)
class WeatherReading:
    """Outdoor conditions for a site, from the weather provider."""

    outdoor_temp_c: float
    outdoor_rh_pct: float
    conditions: str
    location: str

    def __post_init__(self):
        _require(0 <= self.outdoor_rh_pct <= 100,
                 f"outdoor rh must be within [0, 100], got {self.outdoor_rh_pct}")
        _require(bool(self.location), "location must be non-empty")

    def payload(self) -> dict[str, Value]:
        return {
            "outdoorTempC": self.outdoor_temp_c,
            "outdoorRhPct": self.outdoor_rh_pct,
            "conditions": self.conditions,
            "location": self.location,
        }


@dataclass(frozen=True)
class Report:
    """The on-the-wire telemetry envelope.

    Carries the producer id, a UTC timestamp at second resolution, an
    ordered payload of vocabulary names, and the sensor-type indicator.
    Construction normalizes the timestamp to UTC and validates payload
    names and value kinds, so a valid Report always serializes cleanly.
    """

    id: str
    tsutc: datetime
    indicator: SensorIndicator
    payload: Mapping[str, Value] = field(default_factory=dict)

    def __post_init__(self):
        _require(isinstance(self.id, str) and bool(self.id), "id must be a non-empty string")
        _require('"' not in self.id, "id must not contain quotes")
        if self.tsutc.tzinfo is None:
            raise ValueError("tsutc must be timezone-aware (UTC internally)")
        object.__setattr__(self, "tsutc",
                           self.tsutc.astimezone(timezone.utc).replace(microsecond=0))
        object.__setattr__(self, "indicator", SensorIndicator(self.indicator))
        payload = dict(self.payload)
        for name, value in payload.items():
            entry = VOCABULARY.get(name)
            if entry is None or name in ENVELOPE_NAMES:
                raise ValueError(f"payload name {name!r} is not in the vocabulary")
            if entry.kind == "number":
                if isinstance(value, bool) or not isinstance(value, (int, float)):
                    raise ValueError(f"{name!r} requires a numeric value, got {value!r}")
                if isinstance(value, float) and not math.isfinite(value):
                    raise ValueError(f"{name!r} must be finite, got {value!r}")
            else:
                if not isinstance(value, str):
                    raise ValueError(f"{name!r} requires a string value, got {value!r}")
                _require('"' not in value, f"{name!r} value must not contain quotes")
        object.__setattr__(self, "payload", payload)


def ambient_report(user_id: str, tsutc: datetime, reading: AmbientReading) -> Report:
    return Report(user_id, tsutc, SensorIndicator.AMBIENT, reading.payload())


def comfort_report(user_id: str, tsutc: datetime, vote: ComfortVote) -> Report:
    return Report(user_id, tsutc, SensorIndicator.COMFORT, vote.payload())


def meter_report(meter_id: str, tsutc: datetime, reading: MeterReading) -> Report:
    return Report(meter_id, tsutc, SensorIndicator.PLUG_METER, reading.payload())


def weather_report(tsutc: datetime, reading: WeatherReading) -> Report:
    # the site location doubles as the stream owner id
    return Report(reading.location, tsutc, SensorIndicator.WEATHER, reading.payload())
