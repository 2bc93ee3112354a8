"""Wire serialization for report envelopes.

The exchange format is a single text line of name:value pairs, brace
delimited and comma separated, with names and string values quoted and
numbers bare::

    {"id": "u1", "tsutc": "03-14-22-09:30:00", "light":50, "tempC":25, "rh":60, "indicator": "ambsensor"}

Timestamps are UTC in ``mm-dd-yy-HH:MM:SS`` form; the parser also
accepts a single-digit hour, and two-digit years map to 2000-2099.
Whitespace between tokens is ignored. This is a fixed envelope grammar,
not general-purpose JSON: string values carry no escapes, and every
payload name must appear in the domain vocabulary. serialize and parse
are exact inverses on valid values.
"""

from __future__ import annotations

import re
from datetime import datetime, timedelta, timezone, tzinfo
from typing import Union
from zoneinfo import ZoneInfo

from .domain import ENVELOPE_NAMES, Report, SensorIndicator, Value, VOCABULARY


class WireFormatError(ValueError):
    """Base class for report parse failures."""


class MalformedLine(WireFormatError):
    pass


class MissingField(WireFormatError):
    def __init__(self, name: str):
        super().__init__(f"missing required field {name!r}")
        self.name = name


class UnknownName(WireFormatError):
    def __init__(self, name: str):
        super().__init__(f"payload name {name!r} is not in the vocabulary")
        self.name = name


class UnknownIndicator(WireFormatError):
    def __init__(self, value: str):
        super().__init__(f"unknown indicator {value!r}")
        self.value = value


class MalformedTimestamp(WireFormatError):
    def __init__(self, text: str):
        super().__init__(f"malformed timestamp {text!r}, expected mm-dd-yy-HH:MM:SS")
        self.text = text


class MalformedNumber(WireFormatError):
    pass


class WrongValueKind(WireFormatError):
    pass


class DuplicateName(WireFormatError):
    def __init__(self, name: str):
        super().__init__(f"duplicate name {name!r}")
        self.name = name


class InvalidTimezone(ValueError):
    pass


_WS = " \t\r\n"
_INT_RE = re.compile(r"-?\d+$")
_NUM_RE = re.compile(r"-?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?$")
_TS_RE = re.compile(r"(\d{2})-(\d{2})-(\d{2})-(\d{1,2}):(\d{2}):(\d{2})$")
_OFFSET_RE = re.compile(r"([+-])(\d{1,2})(?::(\d{2}))?$")


def format_timestamp(dt: datetime) -> str:
    """Render a UTC timestamp in wire form (hour zero-padded to two digits)."""
    if dt.tzinfo is None:
        raise ValueError("timestamps must be timezone-aware")
    return dt.astimezone(timezone.utc).strftime("%m-%d-%y-%H:%M:%S")


def parse_timestamp(text: str) -> datetime:
    m = _TS_RE.match(text)
    if not m:
        raise MalformedTimestamp(text)
    mm, dd, yy, hh, mi, ss = (int(g) for g in m.groups())
    try:
        return datetime(2000 + yy, mm, dd, hh, mi, ss, tzinfo=timezone.utc)
    except ValueError:
        raise MalformedTimestamp(text) from None


def _format_number(value: Union[int, float]) -> str:
    if isinstance(value, int):
        return str(value)
    return repr(value)


def serialize_report(report: Report) -> str:
    """Render a Report as one wire line.

    Strings are quoted with a space after the colon; numbers are bare
    and compact. Pair order is id, tsutc, payload (in payload order),
    indicator.
    """
    parts = [
        f'"id": "{report.id}"',
        f'"tsutc": "{format_timestamp(report.tsutc)}"',
    ]
    for name, value in report.payload.items():
        if isinstance(value, str):
            parts.append(f'"{name}": "{value}"')
        else:
            parts.append(f'"{name}":{_format_number(value)}')
    parts.append(f'"indicator": "{report.indicator.value}"')
    return "{" + ", ".join(parts) + "}"


def _scan_pairs(line: str) -> list[tuple[str, Value, bool]]:
    """Tokenize one wire line into (name, value, is_string) triples."""
    n = len(line)

    def skip_ws(i: int) -> int:
        while i < n and line[i] in _WS:
            i += 1
        return i

    i = skip_ws(0)
    if i >= n or line[i] != "{":
        raise MalformedLine("report must start with '{'")
    i = skip_ws(i + 1)
    pairs: list[tuple[str, Value, bool]] = []
    if i < n and line[i] == "}":
        i += 1
    else:
        while True:
            if i >= n or line[i] != '"':
                raise MalformedLine(f"expected quoted name at column {i}")
            j = line.find('"', i + 1)
            if j < 0:
                raise MalformedLine("unterminated name")
            name = line[i + 1:j]
            if not name:
                raise MalformedLine("empty name")
            i = skip_ws(j + 1)
            if i >= n or line[i] != ":":
                raise MalformedLine(f"expected ':' after {name!r}")
            i = skip_ws(i + 1)
            if i < n and line[i] == '"':
                j = line.find('"', i + 1)
                if j < 0:
                    raise MalformedLine(f"unterminated string value for {name!r}")
                pairs.append((name, line[i + 1:j], True))
                i = skip_ws(j + 1)
            else:
                j = i
                while j < n and line[j] not in ",}" and line[j] not in _WS:
                    j += 1
                token = line[i:j]
                if not token:
                    raise MalformedLine(f"missing value for {name!r}")
                if not _NUM_RE.match(token):
                    raise MalformedNumber(f"malformed number {token!r} for {name!r}")
                value = int(token) if _INT_RE.match(token) else float(token)
                pairs.append((name, value, False))
                i = skip_ws(j)
            if i >= n:
                raise MalformedLine("missing closing '}'")
            if line[i] == ",":
                i = skip_ws(i + 1)
                continue
            if line[i] == "}":
                i += 1
                break
            raise MalformedLine(f"expected ',' or '}}' at column {i}")
    if skip_ws(i) != n:
        raise MalformedLine("trailing characters after '}'")
    return pairs


def parse_report(line: str) -> Report:
    """Parse one wire line into a typed Report.

    Envelope fields may appear in any position; payload order is kept
    as encountered. Duplicate names are rejected.
    """
    envelope: dict[str, str] = {}
    payload: dict[str, Value] = {}
    seen: set[str] = set()
    for name, value, is_string in _scan_pairs(line):
        if name in seen:
            raise DuplicateName(name)
        seen.add(name)
        if name in ENVELOPE_NAMES:
            if not is_string:
                raise MalformedLine(f"envelope field {name!r} must be a quoted string")
            envelope[name] = value  # type: ignore[assignment]
            continue
        entry = VOCABULARY.get(name)
        if entry is None:
            raise UnknownName(name)
        if entry.kind == "number" and is_string:
            raise MalformedNumber(f"{name!r} requires a bare numeric value")
        if entry.kind == "string" and not is_string:
            raise WrongValueKind(f"{name!r} requires a quoted string value")
        payload[name] = value
    for name in ENVELOPE_NAMES:
        if name not in envelope:
            raise MissingField(name)
    if not envelope["id"]:
        raise MissingField("id")
    try:
        indicator = SensorIndicator(envelope["indicator"])
    except ValueError:
        raise UnknownIndicator(envelope["indicator"]) from None
    return Report(envelope["id"], parse_timestamp(envelope["tsutc"]), indicator, payload)


def resolve_timezone(tz: Union[tzinfo, str, int, float]) -> tzinfo:
    """Accept a tzinfo, fixed offset (+2, '+02:00', '-5'), or zone name."""
    if isinstance(tz, tzinfo):
        return tz
    if isinstance(tz, bool):
        raise InvalidTimezone(repr(tz))
    if isinstance(tz, (int, float)):
        if not -24 < tz < 24:
            raise InvalidTimezone(str(tz))
        return timezone(timedelta(hours=tz))
    if isinstance(tz, str):
        m = _OFFSET_RE.match(tz)
        if m:
            sign = 1 if m.group(1) == "+" else -1
            hours, minutes = int(m.group(2)), int(m.group(3) or 0)
            if hours > 23 or minutes > 59:
                raise InvalidTimezone(tz)
            return timezone(sign * timedelta(hours=hours, minutes=minutes))
        try:
            return ZoneInfo(tz)
        except Exception:
            raise InvalidTimezone(tz) from None
    raise InvalidTimezone(repr(tz))


def to_local(ts: datetime, tz: Union[tzinfo, str, int, float]) -> datetime:
    """Express a UTC instant in a presentation timezone. Storage stays UTC;
    this is for presentation boundaries only."""
    if ts.tzinfo is None:
        raise ValueError("timestamp must be timezone-aware")
    return ts.astimezone(resolve_timezone(tz))
