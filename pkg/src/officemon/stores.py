"""Dual persistence: schemaless sensor streams plus relational-style
user metadata, correlated by shared keys.

The sensor store holds append-only time series keyed by stream id,
where a stream id is derived bijectively from (owner id, indicator).
The metadata store holds provisioning records, group memberships,
notifications, and the derived analytics values. Both sit behind
narrow interfaces so the implementations can evolve independently;
the memory-backed versions here (with plain-text export and an
optional append journal) satisfy desk scale.
"""

from __future__ import annotations

import bisect
import json
import os
import threading
from dataclasses import dataclass
from datetime import date, datetime, timezone
from typing import Any, Iterable, Optional

from .clock import epoch_from_utc
from .domain import SensorIndicator, Value
from .energy import MachinePowerProfile


class UnknownStream(LookupError):
    def __init__(self, stream: str):
        super().__init__(f"unknown stream {stream!r}; owner not provisioned")
        self.stream = stream


class NotFound(LookupError):
    pass


class DuplicateUser(ValueError):
    pass


class InvalidRecord(ValueError):
    pass


GROUP_KINDS = ("department", "floor", "building")


def stream_id(owner: str, indicator: SensorIndicator) -> str:
    """Key for the (owner, sensor-type) time series. Bijective: the
    indicator is a closed token set, so rsplit on ':' inverts it."""
    return f"{owner}:{SensorIndicator(indicator).value}"


def split_stream_id(stream: str) -> tuple[str, SensorIndicator]:
    owner, _, tag = stream.rpartition(":")
    if not owner:
        raise ValueError(f"not a stream id: {stream!r}")
    return owner, SensorIndicator(tag)


@dataclass(frozen=True)
class SensorDocument:
    """One stored observation: the parsed report payload plus the
    server's receive-time annotation. Payload values are never mutated
    by storage."""

    stream: str
    tsutc: datetime
    payload: dict[str, Value]
    receive_time: datetime
    flags: tuple[str, ...] = ()


class _Stream:
    __slots__ = ("docs", "keys", "sorted_ok", "lock")

    def __init__(self):
        self.docs: list[SensorDocument] = []
        self.keys: list[int] = []  # epoch seconds, valid for bisect while sorted_ok
        self.sorted_ok = True
        self.lock = threading.Lock()


class SensorStore:
    """Append-only schemaless time-series store.

    Appends to distinct streams proceed in parallel; appends within a
    stream are serialized by a per-stream lock. Range reads return
    documents ascending by timestamp, ties broken by receive time then
    arrival order. When a journal path is set, every append is written
    through before it is acknowledged.
    """

    def __init__(self, journal_path: Optional[str] = None):
        self._streams: dict[str, _Stream] = {}
        self._registry_lock = threading.Lock()
        self._journal_lock = threading.Lock()
        self._journal = open(journal_path, "a", encoding="utf-8") if journal_path else None

    def create_stream(self, stream: str) -> None:
        with self._registry_lock:
            self._streams.setdefault(stream, _Stream())

    def has_stream(self, stream: str) -> bool:
        return stream in self._streams

    def streams(self) -> list[str]:
        return sorted(self._streams)

    def _get(self, stream: str) -> _Stream:
        try:
            return self._streams[stream]
        except KeyError:
            raise UnknownStream(stream) from None

    def append(self, stream: str, tsutc: datetime, payload: dict[str, Value],
               receive_time: datetime, flags: tuple[str, ...] = ()) -> int:
        """Append one document; returns its position in the stream."""
        s = self._get(stream)
        doc = SensorDocument(stream, tsutc, dict(payload), receive_time, tuple(flags))
        key = epoch_from_utc(tsutc)
        with s.lock:
            if s.keys and key < s.keys[-1]:
                s.sorted_ok = False
            s.docs.append(doc)
            s.keys.append(key)
            position = len(s.docs) - 1
        if self._journal is not None:
            with self._journal_lock:
                self._journal.write(_doc_to_json(doc) + "\n")
                self._journal.flush()
        return position

    def query_range(self, stream: str, start: datetime, end: datetime) -> list[SensorDocument]:
        """Documents with start <= tsutc < end, ascending."""
        if start > end:
            raise ValueError("range start must not be after end")
        s = self._get(stream)
        lo, hi = epoch_from_utc(start), epoch_from_utc(end)
        with s.lock:
            if s.sorted_ok:
                i = bisect.bisect_left(s.keys, lo)
                j = bisect.bisect_left(s.keys, hi)
                return s.docs[i:j]
            ordered = sorted(
                (doc for doc, key in zip(s.docs, s.keys) if lo <= key < hi),
                key=lambda d: (epoch_from_utc(d.tsutc), epoch_from_utc(d.receive_time)),
            )
            return ordered

    def count(self, stream: str) -> int:
        return len(self._get(stream).docs)

    def at(self, stream: str, position: int) -> SensorDocument:
        return self._get(stream).docs[position]

    def last(self, stream: str) -> Optional[SensorDocument]:
        """The document with the greatest timestamp (latest arrival on ties)."""
        s = self._get(stream)
        with s.lock:
            if not s.docs:
                return None
            if s.sorted_ok:
                return s.docs[-1]
            _, idx = max(zip(s.keys, range(len(s.docs))))
            return s.docs[idx]

    def export_jsonl(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for stream in self.streams():
                fh.write(json.dumps({"stream": stream, "create": True}) + "\n")
                for doc in self._streams[stream].docs:
                    fh.write(_doc_to_json(doc) + "\n")

    def import_jsonl(self, path: str) -> int:
        n = 0
        with open(path, encoding="utf-8") as fh:
            for raw in fh:
                raw = raw.strip()
                if not raw:
                    continue
                rec = json.loads(raw)
                if rec.get("create"):
                    self.create_stream(rec["stream"])
                    continue
                doc = _doc_from_json(rec)
                self.create_stream(doc.stream)
                self.append(doc.stream, doc.tsutc, doc.payload,
                            doc.receive_time, doc.flags)
                n += 1
        return n


def _iso(dt: datetime) -> str:
    return dt.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _from_iso(text: str) -> datetime:
    return datetime.strptime(text, "%Y-%m-%dT%H:%M:%SZ").replace(tzinfo=timezone.utc)


def _doc_to_json(doc: SensorDocument) -> str:
    return json.dumps({
        "stream": doc.stream,
        "tsutc": _iso(doc.tsutc),
        "receive": _iso(doc.receive_time),
        "flags": list(doc.flags),
        "payload": doc.payload,
    }, separators=(",", ":"))


def _doc_from_json(rec: dict) -> SensorDocument:
    return SensorDocument(rec["stream"], _from_iso(rec["tsutc"]), rec["payload"],
                          _from_iso(rec["receive"]), tuple(rec.get("flags", ())))


@dataclass(frozen=True)
class UserRecord:
    """Static provisioning metadata for one user/machine."""

    user_id: str
    office_location: str
    department: str
    floor: str
    building: str
    hvac_zone: str
    machine_type: str
    profile: MachinePowerProfile
    monitor_type: Optional[str] = None
    monitor_attached: bool = False

    def __post_init__(self):
        if not self.user_id:
            raise InvalidRecord("user id must be non-empty")
        for name in ("department", "floor", "building"):
            if not getattr(self, name):
                raise InvalidRecord(f"{name} must be non-empty")
        if not isinstance(self.profile, MachinePowerProfile):
            raise InvalidRecord("power profile required")


@dataclass(frozen=True)
class Notification:
    """A message for occupants or managers; delivered exactly once per
    target user, then archived."""

    id: int
    audience: str
    text: str
    created_at: datetime
    source: str  # "manager" or "system"

    def __post_init__(self):
        if not self.text:
            raise ValueError("notification text must be non-empty")


@dataclass(frozen=True)
class MeterInfo:
    meter_id: str
    device: str
    location: str = ""


class MetadataStore:
    """Relational-style store of user records, meters, notifications,
    comfort targets, and persisted analytics results. Reads vastly
    outnumber writes; a single RLock with copy-on-read keeps readers
    consistent during upserts."""

    def __init__(self):
        self._lock = threading.RLock()
        self._users: dict[str, UserRecord] = {}
        self._meters: dict[str, MeterInfo] = {}
        self._targets: dict[str, float] = {}
        self._notifications: dict[int, Notification] = {}
        self._pending: dict[str, list[int]] = {}       # user -> undelivered ids
        self._delivered: dict[str, list[int]] = {}     # archive, delivery order
        self._manager_feed: list[int] = []
        self._next_notification_id = 1
        # derived analytics values (duck-typed; defined in analytics)
        self._trends: dict[tuple[str, int], Any] = {}
        self._latest_trend: dict[str, Any] = {}
        self._dailies: dict[tuple[str, str, str], Any] = {}
        self._latest_rollup_date: Optional[date] = None
        self._zone_summaries: list[Any] = []

    # -- users -------------------------------------------------------

    def put_user(self, record: UserRecord) -> None:
        with self._lock:
            self._users[record.user_id] = record

    def get_user(self, user_id: str) -> UserRecord:
        with self._lock:
            try:
                return self._users[user_id]
            except KeyError:
                raise NotFound(f"no such user {user_id!r}") from None

    def has_user(self, user_id: str) -> bool:
        return user_id in self._users

    def all_users(self) -> list[str]:
        with self._lock:
            return sorted(self._users)

    def group_members(self, kind: str, name: str) -> list[str]:
        """User ids whose record matches a membership field. Unknown
        names yield an empty list, not an error."""
        if kind not in GROUP_KINDS:
            raise ValueError(f"group kind must be one of {GROUP_KINDS}, got {kind!r}")
        with self._lock:
            return sorted(uid for uid, rec in self._users.items()
                          if getattr(rec, kind) == name)

    def group_names(self, kind: str) -> list[str]:
        if kind not in GROUP_KINDS:
            raise ValueError(f"group kind must be one of {GROUP_KINDS}, got {kind!r}")
        with self._lock:
            return sorted({getattr(rec, kind) for rec in self._users.values()})

    def users_in_zone(self, zone: str) -> list[str]:
        with self._lock:
            return sorted(uid for uid, rec in self._users.items()
                          if rec.hvac_zone == zone)

    def all_zones(self) -> list[str]:
        with self._lock:
            return sorted({rec.hvac_zone for rec in self._users.values()})

    # -- comfort targets ----------------------------------------------

    def set_target(self, user_id: str, wh: float) -> None:
        if wh <= 0:
            raise ValueError("target must be positive")
        with self._lock:
            self._targets[user_id] = float(wh)

    def get_target(self, user_id: str) -> Optional[float]:
        return self._targets.get(user_id)

    # -- meters --------------------------------------------------------

    def put_meter(self, info: MeterInfo) -> None:
        with self._lock:
            self._meters[info.meter_id] = info

    def get_meter(self, meter_id: str) -> MeterInfo:
        with self._lock:
            try:
                return self._meters[meter_id]
            except KeyError:
                raise NotFound(f"no such meter {meter_id!r}") from None

    def has_meter(self, meter_id: str) -> bool:
        return meter_id in self._meters

    # -- notifications -------------------------------------------------

    def add_notification(self, audience: str, text: str, created_at: datetime,
                         source: str, targets: Iterable[str],
                         manager_feed: bool = False) -> Notification:
        with self._lock:
            note = Notification(self._next_notification_id, audience, text,
                                created_at, source)
            self._next_notification_id += 1
            self._notifications[note.id] = note
            for uid in targets:
                self._pending.setdefault(uid, []).append(note.id)
            if manager_feed:
                self._manager_feed.append(note.id)
            return note

    def deliver_pending(self, user_id: str) -> list[Notification]:
        """Pop a user's undelivered notifications; each is returned by
        exactly one call, then archived."""
        with self._lock:
            ids = self._pending.pop(user_id, [])
            self._delivered.setdefault(user_id, []).extend(ids)
            return [self._notifications[i] for i in ids]

    def delivered_count(self, user_id: str) -> int:
        with self._lock:
            return len(self._delivered.get(user_id, ()))

    def manager_feed(self) -> list[Notification]:
        with self._lock:
            return [self._notifications[i] for i in self._manager_feed]

    # -- derived analytics values ---------------------------------------

    def save_trend(self, indicator: Any) -> None:
        with self._lock:
            key = (indicator.user_id, epoch_from_utc(indicator.window_end))
            self._trends[key] = indicator
            latest = self._latest_trend.get(indicator.user_id)
            if latest is None or indicator.window_end >= latest.window_end:
                self._latest_trend[indicator.user_id] = indicator

    def latest_trend(self, user_id: str) -> Optional[Any]:
        return self._latest_trend.get(user_id)

    def trend_at(self, user_id: str, window_end: datetime) -> Optional[Any]:
        return self._trends.get((user_id, epoch_from_utc(window_end)))

    def save_daily(self, daily: Any) -> None:
        with self._lock:
            key = (daily.subject_kind, daily.subject, daily.date.isoformat())
            self._dailies[key] = daily
            if self._latest_rollup_date is None or daily.date > self._latest_rollup_date:
                self._latest_rollup_date = daily.date

    def get_daily(self, subject_kind: str, subject: str, day: date) -> Optional[Any]:
        return self._dailies.get((subject_kind, subject, day.isoformat()))

    def dailies_between(self, subject_kind: str, subject: str,
                        start: date, end: date) -> list[Any]:
        """Dailies with start <= date <= end, ascending by date."""
        with self._lock:
            rows = [d for (kind, subj, _), d in self._dailies.items()
                    if kind == subject_kind and subj == subject
                    and start <= d.date <= end]
        return sorted(rows, key=lambda d: d.date)

    def recent_dailies(self, subject_kind: str, subject: str, n: int) -> list[Any]:
        """The n most recent dailies for a subject, ascending by date."""
        with self._lock:
            rows = [d for (kind, subj, _), d in self._dailies.items()
                    if kind == subject_kind and subj == subject]
        return sorted(rows, key=lambda d: d.date)[-n:]

    def subjects_with_dailies(self, subject_kind: str) -> list[str]:
        with self._lock:
            return sorted({subj for (kind, subj, _) in self._dailies
                           if kind == subject_kind})

    def latest_rollup_date(self) -> Optional[date]:
        return self._latest_rollup_date

    def save_zone_summary(self, summary: Any) -> None:
        with self._lock:
            self._zone_summaries.append(summary)

    def zone_summaries(self) -> list[Any]:
        with self._lock:
            return list(self._zone_summaries)

    # -- export / import (provisioning state only; derived values are
    #    recomputable from raw streams) --------------------------------

    def export_json(self, path: str) -> None:
        with self._lock:
            blob = {
                "users": [_user_to_json(rec) for rec in self._users.values()],
                "meters": [vars(m) for m in self._meters.values()],
                "targets": dict(self._targets),
            }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(blob, fh, indent=2, sort_keys=True)
            fh.write("\n")

    def import_json(self, path: str) -> int:
        with open(path, encoding="utf-8") as fh:
            blob = json.load(fh)
        n = 0
        for rec in blob.get("users", ()):
            self.put_user(_user_from_json(rec))
            n += 1
        for m in blob.get("meters", ()):
            self.put_meter(MeterInfo(**m))
        for uid, wh in blob.get("targets", {}).items():
            self.set_target(uid, wh)
        return n


def _user_to_json(rec: UserRecord) -> dict:
    out = {k: v for k, v in vars(rec).items() if k != "profile"}
    out["profile"] = vars(rec.profile)
    return out


def _user_from_json(rec: dict) -> UserRecord:
    rec = dict(rec)
    profile = MachinePowerProfile(**rec.pop("profile"))
    return UserRecord(profile=profile, **rec)


#: Streams created for every provisioned user.
USER_STREAM_INDICATORS = (SensorIndicator.AMBIENT, SensorIndicator.ENERGY,
                          SensorIndicator.COMFORT)


class DataStores:
    """Facade pairing the two stores and keeping them correlated: every
    user record owns exactly the ambient/energy/comfort streams, and
    every stream resolves back to one provisioned owner."""

    def __init__(self, sensors: Optional[SensorStore] = None,
                 metadata: Optional[MetadataStore] = None):
        self.sensors = sensors or SensorStore()
        self.metadata = metadata or MetadataStore()

    def upsert_user(self, record: UserRecord) -> None:
        self.metadata.put_user(record)
        for indicator in USER_STREAM_INDICATORS:
            self.sensors.create_stream(stream_id(record.user_id, indicator))

    def get_user(self, user_id: str) -> UserRecord:
        return self.metadata.get_user(user_id)

    def group_members(self, kind: str, name: str) -> list[str]:
        return self.metadata.group_members(kind, name)

    def register_meter(self, meter_id: str, device: str, location: str = "") -> None:
        self.metadata.put_meter(MeterInfo(meter_id, device, location))
        self.sensors.create_stream(stream_id(meter_id, SensorIndicator.PLUG_METER))

    def register_site(self, location: str) -> None:
        self.sensors.create_stream(stream_id(location, SensorIndicator.WEATHER))

    def export_dir(self, directory: str) -> None:
        os.makedirs(directory, exist_ok=True)
        self.metadata.export_json(os.path.join(directory, "metadata.json"))
        self.sensors.export_jsonl(os.path.join(directory, "streams.jsonl"))

    def import_dir(self, directory: str) -> None:
        meta = os.path.join(directory, "metadata.json")
        streams = os.path.join(directory, "streams.jsonl")
        if os.path.exists(meta):
            self.metadata.import_json(meta)
            for uid in self.metadata.all_users():
                for indicator in USER_STREAM_INDICATORS:
                    self.sensors.create_stream(stream_id(uid, indicator))
        if os.path.exists(streams):
            self.sensors.import_jsonl(streams)


def provision_user(stores: DataStores, *, user_id: str, office: str,
                   department: str, floor: str, building: str, zone: str,
                   machine_type: str, p_idle: float, p_sidle: float,
                   p_sleep: float, p_off: float,
                   monitor_type: Optional[str] = None,
                   monitor_on: float = 0.0, monitor_standby: float = 0.0,
                   monitor_off: float = 0.0,
                   charging_multiplier: float = 2.5) -> str:
    """Register a new user: store the record and pre-create its streams.

    Per-state draws come from measurement or the manufacturer's ratings;
    they are fixed at provisioning time, with no runtime calibration.
    """
    if stores.metadata.has_user(user_id):
        raise DuplicateUser(f"user {user_id!r} already provisioned")
    profile = MachinePowerProfile(
        p_off=p_off, p_sleep=p_sleep, p_idle=p_idle, p_sidle=p_sidle,
        monitor_on=monitor_on, monitor_standby=monitor_standby,
        monitor_off=monitor_off, charging_multiplier=charging_multiplier)
    record = UserRecord(
        user_id=user_id, office_location=office, department=department,
        floor=floor, building=building, hvac_zone=zone,
        machine_type=machine_type, profile=profile, monitor_type=monitor_type,
        monitor_attached=monitor_type is not None)
    stores.upsert_user(record)
    return user_id
