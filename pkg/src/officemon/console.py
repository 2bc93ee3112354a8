"""Console API: the query and command surface for the occupant UI and
the management console.

Views are assembled from stored raw documents and persisted analytics
rollups; the only value computed here is the trailing 7-day mean used
for the computed average and the policy-default target. Anonymity is
structural: a response for one user carries that user's raw values
only, and other subjects appear solely as group aggregates.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import date, datetime, time, timezone
from typing import Optional

from .analytics import (AnalyticsEngine, DailyAverage, FlowerState,
                        RogueZoneReport, TrendIndicator, flower_score)
from .clock import Clock, SystemClock, utc_from_epoch
from .domain import ComfortVote, SensorIndicator
from .stores import (DataStores, GROUP_KINDS, NotFound, Notification,
                     SensorDocument, stream_id)


class OutOfRange(ValueError):
    pass


class UnresolvableAudience(ValueError):
    pass


REPORT_GROUP_KINDS = ("user",) + GROUP_KINDS


@dataclass(frozen=True)
class HomeView:
    """Everything the occupant home screen shows for one user."""

    user_id: str
    flower: Optional[FlowerState]
    trend: Optional[TrendIndicator]
    ambient: Optional[SensorDocument]
    weather: Optional[SensorDocument]
    notifications: list[Notification]
    last_vote: Optional[int]
    target_wh: Optional[float]
    target_source: Optional[str]  # "user" or "policy"


@dataclass(frozen=True)
class EnergyComparisonView:
    user_id: str
    dailies: list[DailyAverage]           # up to the 7 most recent
    computed_average: Optional[float]
    group_dots: dict[str, Optional[float]]  # department/floor/building means
    target_wh: Optional[float]


class ConsoleService:
    def __init__(self, stores: DataStores, engine: AnalyticsEngine,
                 clock: Optional[Clock] = None):
        self.stores = stores
        self.engine = engine
        self.clock = clock or SystemClock()

    # -- occupant views ---------------------------------------------------

    def _target_for(self, user_id: str,
                    dailies: list[DailyAverage]) -> tuple[Optional[float], Optional[str]]:
        """User-set target, else the policy default: the user's own
        trailing 7-day mean."""
        user_set = self.stores.metadata.get_target(user_id)
        if user_set is not None:
            return user_set, "user"
        if dailies:
            return sum(d.total_wh for d in dailies) / len(dailies), "policy"
        return None, None

    def get_home_view(self, user_id: str) -> HomeView:
        record = self.stores.get_user(user_id)  # NotFound for unknown users
        sensors = self.stores.sensors
        ambient = sensors.last(stream_id(user_id, SensorIndicator.AMBIENT))
        weather_sid = stream_id(record.building, SensorIndicator.WEATHER)
        weather = sensors.last(weather_sid) if sensors.has_stream(weather_sid) else None
        dailies = self.stores.metadata.recent_dailies("user", user_id, 7)
        target, target_source = self._target_for(user_id, dailies)
        flower = None
        if dailies and target:
            flower = flower_score(dailies[-1].total_wh, target)
        comfort = sensors.last(stream_id(user_id, SensorIndicator.COMFORT))
        last_vote = comfort.payload.get("vote") if comfort else None
        return HomeView(
            user_id=user_id,
            flower=flower,
            trend=self.stores.metadata.latest_trend(user_id),
            ambient=ambient,
            weather=weather,
            notifications=self.stores.metadata.deliver_pending(user_id),
            last_vote=last_vote if isinstance(last_vote, int) else None,
            target_wh=target,
            target_source=target_source,
        )

    def get_energy_comparison(self, user_id: str) -> EnergyComparisonView:
        record = self.stores.get_user(user_id)
        dailies = self.stores.metadata.recent_dailies("user", user_id, 7)
        computed = sum(d.total_wh for d in dailies) / len(dailies) if dailies else None
        rollup_date = self.stores.metadata.latest_rollup_date()
        dots: dict[str, Optional[float]] = {}
        for kind in GROUP_KINDS:
            dots[kind] = None
            if rollup_date is not None:
                group_daily = self.stores.metadata.get_daily(
                    kind, getattr(record, kind), rollup_date)
                if group_daily is not None:
                    dots[kind] = group_daily.mean_wh
        target, _ = self._target_for(user_id, dailies)
        return EnergyComparisonView(user_id, dailies, computed, dots, target)

    # -- commands -----------------------------------------------------------

    def submit_comfort_vote(self, user_id: str, value) -> SensorDocument:
        record = self.stores.get_user(user_id)
        if isinstance(value, bool) or not isinstance(value, int):
            raise OutOfRange(f"vote must be an integer, got {value!r}")
        if not -3 <= value <= 3:
            raise OutOfRange(f"vote must be within [-3, +3], got {value}")
        vote = ComfortVote(value, record.hvac_zone)
        now = utc_from_epoch(self.clock.now())
        sid = stream_id(user_id, SensorIndicator.COMFORT)
        position = self.stores.sensors.append(sid, now, vote.payload(), now)
        return self.stores.sensors.at(sid, position)

    def _resolve_audience(self, audience: str) -> list[str]:
        if audience == "all":
            return self.stores.metadata.all_users()
        if audience == "manager":
            return []
        kind, sep, name = audience.partition(":")
        if not sep or not name:
            raise UnresolvableAudience(f"audience {audience!r} is not "
                                       "'all', 'user:<id>', or '<group-kind>:<name>'")
        if kind == "user":
            if not self.stores.metadata.has_user(name):
                raise UnresolvableAudience(f"no such user {name!r}")
            return [name]
        if kind not in GROUP_KINDS:
            raise UnresolvableAudience(f"unknown group kind {kind!r}")
        members = self.stores.metadata.group_members(kind, name)
        if not members:
            raise UnresolvableAudience(f"no members in {kind} {name!r}")
        return members

    def post_notification(self, audience: str, text: str,
                          source: str = "manager") -> tuple[Notification, int]:
        """Fan a message out to its audience; each target sees it exactly
        once, in their next home view."""
        if not text or not text.strip():
            raise ValueError("notification text must be non-empty")
        targets = self._resolve_audience(audience)
        note = self.stores.metadata.add_notification(
            audience, text, utc_from_epoch(self.clock.now()), source, targets,
            manager_feed=audience == "manager")
        return note, len(targets)

    # -- manager reports -----------------------------------------------------

    def manager_energy_report(self, group_by: str, start: date, end: date, *,
                              manager: bool) -> list[dict]:
        """Rows of (subject, totalWh, meanWh) over [start, end] local days,
        consistent with the persisted midnight rollups."""
        if not manager:
            raise PermissionError("manager role required")
        if group_by not in REPORT_GROUP_KINDS:
            raise ValueError(f"groupBy must be one of {REPORT_GROUP_KINDS}")
        if start > end:
            raise ValueError("invalid period: start after end")
        rows = []
        for subject in self.stores.metadata.subjects_with_dailies(group_by):
            dailies = self.stores.metadata.dailies_between(group_by, subject,
                                                           start, end)
            if not dailies:
                continue
            total = sum(d.total_wh for d in dailies)
            rows.append({
                "subject": subject,
                "totalWh": total,
                "meanWh": total / len(dailies),
                "days": len(dailies),
            })
        return rows

    def rogue_zones(self, window_start: datetime, window_end: datetime,
                    **bands) -> list[RogueZoneReport]:
        return self.engine.rogue_zones(window_start, window_end, **bands)

    def manager_feed(self) -> list[Notification]:
        return self.stores.metadata.manager_feed()

    def set_target(self, user_id: str, wh: float) -> None:
        self.stores.get_user(user_id)
        self.stores.metadata.set_target(user_id, wh)


# -- JSON rendering (the UI contract; field names documented in docs/api.md) --

def _iso(dt: datetime) -> str:
    return dt.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _doc_json(doc: Optional[SensorDocument]) -> Optional[dict]:
    if doc is None:
        return None
    out = dict(doc.payload)
    out["ts"] = _iso(doc.tsutc)
    return out


def _notification_json(note: Notification) -> dict:
    return {"id": note.id, "audience": note.audience, "text": note.text,
            "createdAt": _iso(note.created_at), "source": note.source}


def home_json(view: HomeView) -> dict:
    trend = None
    if view.trend is not None:
        trend = {
            "color": view.trend.color.value,
            "lastCycleWh": view.trend.last_cycle_wh,
            "referenceWh": view.trend.reference_wh,
            "referenceSource": view.trend.reference_source,
            "windowEnd": _iso(view.trend.window_end),
        }
    return {
        "userId": view.user_id,
        "flower": view.flower.value if view.flower else None,
        "trend": trend,
        "ambient": _doc_json(view.ambient),
        "weather": _doc_json(view.weather),
        "notifications": [_notification_json(n) for n in view.notifications],
        "comfort": {"lastVote": view.last_vote, "min": -3, "max": 3},
        "target": None if view.target_wh is None else
                  {"wh": view.target_wh, "source": view.target_source},
    }


def comparison_json(view: EnergyComparisonView) -> dict:
    return {
        "userId": view.user_id,
        "dailies": [{"date": d.date.isoformat(), "totalWh": d.total_wh}
                    for d in view.dailies],
        "computedAverage": view.computed_average,
        "groupDots": view.group_dots,
        "targetLine": view.target_wh,
    }


def rogue_json(report: RogueZoneReport) -> dict:
    return {
        "zone": report.zone,
        "from": _iso(report.window_start),
        "to": _iso(report.window_end),
        "readings": report.readings,
        "outOfBand": report.out_of_band,
        "fraction": report.fraction,
        "extremes": report.extremes,
    }


def _parse_date(text: str) -> date:
    return date.fromisoformat(text)


def _parse_when(text: str, site_tz) -> datetime:
    """Accept a date (local midnight) or an ISO timestamp."""
    try:
        d = date.fromisoformat(text)
        return datetime.combine(d, time.min, tzinfo=site_tz).astimezone(timezone.utc)
    except ValueError:
        pass
    cleaned = text.replace("Z", "+00:00")
    dt = datetime.fromisoformat(cleaned)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=site_tz)
    return dt.astimezone(timezone.utc)


def serve(console: ConsoleService, host: str = "127.0.0.1", port: int = 8081):
    """Bind the console to a threaded HTTP server (returned unstarted)."""
    from . import httpglue

    def _json(status: int, payload) -> tuple[int, str]:
        return status, json.dumps(payload)

    def _error(status: int, message: str) -> tuple[int, str]:
        return status, json.dumps({"error": message})

    def home(match, body, query):
        try:
            return _json(200, home_json(console.get_home_view(match.group("uid"))))
        except NotFound as exc:
            return _error(404, str(exc))

    def energy(match, body, query):
        try:
            view = console.get_energy_comparison(match.group("uid"))
            return _json(200, comparison_json(view))
        except NotFound as exc:
            return _error(404, str(exc))

    def comfort(match, body, query):
        try:
            payload = json.loads(body) if body else {}
        except json.JSONDecodeError:
            return _error(400, "body must be JSON")
        try:
            doc = console.submit_comfort_vote(match.group("uid"), payload.get("value"))
        except NotFound as exc:
            return _error(404, str(exc))
        except OutOfRange as exc:
            return _error(400, str(exc))
        return _json(200, {"stored": True, "zone": doc.payload.get("zone"),
                           "ts": _iso(doc.tsutc)})

    def notify(match, body, query):
        try:
            payload = json.loads(body) if body else {}
            note, count = console.post_notification(
                payload.get("audience", ""), payload.get("text", ""),
                payload.get("source", "manager"))
        except (UnresolvableAudience, ValueError) as exc:
            return _error(400, str(exc))
        return _json(200, {"id": note.id, "delivered": count})

    def report(match, body, query):
        manager = query.get("role", [""])[0] == "manager"
        try:
            rows = console.manager_energy_report(
                query.get("groupBy", ["user"])[0],
                _parse_date(query.get("from", [""])[0]),
                _parse_date(query.get("to", [""])[0]),
                manager=manager)
        except PermissionError as exc:
            return _error(403, str(exc))
        except ValueError as exc:
            return _error(400, str(exc))
        return _json(200, {"rows": rows})

    def rogue(match, body, query):
        try:
            start = _parse_when(query.get("from", [""])[0], console.engine.site_tz)
            end = _parse_when(query.get("to", [""])[0], console.engine.site_tz)
        except ValueError as exc:
            return _error(400, f"bad period: {exc}")
        reports = console.rogue_zones(start, end)
        return _json(200, {"zones": [rogue_json(r) for r in reports]})

    def target(match, body, query):
        try:
            payload = json.loads(body) if body else {}
            console.set_target(match.group("uid"), float(payload.get("wh", 0)))
        except NotFound as exc:
            return _error(404, str(exc))
        except (TypeError, ValueError) as exc:
            return _error(400, str(exc))
        return _json(200, {"ok": True})

    def feed(match, body, query):
        return _json(200, {"notifications": [_notification_json(n)
                                             for n in console.manager_feed()]})

    routes = [
        ("GET", r"/api/home/(?P<uid>[^/]+)", home),
        ("GET", r"/api/energy/(?P<uid>[^/]+)", energy),
        ("POST", r"/api/comfort/(?P<uid>[^/]+)", comfort),
        ("POST", r"/api/notify", notify),
        ("GET", r"/api/report", report),
        ("GET", r"/api/rogue", rogue),
        ("POST", r"/api/target/(?P<uid>[^/]+)", target),
        ("GET", r"/api/manager/feed", feed),
        ("GET", r"/api/health", lambda m, b, q: (200, "ok")),
    ]
    return httpglue.build_server(host, port, routes)
