"""Periodic analytics: 15-minute usage trends, midnight rollups, flower
scores, comfort-vote aggregation, and rogue-zone detection.

Trend colors compare the last cycle's energy against the same
wall-clock window of the previous day, falling back to the trailing
7-day mean for that window, then to the running per-window mean of the
current day, so a fresh deployment still trends from its first tick.
The ratio r = last/reference maps to green below 0.95, orange through
1.05, and red above; the 5% deadband keeps the dot from flapping.

Daily rollups run at local midnight: per-user totals, then group means
over members that reported that day. Every derived value is persisted
to the metadata store keyed by subject and period, so recomputation is
idempotent and the console never aggregates ad hoc.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from datetime import date, datetime, time, timedelta, timezone, tzinfo
from enum import Enum
from typing import Optional

from .clock import Clock, utc_from_epoch
from .domain import SensorIndicator
from .stores import DataStores, GROUP_KINDS, stream_id

log = logging.getLogger(__name__)

TREND_INTERVAL_S = 900

#: Trend thresholds on r = lastCycle / reference.
TREND_GREEN_BELOW = 0.95
TREND_RED_ABOVE = 1.05

#: Flower: flourishing at or under target, neutral within +10%.
FLOWER_NEUTRAL_FACTOR = 1.10

#: Severity: |mean vote| >= 2 with at least 3 votes alerts the manager.
SEVERITY_MEAN = 2.0
SEVERITY_MIN_VOTES = 3

#: Comfort bands for rogue-zone detection (closed intervals).
DEFAULT_TEMP_BAND = (20.0, 26.0)
DEFAULT_RH_BAND = (30.0, 60.0)
ROGUE_FRACTION_THRESHOLD = 0.20


class TrendColor(str, Enum):
    GREEN = "green"
    ORANGE = "orange"
    RED = "red"


class FlowerState(str, Enum):
    FLOURISHING = "flourishing"
    NEUTRAL = "neutral"
    NEEDS_IMPROVEMENT = "needsImprovement"


@dataclass(frozen=True)
class TrendIndicator:
    """Per-user 15-minute trend; the reference actually used is kept
    alongside both candidates for auditability."""

    user_id: str
    window_end: datetime
    color: TrendColor
    last_cycle_wh: float
    reference_wh: float
    reference_source: str  # previous_day | week_mean | running_mean | self
    prev_day_wh: Optional[float] = None
    week_mean_wh: Optional[float] = None


@dataclass(frozen=True)
class DailyAverage:
    """One subject's rollup for one local day. For a user the mean
    equals the total; for a group the mean is over members with data
    and the total is their sum."""

    subject_kind: str  # user | department | floor | building
    subject: str
    date: date
    total_wh: float
    mean_wh: float


@dataclass(frozen=True)
class ZoneComfortSummary:
    zone: str
    window_start: datetime
    window_end: datetime
    vote_count: int
    mean_vote: float
    histogram: dict[int, int]
    severe: bool

    def __post_init__(self):
        if sum(self.histogram.values()) != self.vote_count:
            raise ValueError("histogram does not sum to the vote count")
        if self.vote_count and not -3 <= self.mean_vote <= 3:
            raise ValueError("mean vote outside the seven-point scale")


@dataclass(frozen=True)
class RogueZoneReport:
    zone: str
    window_start: datetime
    window_end: datetime
    readings: int
    out_of_band: int
    fraction: float
    extremes: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if not 0 <= self.fraction <= 1:
            raise ValueError("out-of-band fraction must lie in [0, 1]")


def trend_color(last_cycle_wh: float, reference_wh: float) -> TrendColor:
    """Pure threshold map; ratio-based, so common scaling cancels."""
    if reference_wh <= 0:
        return TrendColor.ORANGE if last_cycle_wh <= 0 else TrendColor.RED
    ratio = last_cycle_wh / reference_wh
    if ratio < TREND_GREEN_BELOW:
        return TrendColor.GREEN
    if ratio > TREND_RED_ABOVE:
        return TrendColor.RED
    return TrendColor.ORANGE


def flower_score(actual_daily_wh: float, target_wh: float) -> FlowerState:
    """Three-state progress against the personal target."""
    if target_wh <= 0:
        raise ValueError("target must be positive")
    if actual_daily_wh <= target_wh:
        return FlowerState.FLOURISHING
    if actual_daily_wh <= FLOWER_NEUTRAL_FACTOR * target_wh:
        return FlowerState.NEUTRAL
    return FlowerState.NEEDS_IMPROVEMENT


class AnalyticsEngine:
    """Reads raw streams, writes derived values to the metadata store."""

    def __init__(self, stores: DataStores, site_tz: tzinfo = timezone.utc):
        self.stores = stores
        self.site_tz = site_tz

    # -- raw scans -----------------------------------------------------

    def energy_between(self, user_id: str,
                       start: datetime, end: datetime) -> tuple[float, int]:
        """(summed interval Wh, document count) over [start, end)."""
        sid = stream_id(user_id, SensorIndicator.ENERGY)
        docs = self.stores.sensors.query_range(sid, start, end)
        total = 0.0
        for doc in docs:
            value = doc.payload.get("intervalWh")
            if isinstance(value, (int, float)):
                total += value
        return total, len(docs)

    # -- 15-minute trends -----------------------------------------------

    def fifteen_minute_tick(self, now: datetime) -> list[TrendIndicator]:
        """Compute and persist one trend indicator per active user.

        A user with no energy documents at all is skipped this cycle.
        """
        window_end = now
        window_start = now - timedelta(seconds=TREND_INTERVAL_S)
        out: list[TrendIndicator] = []
        for user_id in self.stores.metadata.all_users():
            sid = stream_id(user_id, SensorIndicator.ENERGY)
            if not self.stores.sensors.has_stream(sid) \
                    or self.stores.sensors.count(sid) == 0:
                continue
            last_wh, _ = self.energy_between(user_id, window_start, window_end)
            indicator = self._build_indicator(user_id, window_start, window_end,
                                              last_wh)
            self.stores.metadata.save_trend(indicator)
            out.append(indicator)
        return out

    def _build_indicator(self, user_id: str, window_start: datetime,
                         window_end: datetime, last_wh: float) -> TrendIndicator:
        day = timedelta(days=1)
        prev_wh, prev_n = self.energy_between(user_id, window_start - day,
                                              window_end - day)
        prev_day_wh = prev_wh if prev_n else None
        week_values = []
        for k in range(1, 8):
            wh, n = self.energy_between(user_id, window_start - k * day,
                                        window_end - k * day)
            if n:
                week_values.append(wh)
        week_mean_wh = sum(week_values) / len(week_values) if week_values else None

        if prev_day_wh is not None:
            reference, source = prev_day_wh, "previous_day"
        elif week_mean_wh is not None:
            reference, source = week_mean_wh, "week_mean"
        else:
            reference, source = self._running_mean(user_id, window_start, last_wh)
        return TrendIndicator(user_id, window_end, trend_color(last_wh, reference),
                              last_wh, reference, source, prev_day_wh, week_mean_wh)

    def _running_mean(self, user_id: str, window_start: datetime,
                      last_wh: float) -> tuple[float, str]:
        """Day-one fallback: mean per-window energy since local midnight;
        with no elapsed windows the cycle is its own reference."""
        midnight = self._local_midnight(window_start)
        elapsed = int((window_start - midnight).total_seconds()) // TREND_INTERVAL_S
        if elapsed > 0:
            total, n = self.energy_between(user_id, midnight, window_start)
            if n:
                return total / elapsed, "running_mean"
        return last_wh, "self"

    def _local_midnight(self, at: datetime) -> datetime:
        local = at.astimezone(self.site_tz)
        return datetime.combine(local.date(), time.min,
                                tzinfo=self.site_tz).astimezone(timezone.utc)

    # -- midnight rollups -------------------------------------------------

    def day_window(self, local_date: date) -> tuple[datetime, datetime]:
        start = datetime.combine(local_date, time.min, tzinfo=self.site_tz)
        return start.astimezone(timezone.utc), \
            (start + timedelta(days=1)).astimezone(timezone.utc)

    def midnight_tick(self, local_date: date) -> list[DailyAverage]:
        """Persist per-user daily totals and group means for one local day.

        Users with no documents that day are excluded from their groups'
        means rather than counted as zero.
        """
        start, end = self.day_window(local_date)
        user_totals: dict[str, float] = {}
        out: list[DailyAverage] = []
        for user_id in self.stores.metadata.all_users():
            sid = stream_id(user_id, SensorIndicator.ENERGY)
            if not self.stores.sensors.has_stream(sid):
                continue
            total, n = self.energy_between(user_id, start, end)
            if n == 0:
                continue
            user_totals[user_id] = total
            daily = DailyAverage("user", user_id, local_date, total, total)
            self.stores.metadata.save_daily(daily)
            out.append(daily)
        for kind in GROUP_KINDS:
            for name in self.stores.metadata.group_names(kind):
                members = self.stores.metadata.group_members(kind, name)
                values = [user_totals[m] for m in members if m in user_totals]
                if not values:
                    continue
                daily = DailyAverage(kind, name, local_date, sum(values),
                                     sum(values) / len(values))
                self.stores.metadata.save_daily(daily)
                out.append(daily)
        return out

    # -- comfort -----------------------------------------------------------

    def comfort_zone_summary(self, zone: str, window_start: datetime,
                             window_end: datetime) -> Optional[ZoneComfortSummary]:
        """Aggregate a zone's votes over a window; None when there were
        none. A severe summary also files a manager alert."""
        votes: list[int] = []
        for user_id in self.stores.metadata.users_in_zone(zone):
            sid = stream_id(user_id, SensorIndicator.COMFORT)
            if not self.stores.sensors.has_stream(sid):
                continue
            for doc in self.stores.sensors.query_range(sid, window_start, window_end):
                value = doc.payload.get("vote")
                if isinstance(value, int):
                    votes.append(value)
        if not votes:
            return None
        mean = sum(votes) / len(votes)
        histogram = {v: votes.count(v) for v in range(-3, 4)}
        severe = abs(mean) >= SEVERITY_MEAN and len(votes) >= SEVERITY_MIN_VOTES
        summary = ZoneComfortSummary(zone, window_start, window_end,
                                     len(votes), mean, histogram, severe)
        self.stores.metadata.save_zone_summary(summary)
        if severe:
            feel = "hot" if mean > 0 else "cold"
            self.stores.metadata.add_notification(
                audience="manager",
                text=f"Zone {zone} comfort alert: {len(votes)} votes, "
                     f"mean {mean:+.2f} (too {feel})",
                created_at=window_end, source="system", targets=(),
                manager_feed=True)
        return summary

    def comfort_tick(self, now: datetime) -> list[ZoneComfortSummary]:
        window_start = now - timedelta(seconds=TREND_INTERVAL_S)
        summaries = []
        for zone in self.stores.metadata.all_zones():
            summary = self.comfort_zone_summary(zone, window_start, now)
            if summary is not None:
                summaries.append(summary)
        return summaries

    # -- rogue zones --------------------------------------------------------

    def rogue_zones(self, window_start: datetime, window_end: datetime,
                    temp_band: tuple[float, float] = DEFAULT_TEMP_BAND,
                    rh_band: tuple[float, float] = DEFAULT_RH_BAND,
                    threshold: float = ROGUE_FRACTION_THRESHOLD
                    ) -> list[RogueZoneReport]:
        """Zones whose ambient readings fall outside the comfort bands
        more than the threshold fraction of the time, worst first.
        Band endpoints are in-band (closed intervals)."""
        reports = []
        for zone in self.stores.metadata.all_zones():
            readings = 0
            out_of_band = 0
            extremes: dict[str, float] = {}
            for user_id in self.stores.metadata.users_in_zone(zone):
                sid = stream_id(user_id, SensorIndicator.AMBIENT)
                if not self.stores.sensors.has_stream(sid):
                    continue
                for doc in self.stores.sensors.query_range(sid, window_start,
                                                           window_end):
                    temp = doc.payload.get("tempC")
                    rh = doc.payload.get("rh")
                    readings += 1
                    bad = False
                    if isinstance(temp, (int, float)) \
                            and not temp_band[0] <= temp <= temp_band[1]:
                        bad = True
                        extremes["minTempC"] = min(extremes.get("minTempC", temp), temp)
                        extremes["maxTempC"] = max(extremes.get("maxTempC", temp), temp)
                    if isinstance(rh, (int, float)) \
                            and not rh_band[0] <= rh <= rh_band[1]:
                        bad = True
                        extremes["minRh"] = min(extremes.get("minRh", rh), rh)
                        extremes["maxRh"] = max(extremes.get("maxRh", rh), rh)
                    if bad:
                        out_of_band += 1
            if readings == 0:
                continue
            fraction = out_of_band / readings
            if fraction > threshold:
                reports.append(RogueZoneReport(zone, window_start, window_end,
                                               readings, out_of_band, fraction,
                                               extremes))
        return sorted(reports, key=lambda r: r.fraction, reverse=True)


class AnalyticsScheduler:
    """Drives the engine off a clock: trend and comfort ticks on each
    15-minute boundary, rollups when the local date changes. Ticks of
    one cadence never overlap, and late ticks are skipped rather than
    queued (only the most recent boundary runs)."""

    def __init__(self, engine: AnalyticsEngine, clock: Clock):
        self.engine = engine
        self.clock = clock
        self._last_trend_boundary: Optional[int] = None
        self._last_local_date: Optional[date] = None

    def poll(self) -> None:
        """Call at least once per simulated/real second batch."""
        now_epoch = int(self.clock.now())
        boundary = now_epoch - now_epoch % TREND_INTERVAL_S
        if boundary > 0 and boundary != self._last_trend_boundary:
            if self._last_trend_boundary is not None \
                    and boundary - self._last_trend_boundary > TREND_INTERVAL_S:
                log.info("skipping %d late trend tick(s)",
                         (boundary - self._last_trend_boundary) // TREND_INTERVAL_S - 1)
            if self._last_trend_boundary is None or boundary > self._last_trend_boundary:
                when = utc_from_epoch(boundary)
                self.engine.fifteen_minute_tick(when)
                self.engine.comfort_tick(when)
                self._last_trend_boundary = boundary
        local_date = utc_from_epoch(now_epoch).astimezone(self.engine.site_tz).date()
        if self._last_local_date is None:
            self._last_local_date = local_date
        elif local_date > self._last_local_date:
            self.engine.midnight_tick(self._last_local_date)
            self._last_local_date = local_date

    def run(self, duration_s: int, poll_interval_s: int = 1) -> None:
        end = self.clock.now() + duration_s
        while self.clock.now() < end:
            self.clock.sleep(poll_interval_s)
            self.poll()
