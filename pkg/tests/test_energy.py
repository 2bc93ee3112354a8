"""Energy sensor: occupancy accumulation, interval energy, the annual
TEC estimate, sleep derivation, and the sampling loop."""

from __future__ import annotations

import itertools
from datetime import datetime, timezone

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from officemon.clock import SimClock
from officemon.domain import SensorIndicator
from officemon.energy import (BatterySnapshot, EventKind, FractionsDoNotSum,
                              MachinePowerProfile, PowerEvent, PowerState,
                              Sample, ScriptedObserver, StateOccupancy,
                              TimeFractions, accumulate, derive_sleep,
                              interval_energy, load_trace, make_energy_report,
                              observer_from_trace, sample_loop, save_trace,
                              tec_annual)
from officemon.wire import parse_report, serialize_report

PROFILE = MachinePowerProfile(p_off=1, p_sleep=2, p_idle=10, p_sidle=30)
AC = BatterySnapshot(on_ac_power=True, charging=False)
BATT = BatterySnapshot(on_ac_power=False, charging=False)
TS = datetime(2022, 3, 14, 9, 30, tzinfo=timezone.utc)


def occupancy(**seconds) -> StateOccupancy:
    occ = StateOccupancy()
    for name, value in seconds.items():
        if name == "battery":
            occ.on_battery_seconds = value
        else:
            occ.seconds[PowerState[name.upper()]] = value
    return occ


class TestTecAnnual:
    def test_hand_evaluated_mixed_case(self):
        fractions = TimeFractions(0.5, 0.2, 0.2, 0.05, 0.05)
        # 8.76 * (1*0.5 + 2*0.2 + 10*0.2 + 30*(0.05+0.05)) = 8.76 * 5.9
        assert tec_annual(PROFILE, fractions) == pytest.approx(51.684, abs=1e-9)

    @pytest.mark.parametrize("state,power", [
        ("t_off", 1.0), ("t_sleep", 2.0), ("t_idle", 10.0),
        ("t_sidle", 30.0), ("t_work", 30.0),
    ])
    def test_single_state_degenerate(self, state, power):
        fields = {k: 0.0 for k in ("t_off", "t_sleep", "t_idle", "t_sidle", "t_work")}
        fields[state] = 1.0
        assert tec_annual(PROFILE, TimeFractions(**fields)) == \
            pytest.approx(8.76 * power, abs=1e-9)

    def test_fractions_guard(self):
        with pytest.raises(FractionsDoNotSum):
            tec_annual(PROFILE, TimeFractions(0.5, 0.2, 0.1, 0.05, 0.05))

    def test_fraction_range_validation(self):
        with pytest.raises(ValueError):
            TimeFractions(1.5, 0.0, 0.0, 0.0, 0.0)

    @given(st.floats(min_value=0.01, max_value=100))
    def test_scaling_all_powers_scales_tec(self, c):
        fractions = TimeFractions(0.5, 0.2, 0.2, 0.05, 0.05)
        scaled = MachinePowerProfile(PROFILE.p_off * c, PROFILE.p_sleep * c,
                                     PROFILE.p_idle * c, PROFILE.p_sidle * c)
        assert tec_annual(scaled, fractions) == \
            pytest.approx(c * tec_annual(PROFILE, fractions), rel=1e-12)


class TestIntervalEnergy:
    def test_hand_integrated_idle_plus_sidle(self):
        occ = occupancy(idle=900, short_idle=900)
        assert interval_energy(occ, PROFILE).interval_wh == \
            pytest.approx(10.0, abs=1e-12)

    def test_all_battery_window_is_zero(self):
        occ = occupancy(battery=1800)
        assert interval_energy(occ, PROFILE).interval_wh == 0.0

    def test_charging_multiplier(self):
        profile = MachinePowerProfile(1, 2, 10, 30, charging_multiplier=2.5)
        occ = occupancy(short_idle=3600)
        assert interval_energy(occ, profile, charging=True).interval_wh == \
            pytest.approx(75.0, abs=1e-12)

    def test_work_billed_at_short_idle(self):
        a = interval_energy(occupancy(work=600), PROFILE).interval_wh
        b = interval_energy(occupancy(short_idle=600), PROFILE).interval_wh
        assert a == b

    def test_monitor_ratings_by_state(self):
        profile = MachinePowerProfile(1, 2, 10, 30, monitor_on=20,
                                      monitor_standby=2, monitor_off=0.5)
        occ = occupancy(off=600, sleep=600, idle=600, short_idle=600, work=600)
        with_monitor = interval_energy(occ, profile, monitor_attached=True)
        without = interval_energy(occ, profile, monitor_attached=False)
        # on for sidle+work, standby for idle, off rating for off+sleep
        expected_extra = (1200 * 20 + 600 * 2 + 1200 * 0.5) / 3600
        assert with_monitor.interval_wh - without.interval_wh == \
            pytest.approx(expected_extra, abs=1e-12)

    def test_charging_does_not_scale_monitor(self):
        profile = MachinePowerProfile(0, 0, 0, 10, monitor_on=20,
                                      charging_multiplier=3.0)
        occ = occupancy(short_idle=3600)
        reading = interval_energy(occ, profile, monitor_attached=True, charging=True)
        assert reading.interval_wh == pytest.approx(10 * 3 + 20, abs=1e-12)

    @given(st.sampled_from(list(PowerState)),
           st.integers(min_value=1, max_value=3600))
    def test_adding_seconds_never_decreases_energy(self, state, extra):
        base = occupancy(idle=300, short_idle=300)
        more = occupancy(idle=300, short_idle=300)
        more.add(state, extra)
        assert interval_energy(more, PROFILE).interval_wh >= \
            interval_energy(base, PROFILE).interval_wh


class TestAccumulate:
    def test_constant_trace(self):
        samples = [Sample(t, PowerState.IDLE, AC) for t in range(1, 31)]
        occ = accumulate(samples, 0, 30)
        assert occ.seconds[PowerState.IDLE] == 30
        assert occ.total() == 30

    def test_alternating_trace(self):
        samples = [Sample(t, PowerState.IDLE if t <= 15 else PowerState.SHORT_IDLE, AC)
                   for t in range(1, 31)]
        occ = accumulate(samples, 0, 30)
        assert occ.seconds[PowerState.IDLE] == 15
        assert occ.seconds[PowerState.SHORT_IDLE] == 15

    def test_battery_samples_not_billed(self):
        samples = [Sample(t, PowerState.SHORT_IDLE, BATT) for t in range(1, 31)]
        occ = accumulate(samples, 0, 30)
        assert occ.on_battery_seconds == 30
        assert occ.state_total() == 0

    def test_gap_without_events_goes_to_off(self):
        samples = [Sample(t, PowerState.IDLE, AC) for t in range(1, 11)]
        occ = accumulate(samples, 0, 30)
        assert occ.seconds[PowerState.IDLE] == 10
        assert occ.seconds[PowerState.OFF] == 20

    def test_gap_with_sleep_events(self):
        samples = [Sample(t, PowerState.IDLE, AC) for t in range(1, 11)]
        events = [PowerEvent(10, EventKind.SLEEP_ENTER),
                  PowerEvent(30, EventKind.WAKE)]
        occ = accumulate(samples, 0, 30, events)
        assert occ.seconds[PowerState.SLEEP] == 20
        assert occ.total() == 30

    @given(st.lists(st.tuples(st.sampled_from(list(PowerState)), st.booleans()),
                    min_size=0, max_size=120))
    @settings(max_examples=100)
    def test_occupancy_conservation(self, scripted):
        window = len(scripted)
        samples = [Sample(t + 1, state, AC if on_ac else BATT)
                   for t, (state, on_ac) in enumerate(scripted)]
        occ = accumulate(samples, 0, window)
        assert occ.total() == window


class TestDeriveSleep:
    def test_single_closed_span(self):
        events = [PowerEvent(3600, EventKind.SLEEP_ENTER),
                  PowerEvent(5400, EventKind.WAKE)]
        derived = derive_sleep(events, 0, 7200)
        assert derived.sleep_s == 1800
        assert derived.off_s == 0

    def test_span_clipped_at_window_end(self):
        events = [PowerEvent(6600, EventKind.SLEEP_ENTER),
                  PowerEvent(7800, EventKind.WAKE)]
        assert derive_sleep(events, 0, 7200).sleep_s == 600
        assert derive_sleep(events, 7200, 14400).sleep_s == 600

    def test_empty_log(self):
        derived = derive_sleep([], 0, 7200)
        assert (derived.sleep_s, derived.off_s) == (0, 0)

    def test_sleep_then_boot_counts_as_off(self):
        events = [PowerEvent(1000, EventKind.SLEEP_ENTER),
                  PowerEvent(2000, EventKind.BOOT)]
        derived = derive_sleep(events, 0, 7200)
        assert derived.off_s == 1000
        assert derived.sleep_s == 0

    def test_unmatched_sleep_enter_left_open(self):
        events = [PowerEvent(7000, EventKind.SLEEP_ENTER)]
        derived = derive_sleep(events, 0, 7200)
        assert derived.sleep_s == 0
        assert derived.open_since == 7000


class TestSampleLoop:
    def test_constant_observer(self):
        clock = SimClock(0)
        observer = ScriptedObserver.constant(clock, PowerState.SHORT_IDLE)
        samples = list(sample_loop(observer, clock, 60))
        assert len(samples) == 60
        assert {s.state for s in samples} == {PowerState.SHORT_IDLE}

    def test_alternating_30s_script(self):
        clock = SimClock(0)
        segments = [(float(t), PowerState.IDLE if (t // 30) % 2 == 0
                     else PowerState.SHORT_IDLE, True, False)
                    for t in range(0, 120, 30)]
        observer = ScriptedObserver(clock, segments)
        occ = accumulate(sample_loop(observer, clock, 120), 0, 120)
        assert occ.seconds[PowerState.IDLE] == 60
        assert occ.seconds[PowerState.SHORT_IDLE] == 60

    def test_observer_gap_attributed_by_events(self):
        clock = SimClock(0)
        events = [PowerEvent(600, EventKind.SLEEP_ENTER),
                  PowerEvent(1200, EventKind.WAKE)]
        observer = ScriptedObserver(
            clock, [(0.0, PowerState.IDLE, True, False)],
            events=events, fail_between=(600, 1200))
        samples = list(sample_loop(observer, clock, 1800))
        assert len(samples) == 1200  # 600 missing seconds, not fabricated
        occ = accumulate(samples, 0, 1800, observer.event_log())
        assert occ.seconds[PowerState.SLEEP] == 600
        assert occ.seconds[PowerState.IDLE] == 1200

    def test_sample_epochs_mark_second_ends(self):
        clock = SimClock(100)
        observer = ScriptedObserver.constant(clock, PowerState.IDLE)
        samples = list(sample_loop(observer, clock, 3))
        assert [s.epoch for s in samples] == [101, 102, 103]


class TestEnergyReport:
    def test_thirty_seconds_short_idle(self):
        report = make_energy_report("u1", occupancy(short_idle=30), PROFILE, TS)
        assert report is not None
        assert report.indicator is SensorIndicator.ENERGY
        assert report.payload["intervalWh"] == pytest.approx(0.25, abs=1e-12)
        assert report.payload["sidleSec"] == 30

    def test_all_battery_window_suppressed(self):
        assert make_energy_report("u1", occupancy(battery=30), PROFILE, TS) is None

    def test_round_trips_through_wire(self):
        report = make_energy_report("u1", occupancy(idle=10, short_idle=20),
                                    PROFILE, TS)
        assert parse_report(serialize_report(report)) == report


T0 = int(datetime(2022, 3, 14, tzinfo=timezone.utc).timestamp())


class TestTraceFiles:
    def test_save_load_round_trip(self, tmp_path):
        samples = [(T0 + t, PowerState.SHORT_IDLE if t % 2 else PowerState.IDLE,
                    True, False) for t in range(120)]
        path = tmp_path / "trace.txt"
        save_trace(str(path), samples)
        assert load_trace(str(path)) == samples

    def test_bad_line_reports_position(self, tmp_path):
        path = tmp_path / "trace.txt"
        path.write_text("03-14-22-00:00:00 warp 1 0\n")
        with pytest.raises(ValueError, match="trace.txt:1"):
            load_trace(str(path))

    def test_observer_from_trace_replays(self):
        clock = SimClock(T0)
        samples = [(T0 + t, PowerState.IDLE if t < 60 else PowerState.WORK,
                    True, False) for t in range(120)]
        observer = observer_from_trace(clock, samples)
        occ = accumulate(sample_loop(observer, clock, 120), T0, T0 + 120)
        assert occ.seconds[PowerState.IDLE] == 60
        assert occ.seconds[PowerState.WORK] == 60


def piecewise_integral_wh(segments, end, profile):
    """Continuous-time oracle: exact integral of the piecewise-constant
    draw implied by the state segments."""
    total = 0.0
    for (start, state, _, _), nxt in itertools.zip_longest(
            segments, segments[1:], fillvalue=None):
        seg_end = end if nxt is None else nxt[0]
        total += (seg_end - start) * profile.power(state)
    return total / 3600.0


class TestDiscretizationBound:
    def test_sampled_energy_tracks_continuous_integral(self):
        # transitions at fractional seconds; error per transition < 1 s * Pmax
        import random
        rng = random.Random(7)
        clock = SimClock(0)
        t, segments = 0.0, []
        states = list(PowerState)
        for _ in range(40):
            segments.append((t, rng.choice(states), True, False))
            t += rng.uniform(30, 120)
        end = t + 60
        observer = ScriptedObserver(clock, segments)
        occ = accumulate(sample_loop(observer, clock, int(end)), 0, int(end))
        sampled = interval_energy(occ, PROFILE).interval_wh
        true_wh = piecewise_integral_wh(segments, int(end), PROFILE)
        bound = len(segments) * 30.0 * 1.0 / 3600.0
        assert abs(sampled - true_wh) <= bound
