"""Command-line entry points: user provisioning, the backend server,
and a simulated edge agent."""

from __future__ import annotations

import argparse
import logging
import signal
import sys
import threading

from . import agent as agent_mod
from . import analytics, console, ingestion
from .clock import SimClock, SystemClock
from .energy import PowerState, ScriptedObserver, load_trace, observer_from_trace
from .stores import DataStores, DuplicateUser, provision_user
from .wire import resolve_timezone

log = logging.getLogger(__name__)


def _add_provision_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--user-id", required=True)
    p.add_argument("--office", required=True)
    p.add_argument("--department", required=True)
    p.add_argument("--floor", required=True)
    p.add_argument("--building", required=True)
    p.add_argument("--zone", required=True, help="HVAC zone")
    p.add_argument("--machine-type", required=True)
    p.add_argument("--p-idle", type=float, required=True, help="idle draw, W")
    p.add_argument("--p-sidle", type=float, required=True, help="short-idle draw, W")
    p.add_argument("--p-sleep", type=float, required=True, help="sleep draw, W")
    p.add_argument("--p-off", type=float, required=True, help="off draw, W")
    p.add_argument("--monitor-type", default=None)
    p.add_argument("--monitor-on", type=float, default=0.0)
    p.add_argument("--monitor-standby", type=float, default=0.0)
    p.add_argument("--monitor-off", type=float, default=0.0)
    p.add_argument("--charging-multiplier", type=float, default=2.5)


def cmd_provision(args: argparse.Namespace) -> int:
    stores = DataStores()
    stores.import_dir(args.data_dir)
    try:
        user_id = provision_user(
            stores, user_id=args.user_id, office=args.office,
            department=args.department, floor=args.floor,
            building=args.building, zone=args.zone,
            machine_type=args.machine_type, p_idle=args.p_idle,
            p_sidle=args.p_sidle, p_sleep=args.p_sleep, p_off=args.p_off,
            monitor_type=args.monitor_type, monitor_on=args.monitor_on,
            monitor_standby=args.monitor_standby, monitor_off=args.monitor_off,
            charging_multiplier=args.charging_multiplier)
    except DuplicateUser as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    stores.export_dir(args.data_dir)
    print(user_id)
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    clock = SystemClock()
    stores = DataStores()
    stores.import_dir(args.data_dir)
    site_tz = resolve_timezone(args.site_tz)
    engine = analytics.AnalyticsEngine(stores, site_tz=site_tz)

    service = ingestion.IngestionService(stores, clock)
    ingest_server = ingestion.serve(service, args.host, args.ingestion_port)
    console_service = console.ConsoleService(stores, engine, clock)
    console_server = console.serve(console_service, args.host, args.console_port)

    from . import httpglue
    httpglue.start_in_thread(ingest_server)
    httpglue.start_in_thread(console_server)
    log.info("ingestion on %s:%d, console on %s:%d", args.host,
             args.ingestion_port, args.host, args.console_port)

    scheduler = analytics.AnalyticsScheduler(engine, clock)
    stop = threading.Event()

    def run_scheduler():
        while not stop.is_set():
            scheduler.poll()
            clock.sleep(1)

    threading.Thread(target=run_scheduler, daemon=True).start()

    if args.weather_location:
        provider = (ingestion.FileWeatherProvider(args.weather_file)
                    if args.weather_file else ingestion.StubWeatherProvider())
        poller = ingestion.WeatherPoller(service, provider, args.weather_location,
                                         interval_min=args.weather_interval_min,
                                         clock=clock)

        def run_poller():
            while not stop.is_set():
                clock.sleep(poller.interval_s)
                poller.tick()

        threading.Thread(target=run_poller, daemon=True).start()

    def shutdown(signum, frame):
        stop.set()
        ingest_server.shutdown()
        console_server.shutdown()

    signal.signal(signal.SIGINT, shutdown)
    signal.signal(signal.SIGTERM, shutdown)
    print(f"serving; data dir {args.data_dir} (Ctrl-C to stop and export)")
    try:
        while not stop.is_set():
            clock.sleep(0.5)
    finally:
        stores.export_dir(args.data_dir)
        print(f"state exported to {args.data_dir}")
    return 0


def cmd_agent(args: argparse.Namespace) -> int:
    clock = SimClock(args.start_epoch) if args.simulated_clock else SystemClock()
    overrides = dict(user_id=args.user_id, ingestion_url=args.url,
                     sample_interval_s=args.sample_interval,
                     report_interval_s=args.report_interval)
    if args.config:
        config = agent_mod.load_agent_config(args.config, **overrides)
    else:
        missing = [k for k in ("user_id", "ingestion_url") if not overrides[k]]
        if missing:
            print("error: --user-id and --url are required without --config",
                  file=sys.stderr)
            return 2
        config = agent_mod.AgentConfig(
            **{k: v for k, v in overrides.items() if v is not None})
    url = config.ingestion_url
    profile = agent_mod.fetch_profile(url, config.user_id)
    ambient = agent_mod.SimulatedAmbientBackend(clock, seed=args.seed)
    if args.trace:
        observer = observer_from_trace(clock, load_trace(args.trace))
    else:
        observer = ScriptedObserver.constant(clock, PowerState(args.state))
    transport = agent_mod.HttpTransport(url)
    agent = agent_mod.run_agent(config, profile, ambient, observer, transport,
                                clock, args.duration)
    print(f"posted {agent.ambient_reports} ambient and "
          f"{agent.energy_reports} energy reports "
          f"({agent.sender.dropped} dropped, {len(agent.sender)} still buffered)")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="officemon",
        description="Office energy and comfort monitoring backend and tools.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("provision", help="register a user and create their streams")
    p.add_argument("--data-dir", default="./officemon-data")
    _add_provision_args(p)
    p.set_defaults(func=cmd_provision)

    p = sub.add_parser("serve", help="run ingestion + console + analytics")
    p.add_argument("--data-dir", default="./officemon-data")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--ingestion-port", type=int, default=8080)
    p.add_argument("--console-port", type=int, default=8081)
    p.add_argument("--site-tz", default="+0", help="site timezone (name or offset)")
    p.add_argument("--weather-location", default=None)
    p.add_argument("--weather-file", default=None,
                   help="JSON stub file instead of a live provider")
    p.add_argument("--weather-interval-min", type=float, default=15)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("agent", help="run one (simulated) edge agent")
    p.add_argument("--config", default=None,
                   help="key=value config file; flags below override it")
    p.add_argument("--user-id", default=None)
    p.add_argument("--url", default=None, help="ingestion base URL")
    p.add_argument("--duration", type=int, default=300, help="seconds to run")
    p.add_argument("--sample-interval", type=int, default=None)
    p.add_argument("--report-interval", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--state", default="sidle",
                   help="constant power state when no trace is given")
    p.add_argument("--trace", default=None, help="scripted power-state trace file")
    p.add_argument("--simulated-clock", action="store_true",
                   help="run the duration in simulated time (bulk backfill)")
    p.add_argument("--start-epoch", type=float, default=0.0)
    p.set_defaults(func=cmd_agent)

    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
