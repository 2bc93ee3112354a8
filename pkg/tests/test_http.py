"""Live HTTP round trips: agent transport to ingestion, and the console
JSON API contract."""

from __future__ import annotations

import pytest
import requests

from officemon import console as console_mod
from officemon import ingestion as ingestion_mod
from officemon.agent import HttpTransport, fetch_profile
from officemon.analytics import AnalyticsEngine
from officemon.clock import SimClock, utc_from_epoch
from officemon.console import ConsoleService
from officemon.httpglue import start_in_thread
from officemon.ingestion import IngestionService
from officemon.stores import DataStores
from conftest import T0, provision
from test_analytics import DAY0, seed_ambient, seed_energy

EXAMPLE = ('{"id": "u1", "tsutc": "03-14-22-09:30:00", "light":50, '
           '"tempC":25, "rh":60, "indicator": "ambsensor"}')


@pytest.fixture
def stack():
    stores = DataStores()
    clock = SimClock(T0)
    provision(stores, "u1", department="R&D", building="HQ", zone="Z1")
    engine = AnalyticsEngine(stores)
    ingest = IngestionService(stores, clock)
    consol = ConsoleService(stores, engine, clock)
    ingest_server = ingestion_mod.serve(ingest, "127.0.0.1", 0)
    console_server = console_mod.serve(consol, "127.0.0.1", 0)
    start_in_thread(ingest_server)
    start_in_thread(console_server)
    ingest_url = f"http://127.0.0.1:{ingest_server.server_address[1]}"
    console_url = f"http://127.0.0.1:{console_server.server_address[1]}"
    yield stores, clock, engine, ingest_url, console_url
    ingest_server.shutdown()
    console_server.shutdown()


class TestIngestionHttp:
    def test_sensor_post_and_health(self, stack):
        stores, clock, engine, ingest_url, _ = stack
        assert requests.get(f"{ingest_url}/health", timeout=5).status_code == 200
        resp = requests.post(f"{ingest_url}/sensor", data=EXAMPLE.encode(),
                             timeout=5)
        assert resp.status_code == 200
        assert stores.sensors.count("u1:ambsensor") == 1

    def test_error_mapping(self, stack):
        stores, clock, engine, ingest_url, _ = stack
        bad = EXAMPLE.replace('"tempC":25', '"tempF":77')
        assert requests.post(f"{ingest_url}/sensor", data=bad.encode(),
                             timeout=5).status_code == 400
        ghost = EXAMPLE.replace('"u1"', '"ghost"')
        assert requests.post(f"{ingest_url}/sensor", data=ghost.encode(),
                             timeout=5).status_code == 404
        assert requests.get(f"{ingest_url}/nothing-here",
                            timeout=5).status_code == 404

    def test_http_transport_and_profile_fetch(self, stack):
        stores, clock, engine, ingest_url, _ = stack
        transport = HttpTransport(ingest_url)
        assert transport.post(EXAMPLE)
        assert not transport.post("garbage")
        profile = fetch_profile(ingest_url, "u1")
        assert profile.p_sidle == 30.0

    def test_meter_endpoint(self, stack):
        stores, clock, engine, ingest_url, _ = stack
        stores.register_meter("m1", "printer-3")
        line = ('{"id": "m1", "tsutc": "03-14-22-10:00:00", "watts":85, '
                '"kwh":12.5, "indicator": "plugmeter"}')
        assert requests.post(f"{ingest_url}/meter", data=line.encode(),
                             timeout=5).status_code == 200
        assert stores.sensors.count("m1:plugmeter") == 1


class TestConsoleHttp:
    def seed(self, stores, engine):
        seed_ambient(stores, "u1", T0 + 100, 25.0, 60.0)
        seed_energy(stores, "u1", T0 + 200, 10.0)
        engine.fifteen_minute_tick(utc_from_epoch(T0 + 900))
        engine.midnight_tick(DAY0)

    def test_home_json_contract(self, stack):
        stores, clock, engine, _, console_url = stack
        self.seed(stores, engine)
        data = requests.get(f"{console_url}/api/home/u1", timeout=5).json()
        assert data["userId"] == "u1"
        assert data["ambient"]["tempC"] == 25.0
        assert data["ambient"]["rh"] == 60.0
        assert data["trend"]["color"] == "orange"
        assert data["comfort"] == {"lastVote": None, "min": -3, "max": 3}
        assert data["flower"] == "flourishing"
        assert data["target"]["source"] == "policy"

    def test_energy_json_contract(self, stack):
        stores, clock, engine, _, console_url = stack
        self.seed(stores, engine)
        data = requests.get(f"{console_url}/api/energy/u1", timeout=5).json()
        assert data["dailies"] == [{"date": "2022-03-14", "totalWh": 10.0}]
        assert data["computedAverage"] == 10.0
        assert set(data["groupDots"]) == {"department", "floor", "building"}
        assert data["targetLine"] == 10.0

    def test_comfort_post(self, stack):
        stores, clock, engine, _, console_url = stack
        ok = requests.post(f"{console_url}/api/comfort/u1",
                           json={"value": 2}, timeout=5)
        assert ok.status_code == 200
        assert ok.json()["zone"] == "Z1"
        bad = requests.post(f"{console_url}/api/comfort/u1",
                            json={"value": -4}, timeout=5)
        assert bad.status_code == 400
        missing = requests.post(f"{console_url}/api/comfort/ghost",
                                json={"value": 1}, timeout=5)
        assert missing.status_code == 404

    def test_notify_report_rogue(self, stack):
        stores, clock, engine, _, console_url = stack
        self.seed(stores, engine)
        sent = requests.post(f"{console_url}/api/notify",
                             json={"audience": "department:R&D",
                                   "text": "turn it down"}, timeout=5)
        assert sent.status_code == 200
        assert sent.json()["delivered"] == 1
        home = requests.get(f"{console_url}/api/home/u1", timeout=5).json()
        assert [n["text"] for n in home["notifications"]] == ["turn it down"]

        rows = requests.get(
            f"{console_url}/api/report",
            params={"groupBy": "user", "from": "2022-03-14",
                    "to": "2022-03-14", "role": "manager"}, timeout=5).json()
        assert rows["rows"][0]["subject"] == "u1"
        forbidden = requests.get(
            f"{console_url}/api/report",
            params={"groupBy": "user", "from": "2022-03-14",
                    "to": "2022-03-14"}, timeout=5)
        assert forbidden.status_code == 403

        rogue = requests.get(f"{console_url}/api/rogue",
                             params={"from": "2022-03-14", "to": "2022-03-15"},
                             timeout=5).json()
        assert rogue == {"zones": []}

    def test_target_endpoint(self, stack):
        stores, clock, engine, _, console_url = stack
        resp = requests.post(f"{console_url}/api/target/u1",
                             json={"wh": 15.0}, timeout=5)
        assert resp.status_code == 200
        assert stores.metadata.get_target("u1") == 15.0
        bad = requests.post(f"{console_url}/api/target/u1",
                            json={"wh": -2}, timeout=5)
        assert bad.status_code == 400

    def test_cors_preflight(self, stack):
        stores, clock, engine, _, console_url = stack
        resp = requests.options(f"{console_url}/api/home/u1", timeout=5)
        assert resp.status_code == 204
        assert resp.headers["Access-Control-Allow-Origin"] == "*"
