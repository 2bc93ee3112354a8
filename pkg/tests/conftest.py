"""Shared fixtures: fresh stores, a provisioning helper, simulated
clocks, and deterministic sensor backends."""

from __future__ import annotations

from datetime import datetime, timezone

import pytest

from officemon.agent import AgentConfig
from officemon.clock import SimClock
from officemon.domain import AmbientReading
from officemon.stores import DataStores, provision_user

#: 2022-03-14 00:00:00 UTC, a Monday; fleet days start here.
T0 = int(datetime(2022, 3, 14, tzinfo=timezone.utc).timestamp())


@pytest.fixture
def stores() -> DataStores:
    return DataStores()


@pytest.fixture
def clock() -> SimClock:
    return SimClock(T0)


class FixedAmbientBackend:
    """Always returns the same reading; optionally scripted to fail."""

    def __init__(self, light=50, temp_c=25, rh=60, failing=False):
        self.reading = AmbientReading(light=light, temp_c=temp_c, rh=rh)
        self.failing = failing
        self.reads = 0

    def read(self) -> AmbientReading:
        self.reads += 1
        if self.failing:
            raise ConnectionError("sensor stick unplugged")
        return self.reading


def provision(stores: DataStores, user_id: str, *, department="R&D",
              floor="2", building="HQ", zone="Z1", p_off=1.0, p_sleep=2.0,
              p_idle=10.0, p_sidle=30.0, **kwargs) -> str:
    return provision_user(
        stores, user_id=user_id, office=f"office-{user_id}",
        department=department, floor=floor, building=building, zone=zone,
        machine_type="desktop", p_idle=p_idle, p_sidle=p_sidle,
        p_sleep=p_sleep, p_off=p_off, **kwargs)


@pytest.fixture
def provisioned(stores) -> DataStores:
    provision(stores, "u1")
    return stores


def default_config(user_id="u1", **kwargs) -> AgentConfig:
    return AgentConfig(user_id=user_id, ingestion_url="mem://", **kwargs)
