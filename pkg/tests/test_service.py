import warnings

import pytest

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    from fastapi.testclient import TestClient

from qdouble.service.app import app


@pytest.fixture(scope="module")
def client():
    with TestClient(app) as c:
        yield c


def test_health_and_listing(client):
    assert client.get("/health").json() == {"status": "ok"}
    subs = client.get("/subcommands").json()["subcommands"]
    assert "hopf-verify" in subs and "all" in subs


def test_braid_endpoint(client):
    resp = client.post("/run/braid", json={"seed": 1, "params": {"n": 2, "i": 1, "j": 1}})
    assert resp.status_code == 200
    body = resp.json()
    assert body["passed"] and body["checks"][0]["name"] == "braiding_Z2_1_1"
    assert body["config"]["seed"] == 1


def test_unknown_subcommand(client):
    assert client.post("/run/nope", json={}).status_code == 404


@pytest.mark.parametrize("body", [
    {"params": {"n": 1}},
    {"params": {"bogus": 3}},
    {"seed": -1},
    {"extra": True},
])
def test_bad_configs_are_422(client, body):
    resp = client.post("/run/braid", json=body)
    assert resp.status_code == 422
    assert resp.json()["error"] == "config"


def test_budget_is_507(client):
    resp = client.post("/run/vacuum", json={"support_cap": 2, "params": {"group": "z2"}})
    assert resp.status_code == 507
    assert resp.json()["error"] == "budget"


def test_unknown_group_is_config_error(client):
    resp = client.post("/run/vacuum", json={"params": {"group": "q8x"}})
    assert resp.status_code == 422 and resp.json()["error"] == "config"
