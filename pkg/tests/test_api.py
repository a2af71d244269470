"""Test the HTTP API with FastAPI's TestClient"""
import pytest
from fastapi.testclient import TestClient

from app.main import app


@pytest.fixture(scope="module")
def client():
    with TestClient(app) as client:
        yield client


def test_listings(client):
    claims = client.get("/claims").json()
    assert len(claims) == 10
    assert claims[0] == {"id": "two-extremes-tight", "summary": "Two-Extremes alcanza 2n-3 en line3"}
    assert "thm-line3" in client.get("/families").json()
    assert "pair-independent" in client.get("/mechanisms").json()


def test_run(client):
    response = client.post("/run", json={
        "instance": "line3", "mechanism": "two-extremes",
        "actions": [1, 2, 2, 2, 3], "positions": [[-1], [0], [0], [0], [2]],
    })
    assert response.status_code == 200
    body = response.json()
    assert body["outcome"] == {"1,3": 1.0}
    assert body["ratio"] == pytest.approx(7.0)


@pytest.mark.parametrize("payload", [
    {"instance": "square", "mechanism": "two-extremes", "actions": [1]},
    {"instance": "line3", "mechanism": "two-extremes", "actions": [1, 9]},
    {"instance": "line3", "mechanism": "two-extremes"},
])
def test_run_bad_request(client, payload):
    response = client.post("/run", json=payload)
    assert response.status_code == 400
    assert "Error" in response.json()["detail"]


def test_run_missing_mechanism(client):
    assert client.post("/run", json={"instance": "line3", "actions": [1]}).status_code == 422


def test_distortion(client):
    response = client.post("/distortion", json={"instance": "line3", "mechanism": "two-extremes", "n": 4})
    assert response.status_code == 200
    assert response.json()["best_ratio"] == pytest.approx(5.0)


def test_sweep(client):
    response = client.post("/sweep", json={"mechanism": "two-extremes", "n_values": [3, 4]})
    assert response.status_code == 200
    assert [row["empirical_distortion"] for row in response.json()] == pytest.approx([3.0, 5.0])


def test_reproduce(client):
    response = client.post("/reproduce/seven-thirds")
    assert response.status_code == 200
    assert response.json()["passed"]


def test_reproduce_family_with_params(client):
    response = client.post("/reproduce/thm-two-extremes", json={"n": 4})
    assert response.status_code == 200
    assert response.json()["params"]["n"] == 4


def test_reproduce_errors(client):
    assert client.post("/reproduce/unknown").status_code == 404
    assert client.post("/reproduce/seven-thirds", json={"bogus": 1}).status_code == 400
