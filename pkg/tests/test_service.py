"""HTTP surface: the service must expose exactly what the library computes.

Responses are compared against the analysis layer's own dicts, so any
drift between the two (a renamed key, a dropped section, a default that
rounds differently) fails here rather than in a client.
"""
import numpy as np
import pytest
from fastapi.testclient import TestClient

from posmap import analysis, zoo
from posmap.service import create_app


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


def test_health(client):
    r = client.get("/health")
    assert r.status_code == 200
    body = r.json()
    assert body["status"] == "ok"
    assert body["version"]


def test_analyze_matches_library(client):
    r = client.post("/analyze", json={"source": {"zoo": "toeplitz2x2"}})
    assert r.status_code == 200
    spec = analysis.resolve_source({"zoo": "toeplitz2x2"})
    assert r.json() == analysis.analyze_map(spec)


def test_analyze_with_params(client):
    payload = {"source": {"zoo": "toeplitz2x2", "field": "real",
                          "params": {"a1": 1.0, "b2": 1.0, "b3": -2.0,
                                     "b1": 0.0, "c1": 0.0, "c3": 0.0}}}
    r = client.post("/analyze", json=payload)
    assert r.status_code == 200
    body = r.json()
    assert body["positivity"]["status"] == "no_violation_found"
    assert body["completely_positive"]["is_completely_positive"] is False
    assert body["verdict"]["decision"] == "unknown"


def test_analyze_explicit_matrix(client):
    sp = zoo.transpose_map(2, "real")
    payload = {"source": {"kind": "choi", "n": 2, "field": "real",
                          "matrix": {"field": "real", "rows": 4, "cols": 4,
                                     "data": sp.choi.tolist()}}}
    r = client.post("/analyze", json=payload)
    assert r.status_code == 200
    body = r.json()
    assert body["hill"]["m"] == 4
    assert body["completely_positive"]["is_completely_positive"] is False


def test_analyze_not_star_linear_is_diagnosed(client):
    rng = np.random.default_rng(1)
    payload = {"source": {"field": "real", "rows": 4, "cols": 4,
                          "data": rng.standard_normal((4, 4)).tolist()}}
    r = client.post("/analyze", json=payload)
    assert r.status_code == 422
    detail = r.json()["detail"]
    assert detail["message"] == "the map is not *-linear"
    assert detail["star_linear"]["is_star_linear"] is False


def test_convert(client):
    r = client.post("/convert", json={"source": {"zoo": "transpose2"},
                                      "to": "choi"})
    assert r.status_code == 200
    body = r.json()
    assert body["kind"] == "choi"
    assert body["n"] == 2 and body["q"] == 2


def test_hill(client):
    r = client.post("/hill", json={"source": {"zoo": "toeplitz2x2"}})
    assert r.status_code == 200
    body = r.json()
    assert body["m"] == 3
    assert body["positions"] == [[1, 1], [1, 2], [2, 1]]
    assert body["ahat"]["data"][0] == [[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]


def test_hill_rejects_non_star_linear(client):
    rng = np.random.default_rng(2)
    payload = {"source": {"field": "real", "rows": 4, "cols": 4,
                          "data": rng.standard_normal((4, 4)).tolist()}}
    r = client.post("/hill", json=payload)
    assert r.status_code == 422
    assert r.json()["detail"]["message"] == "the map is not *-linear"


def test_range_pattern_source(client):
    payload = {"source": {"n": 2, "q": 2, "positions": [[1, 1], [2, 2]]},
               "y": [1.0, -2.0], "field": "real"}
    r = client.post("/range", json=payload)
    assert r.status_code == 200
    body = r.json()
    assert body["decision"] == "reachable"
    assert body["certified"] is True
    assert body["witness"]["branch"] == "a"
    assert "best_residual" not in body  # grid keys only appear on the grid rung


def test_range_map_source(client):
    r = client.post("/range", json={"source": {"zoo": "upper2x2"},
                                    "y": [1.0, 0.0, 1.0], "field": "real"})
    assert r.status_code == 200
    body = r.json()
    assert body["decision"] == "not_reachable"
    assert body["certified"] is False


def test_range_hetero_rejected(client):
    payload = {"source": {"n": 2, "q": 2, "positions": [[1, 1], [2, 2]],
                          "remainder": "hetero"},
               "y": [1.0, 1.0], "field": "real"}
    r = client.post("/range", json=payload)
    assert r.status_code == 422
    assert "heterogeneous" in r.json()["detail"]


def test_census(client):
    r = client.get("/case2x2")
    assert r.status_code == 200
    assert r.json() == analysis.census_2x2()


def test_parse_errors_are_400(client):
    r = client.post("/analyze", json={"source": {"zoo": "nope"}})
    assert r.status_code == 400
    assert "detail" in r.json()

    r = client.post("/analyze", json={"source": {"field": "real", "rows": 1,
                                                 "cols": 1}})
    assert r.status_code == 400


def test_validation_errors_are_422(client):
    r = client.post("/analyze", json={})
    assert r.status_code == 422
    assert isinstance(r.json()["detail"], list)

    r = client.post("/analyze", json={"source": {"zoo": "transpose2"},
                                      "unknown_flag": True})
    assert r.status_code == 422

    r = client.post("/convert", json={"source": {"zoo": "transpose2"},
                                      "to": "kraus"})
    assert r.status_code == 422
