import json
import math

import pytest
from fastapi.testclient import TestClient

from lpx.service import build_app


@pytest.fixture(scope="module")
def sec32_body():
    with open("fixtures/sec32.json") as fh:
        return json.load(fh)


@pytest.fixture(scope="module")
def client():
    return TestClient(build_app())


@pytest.fixture(scope="module")
def history_client():
    app = build_app(
        history_path="fixtures/history_demo.jsonl",
        intent_path="fixtures/intent_demo.json",
        jobs=1,
    )
    return TestClient(app)


class TestExplainEndpoint:
    def test_golden_pairs(self, client, sec32_body):
        resp = client.post("/api/v1/explain", json=sec32_body)
        assert resp.status_code == 200
        doc = resp.json()
        assert doc["pairings"] == [
            {"mv": "MV1", "cv": "CV1", "side": "HI"},
            {"mv": "MV2", "cv": "CV2", "side": "LO"},
        ]

    def test_malformed_body_422(self, client, sec32_body):
        bad = {**sec32_body, "costs": [1.0]}
        resp = client.post("/api/v1/explain", json=bad)
        assert resp.status_code == 422
        assert any(v["code"] == "DimensionMismatch" for v in resp.json()["violations"])

    def test_unbounded_409_with_stage(self, client):
        body = json.load(open("fixtures/unbounded.json"))
        resp = client.post("/api/v1/explain", json=body)
        assert resp.status_code == 409
        payload = resp.json()
        assert payload["stage"] == "solve"
        assert payload["error"] == "Unbounded"

    def test_identical_requests_identical_bodies(self, client, sec32_body):
        a = client.post("/api/v1/explain", json=sec32_body).text
        b = client.post("/api/v1/explain", json=sec32_body).text
        assert a == b


class TestWhatIf:
    def test_clamp_reroutes(self, client, sec32_body):
        resp = client.post("/api/v1/whatif", json={
            "base": sec32_body,
            "overrides": [{"id": "MV1", "lower": 48.0, "upper": 48.0}],
        })
        assert resp.status_code == 200
        diff = resp.json()["diff"]
        assert {"mv": "MV1", "cv": "CV1", "side": "HI"} in diff["pairs_removed"]
        assert any(c["mv"] == "MV1" and c["after"] == "Pinned"
                   for c in diff["mv_status_changes"])
        assert any(c["cv"] == "CV1" for c in diff["cv_changes"])

    def test_empty_overrides_no_diff(self, client, sec32_body):
        resp = client.post("/api/v1/whatif", json={"base": sec32_body, "overrides": []})
        assert resp.status_code == 200
        payload = resp.json()
        assert payload["before"] == payload["after"]
        assert all(not v for v in payload["diff"].values())

    def test_cost_sign_flip_matches_sweep_geometry(self, client, sec32_body):
        # costs (12.5, -0.1): theta just below 0 -> the wrap region's vertex,
        # CV1-HI with CV2 released... verified against the sweep sample there.
        from lpx.model import validate_snapshot
        from lpx.attribution import explain as _explain
        import dataclasses, numpy as np

        resp = client.post("/api/v1/whatif", json={
            "base": sec32_body,
            "overrides": [{"id": "MV2", "cost": -0.1}],
        })
        assert resp.status_code == 200
        after = resp.json()["after"]

        snap = validate_snapshot(sec32_body)
        theta = math.atan2(-0.1 / 12.5, 1.0)
        costs = np.array([math.cos(theta), math.sin(theta)])
        ref = _explain(dataclasses.replace(snap, costs=costs))
        assert list(after["solution"]["cv_status"]) == [s.value for s in ref.solution.cv_status]

    def test_unknown_id_422(self, client, sec32_body):
        resp = client.post("/api/v1/whatif", json={
            "base": sec32_body,
            "overrides": [{"id": "MV9", "cost": 1.0}],
        })
        assert resp.status_code == 422

    def test_bad_bounds_422(self, client, sec32_body):
        resp = client.post("/api/v1/whatif", json={
            "base": sec32_body,
            "overrides": [{"id": "CV1", "lower": 2.0, "upper": 1.0}],
        })
        assert resp.status_code == 422

    def test_latest_base_without_history_404(self, client):
        resp = client.post("/api/v1/whatif", json={"base": "latest", "overrides": []})
        assert resp.status_code == 404

    def test_latest_base_with_history(self, history_client):
        resp = history_client.post("/api/v1/whatif", json={"base": "latest", "overrides": []})
        assert resp.status_code == 200


class TestHistorySummary:
    def test_404_without_history(self, client):
        assert client.get("/api/v1/history/summary").status_code == 404

    def test_summary_rows(self, history_client):
        resp = history_client.get("/api/v1/history/summary")
        assert resp.status_code == 200
        payload = resp.json()
        assert payload["window"]["intervals"] == 3
        mv1 = next(r for r in payload["rows"] if r["mv"] == "MV1")
        assert mv1["top"][0]["label"] == "CV1-HI"

    def test_live_overlay(self, history_client, sec32_body):
        resp = history_client.post("/api/v1/live", json=sec32_body)
        assert resp.status_code == 200
        summary = history_client.get("/api/v1/history/summary").json()
        overlay = summary["overlay"]
        assert overlay["mv"]["MV1"]["color"] == "GREEN"
        assert overlay["mv"]["MV2"]["color"] == "GREEN"

    def test_health(self, history_client):
        payload = history_client.get("/api/v1/health").json()
        assert payload["name"] == "lpx"
        assert payload["history_loaded"] is True
        assert payload["intent_configured"] is True

    def test_root_serves_placeholder_without_ui(self, client):
        resp = client.get("/")
        assert resp.status_code == 200
