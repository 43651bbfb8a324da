from __future__ import annotations

import json
import time

import pytest
from fastapi.testclient import TestClient

import fixtures
from roomsmith.gateway.api import ERROR_CODES, create_app


def room_body():
    room = fixtures.case_study_room()
    return {
        "room_type": room.room_type,
        "requirement": room.requirement,
        "size": room.size,
        "polygon": room.to_dict()["polygon"],
    }


@pytest.fixture
def client(tmp_path):
    engine = fixtures.make_engine(tmp_path)
    app = create_app(engine)
    with TestClient(app, raise_server_exceptions=False) as c:
        yield c


def create_session(client, mode="manual", options=None):
    resp = client.post(
        "/sessions",
        json={"room": room_body(), "mode": mode, "options": options or {"seed": 5, "name": "floorplan_1b1b"}},
    )
    assert resp.status_code == 201, resp.text
    return resp.json()["id"]


def run_manual_loop(client, sid):
    client.post(f"/sessions/{sid}/advance")
    client.post(f"/sessions/{sid}/decision", json={"action": "reject", "feedback": fixtures.FEEDBACK_TEXT})
    for _ in range(3):
        client.post(f"/sessions/{sid}/advance")
        client.post(f"/sessions/{sid}/decision", json={"action": "accept"})


class TestSessionRoutes:
    def test_create_and_get(self, client):
        sid = create_session(client)
        got = client.get(f"/sessions/{sid}").json()
        assert got["stage"] == "selection"
        assert got["name"] == "floorplan_1b1b"

    def test_invalid_room_code(self, client):
        resp = client.post(
            "/sessions",
            json={"room": {"room_type": "x", "polygon": {"vertices": [[0, 0], [1, 0], [2, 0]]}}},
        )
        assert resp.status_code == 400
        assert resp.json()["error"]["code"] == "invalid_room"

    def test_unknown_session_code(self, client):
        resp = client.post("/sessions/nope/decision", json={"action": "accept"})
        assert resp.status_code == 404
        assert resp.json()["error"]["code"] == "unknown_session"

    def test_proposal_lifecycle(self, client):
        sid = create_session(client)
        resp = client.get(f"/sessions/{sid}/proposal")
        assert resp.status_code == 409
        assert resp.json()["error"]["code"] == "no_pending_proposal"
        client.post(f"/sessions/{sid}/advance")
        got = client.get(f"/sessions/{sid}/proposal").json()
        assert got["stage"] == "selection"
        assert got["raw"] == fixtures.SELECTION_V1
        assert got["translated"]

    def test_decision_error_codes(self, client):
        sid = create_session(client)
        resp = client.post(f"/sessions/{sid}/decision", json={"action": "accept"})
        assert resp.json()["error"]["code"] == "no_pending_proposal"
        client.post(f"/sessions/{sid}/mode", json={"mode": "auto"})
        resp = client.post(f"/sessions/{sid}/decision", json={"action": "accept"})
        assert resp.json()["error"]["code"] == "wrong_mode"

    def test_full_run_and_exports(self, client):
        sid = create_session(client)
        run_manual_loop(client, sid)
        resp = client.post(f"/sessions/{sid}/optimize?wait=true")
        assert resp.status_code == 202
        assert resp.json()["stage"] == "done"

        scene = client.get(f"/sessions/{sid}/scene").json()
        assert scene["format"] == "roomsmith-scene/1"
        names = [o["object_name"] for o in scene["objects"]]
        assert names.count("plants") == 3 and "sidetables" not in names

        loss = client.get(f"/sessions/{sid}/loss.csv")
        assert loss.status_code == 200
        assert loss.text.startswith("object_id,iteration,proposed_total,accepted,best_total,temperature")

        log = client.get(f"/sessions/{sid}/log")
        assert log.status_code == 200
        kinds = [json.loads(line)["kind"] for line in log.text.strip().splitlines()]
        assert kinds[0] == "created" and kinds[-1] == "export"

        for path in ("top_view.png", "loss_curve.png"):
            img = client.get(f"/sessions/{sid}/{path}")
            assert img.status_code == 200
            assert img.content[:8] == b"\x89PNG\r\n\x1a\n"

        snap = client.get(f"/sessions/{sid}/snapshots/0/image.png")
        assert snap.status_code == 200 and snap.content[:8] == b"\x89PNG\r\n\x1a\n"
        missing = client.get(f"/sessions/{sid}/snapshots/9999/image.png")
        assert missing.status_code == 404

    def test_exports_404_before_done(self, client):
        sid = create_session(client)
        resp = client.get(f"/sessions/{sid}/scene")
        assert resp.status_code == 404
        assert resp.json()["error"]["code"] == "not_found"

    def test_optimize_wrong_stage(self, client):
        sid = create_session(client)
        resp = client.post(f"/sessions/{sid}/optimize?wait=true")
        assert resp.status_code == 409
        assert resp.json()["error"]["code"] == "invalid_transition"

    def test_auto_mode_run(self, tmp_path):
        # grader rejects the first roster, passes everything after the revision
        engine = fixtures.make_engine(
            tmp_path, client=fixtures.case_study_client(("Score: 60", "Score: 80"))
        )
        with TestClient(create_app(engine), raise_server_exceptions=False) as c:
            sid = create_session(c, mode="auto")
            for _ in range(3):
                c.post(f"/sessions/{sid}/advance")
            got = c.get(f"/sessions/{sid}").json()
            assert got["stage"] == "optimizing"
            assert [g["score"] for g in got["grades"]] == [60, 80, 80, 80]

    def test_fuzzed_malformed_requests_never_crash(self, client):
        bads = [
            ("post", "/sessions", {"json": {"room": 42}}),
            ("post", "/sessions", {"json": {}}),
            ("post", "/sessions", {"content": b"\x00\x01notjson"}),
            ("post", "/sessions/abc/decision", {"json": {"action": []}}),
            ("post", "/sessions/abc/mode", {"json": {"mode": None}}),
            ("get", "/sessions/%00weird", {}),
            ("post", "/sessions/abc/optimize", {"json": {"bogus": True}}),
        ]
        for method, url, kwargs in bads:
            resp = getattr(client, method)(url, **kwargs)
            assert resp.status_code < 600
            if resp.status_code >= 400 and resp.headers.get("content-type", "").startswith("application/json"):
                body = resp.json()
                if "error" in body:
                    assert body["error"]["code"] in ERROR_CODES

    def test_token_auth(self, tmp_path):
        engine = fixtures.make_engine(tmp_path)
        app = create_app(engine, api_token="sekret")
        with TestClient(app, raise_server_exceptions=False) as c:
            resp = c.post("/sessions", json={"room": room_body()})
            assert resp.status_code == 401
            assert resp.json()["error"]["code"] == "unauthorized"
            resp = c.post(
                "/sessions", json={"room": room_body()}, headers={"Authorization": "Bearer sekret"}
            )
            assert resp.status_code == 201


class TestEventStream:
    def _collect_sse(self, client, sid, after=-1, limit=500):
        events = []
        with client.stream("GET", f"/sessions/{sid}/events", params={"after": after}) as resp:
            current = {}
            for line in resp.iter_lines():
                if line.startswith("id: "):
                    current["id"] = int(line[4:])
                elif line.startswith("event: "):
                    current["event"] = line[7:]
                elif line.startswith("data: "):
                    current["data"] = line[6:]
                elif line == "":
                    if current.get("event") == "end":
                        return events
                    if current:
                        events.append(current)
                    current = {}
                if len(events) >= limit:
                    break
        return events

    def test_stream_matches_log_order(self, client):
        sid = create_session(client)
        run_manual_loop(client, sid)
        client.post(f"/sessions/{sid}/optimize?wait=true")
        streamed = self._collect_sse(client, sid)
        log = client.get(f"/sessions/{sid}/log").text.strip().splitlines()
        assert [e["id"] for e in streamed] == [json.loads(line)["seq"] for line in log]
        assert [e["event"] for e in streamed] == [json.loads(line)["kind"] for line in log]

    def test_resume_after_sequence(self, client):
        sid = create_session(client)
        run_manual_loop(client, sid)
        client.post(f"/sessions/{sid}/optimize?wait=true")
        full = self._collect_sse(client, sid)
        tail = self._collect_sse(client, sid, after=full[4]["id"])
        assert [e["id"] for e in tail] == [e["id"] for e in full[5:]]

    def test_background_optimization_streams_snapshots(self, client):
        sid = create_session(client)
        run_manual_loop(client, sid)
        resp = client.post(f"/sessions/{sid}/optimize")
        assert resp.status_code == 202 and resp.json()["status"] == "started"
        deadline = time.time() + 60
        while time.time() < deadline:
            got = client.get(f"/sessions/{sid}").json()
            if got["stage"] in ("done", "failed"):
                break
            time.sleep(0.1)
        assert got["stage"] == "done"
        streamed = self._collect_sse(client, sid)
        kinds = [e["event"] for e in streamed]
        assert "snapshot" in kinds
        assert kinds[-1] == "export"
