"""HTTP + SSE gateway over session engines.

Every module error surfaces as a stable machine-readable code (ERROR_CODES);
the event stream is Server-Sent Events with the event's sequence number as the
SSE id, resumable via Last-Event-ID or ?after=. Requests for one session are
serialized by a per-session lock; optimization runs on a background thread and
streams snapshot events while it works.
"""

from __future__ import annotations

import base64
import binascii
import json
import threading
import time
from typing import Iterator

from fastapi import Depends, FastAPI, Header, HTTPException, Query, Request
from fastapi.responses import JSONResponse, PlainTextResponse, Response, StreamingResponse
from pydantic import BaseModel, Field

from ..agents import ClientError, StageFailed, UngradableReply
from ..annealer import Unplaceable
from ..render import render_top_view
from ..roomspec import InvalidRoom, room_from_dict
from ..ruledsl import ParseError
from ..scene import SceneDocument, layout_from_dict, load_scene, scene_json
from ..session import (
    InvalidTransition,
    NoPendingProposal,
    Session,
    SessionClosed,
    SessionEngine,
    SessionError,
    WrongMode,
)

# closed enumeration of API error codes (documented in README)
ERROR_CODES = (
    "invalid_room",
    "validation_error",
    "unknown_session",
    "no_pending_proposal",
    "wrong_mode",
    "session_closed",
    "invalid_transition",
    "parse_error",
    "stage_failed",
    "unplaceable",
    "ungradable_reply",
    "provider_error",
    "unauthorized",
    "not_found",
    "conflict",
)


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        assert code in ERROR_CODES
        self.status = status
        self.code = code
        self.message = message


def _map_exception(e: Exception) -> ApiError:
    if isinstance(e, InvalidRoom):
        return ApiError(400, "invalid_room", str(e))
    if isinstance(e, NoPendingProposal):
        return ApiError(409, "no_pending_proposal", str(e))
    if isinstance(e, WrongMode):
        return ApiError(409, "wrong_mode", str(e))
    if isinstance(e, SessionClosed):
        return ApiError(409, "session_closed", str(e))
    if isinstance(e, InvalidTransition):
        return ApiError(409, "invalid_transition", str(e))
    if isinstance(e, ParseError):
        return ApiError(422, "parse_error", str(e))
    if isinstance(e, StageFailed):
        return ApiError(502, "stage_failed", str(e))
    if isinstance(e, Unplaceable):
        return ApiError(409, "unplaceable", str(e))
    if isinstance(e, UngradableReply):
        return ApiError(502, "ungradable_reply", str(e))
    if isinstance(e, ClientError):
        return ApiError(502, "provider_error", str(e))
    if isinstance(e, SessionError):
        return ApiError(409, "conflict", str(e))
    raise e


class RoomBody(BaseModel):
    room_type: str
    requirement: str = ""
    function: str = ""
    size: float | None = None
    polygon: dict


class CreateBody(BaseModel):
    room: RoomBody
    mode: str = "manual"
    options: dict = Field(default_factory=dict)
    reference_images: list[dict] = Field(default_factory=list)  # {name, data_b64}


class DecisionBody(BaseModel):
    action: str
    feedback: str = ""
    raw_text: str = ""


class ModeBody(BaseModel):
    mode: str


class SessionRegistry:
    """In-memory session handles plus one lock per session id."""

    def __init__(self, engine: SessionEngine):
        self.engine = engine
        self._sessions: dict[str, Session] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()

    def lock(self, session_id: str) -> threading.Lock:
        with self._registry_lock:
            return self._locks.setdefault(session_id, threading.Lock())

    def put(self, session: Session) -> None:
        with self._registry_lock:
            self._sessions[session.id] = session

    def get(self, session_id: str) -> Session:
        with self._registry_lock:
            found = self._sessions.get(session_id)
        if found is not None:
            return found
        if not self.engine.store.exists(session_id):
            raise ApiError(404, "unknown_session", f"no session {session_id!r}")
        session = self.engine.store.load(session_id)
        self.put(session)
        return session


def create_app(engine: SessionEngine, api_token: str | None = None) -> FastAPI:
    app = FastAPI(title="roomsmith gateway", version="1")
    registry = SessionRegistry(engine)
    app.state.registry = registry

    def check_auth(authorization: str | None = Header(default=None)):
        if api_token and authorization != f"Bearer {api_token}":
            raise ApiError(401, "unauthorized", "missing or wrong API token")

    @app.exception_handler(ApiError)
    async def on_api_error(_request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content={"error": {"code": exc.code, "message": exc.message}})

    @app.exception_handler(Exception)
    async def on_module_error(_request: Request, exc: Exception):
        try:
            mapped = _map_exception(exc)
        except Exception:
            return JSONResponse(
                status_code=500,
                content={"error": {"code": "validation_error", "message": f"unexpected: {exc}"}},
            )
        return JSONResponse(status_code=mapped.status, content={"error": {"code": mapped.code, "message": mapped.message}})

    def session_view(session: Session) -> dict:
        return {
            "id": session.id,
            "stage": session.stage,
            "mode": session.mode,
            "name": session.name,
            "room": session.room.to_dict(),
            "accepted_stages": sorted(session.accepted),
            "has_pending": session.pending is not None,
            "feedback": session.feedback,
            "grades": session.grades,
            "exports": session.exports,
            "snapshot_count": session.snapshot_count,
            "error": session.error,
            "event_count": len(session.events),
            "state_hash": session.state_hash(),
        }

    @app.post("/sessions", status_code=201, dependencies=[Depends(check_auth)])
    def create_session(body: CreateBody):
        try:
            room = room_from_dict(body.room.model_dump())
        except InvalidRoom as e:
            raise ApiError(400, "invalid_room", str(e))
        images = []
        for rec in body.reference_images:
            try:
                images.append((rec["name"], base64.b64decode(rec["data_b64"])))
            except (KeyError, binascii.Error) as e:
                raise ApiError(400, "validation_error", f"bad reference image record: {e}")
        try:
            session = engine.create(room, mode=body.mode, options=body.options, reference_images=images)
        except Exception as e:  # noqa: BLE001 - mapped to stable codes
            raise _map_exception(e)
        registry.put(session)
        return session_view(session)

    @app.get("/sessions/{session_id}", dependencies=[Depends(check_auth)])
    def get_session(session_id: str):
        return session_view(registry.get(session_id))

    @app.get("/sessions/{session_id}/proposal", dependencies=[Depends(check_auth)])
    def get_proposal(session_id: str):
        session = registry.get(session_id)
        if session.pending is None:
            raise ApiError(409, "no_pending_proposal", "no proposal awaiting a decision")
        return {
            "stage": session.pending.stage,
            "raw": session.pending.raw,
            "translated": session.pending.translated,
        }

    @app.post("/sessions/{session_id}/advance", dependencies=[Depends(check_auth)])
    def advance(session_id: str):
        session = registry.get(session_id)
        with registry.lock(session_id):
            try:
                engine.advance(session)
            except Exception as e:  # noqa: BLE001
                raise _map_exception(e)
        return session_view(session)

    @app.post("/sessions/{session_id}/decision", dependencies=[Depends(check_auth)])
    def decide(session_id: str, body: DecisionBody):
        session = registry.get(session_id)
        with registry.lock(session_id):
            try:
                engine.decide(session, body.action, feedback=body.feedback, raw_text=body.raw_text)
            except Exception as e:  # noqa: BLE001
                raise _map_exception(e)
        return session_view(session)

    @app.post("/sessions/{session_id}/mode", dependencies=[Depends(check_auth)])
    def set_mode(session_id: str, body: ModeBody):
        session = registry.get(session_id)
        with registry.lock(session_id):
            try:
                engine.set_mode(session, body.mode)
            except Exception as e:  # noqa: BLE001
                raise _map_exception(e)
        return session_view(session)

    @app.post("/sessions/{session_id}/optimize", status_code=202, dependencies=[Depends(check_auth)])
    def start_optimization(session_id: str, wait: bool = Query(default=False)):
        session = registry.get(session_id)
        if session.stage != "optimizing":
            raise ApiError(409, "invalid_transition", f"session stage is {session.stage!r}, not 'optimizing'")

        def run():
            with registry.lock(session_id):
                try:
                    engine.run_optimization(session)
                except Exception:  # noqa: BLE001 - recorded as an error event already
                    pass

        if wait:
            with registry.lock(session_id):
                try:
                    engine.run_optimization(session)
                except Exception as e:  # noqa: BLE001
                    raise _map_exception(e)
            return session_view(session)
        thread = threading.Thread(target=run, name=f"optimize-{session_id}", daemon=True)
        thread.start()
        return {"status": "started", "id": session_id}

    @app.get("/sessions/{session_id}/events", dependencies=[Depends(check_auth)])
    def event_stream(
        session_id: str,
        after: int = Query(default=-1),
        last_event_id: str | None = Header(default=None, alias="Last-Event-ID"),
    ):
        session = registry.get(session_id)
        start_after = after
        if last_event_id is not None:
            try:
                start_after = max(start_after, int(last_event_id))
            except ValueError:
                pass

        def stream() -> Iterator[bytes]:
            cursor = start_after + 1
            idle = 0.0
            while True:
                events = session.events
                while cursor < len(events):
                    event = events[cursor]
                    data = json.dumps(
                        {"seq": event.seq, "ts": event.ts, "kind": event.kind, "payload": event.payload},
                        sort_keys=True,
                    )
                    yield f"id: {event.seq}\nevent: {event.kind}\ndata: {data}\n\n".encode()
                    cursor += 1
                    idle = 0.0
                if session.stage in ("done", "failed") and cursor >= len(session.events):
                    yield b"event: end\ndata: {}\n\n"
                    return
                time.sleep(0.05)
                idle += 0.05
                if idle >= 15.0:
                    yield b": keep-alive\n\n"
                    idle = 0.0

        return StreamingResponse(stream(), media_type="text/event-stream")

    def _export_path(session_id: str, filename: str):
        path = engine.store.exports_dir(session_id) / filename
        if not path.exists():
            raise ApiError(404, "not_found", f"export {filename} not available yet")
        return path

    @app.get("/sessions/{session_id}/scene", dependencies=[Depends(check_auth)])
    def get_scene(session_id: str):
        registry.get(session_id)
        return Response(_export_path(session_id, "scene.json").read_bytes(), media_type="application/json")

    @app.get("/sessions/{session_id}/loss.csv", dependencies=[Depends(check_auth)])
    def get_loss_csv(session_id: str):
        registry.get(session_id)
        return PlainTextResponse(_export_path(session_id, "loss.csv").read_text("utf-8"), media_type="text/csv")

    @app.get("/sessions/{session_id}/log", dependencies=[Depends(check_auth)])
    def get_event_log(session_id: str):
        registry.get(session_id)
        return PlainTextResponse(
            engine.store.event_log_bytes(session_id).decode("utf-8"), media_type="application/jsonl"
        )

    @app.get("/sessions/{session_id}/top_view.png", dependencies=[Depends(check_auth)])
    def get_top_view(session_id: str):
        registry.get(session_id)
        return Response(_export_path(session_id, "top_view.png").read_bytes(), media_type="image/png")

    @app.get("/sessions/{session_id}/loss_curve.png", dependencies=[Depends(check_auth)])
    def get_loss_curve(session_id: str):
        registry.get(session_id)
        return Response(_export_path(session_id, "loss_curve.png").read_bytes(), media_type="image/png")

    @app.get("/sessions/{session_id}/snapshots/{index}/image.png", dependencies=[Depends(check_auth)])
    def get_snapshot_image(session_id: str, index: int):
        session = registry.get(session_id)
        snapshots = [e for e in session.events if e.kind == "snapshot"]
        if not 0 <= index < len(snapshots):
            raise ApiError(404, "not_found", f"no snapshot {index}; have {len(snapshots)}")
        layout = layout_from_dict(snapshots[index].payload["layout"], session.room.polygon)
        scene = _snapshot_scene(session, layout)
        return Response(render_top_view(scene, engine.config.px_per_m), media_type="image/png")

    def _snapshot_scene(session: Session, layout) -> SceneDocument:
        objects = []
        for p in sorted(layout.placements, key=lambda p: p.instance_id):
            entry = engine.catalog.lookup(p.factory)
            w, d, h = entry.variants[p.variant_index]
            objects.append(
                {
                    "id": p.instance_id,
                    "object_name": p.object_name,
                    "factory": p.factory,
                    "variant_index": p.variant_index,
                    "dims": [w, d, h],
                    "position": list(p.footprint.center),
                    "rotation": p.footprint.rotation,
                    "tier": p.tier,
                    "parent": p.parent_instance,
                }
            )
        return SceneDocument(
            {
                "format": "roomsmith-scene/1",
                "room": session.room.to_dict(),
                "objects": objects,
                "metrics": {},
                "provenance": {},
            }
        )

    @app.get("/healthz")
    def health():
        return {"status": "ok"}

    return app
